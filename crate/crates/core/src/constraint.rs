//! Annulus constraints `lower < |x - center| <= upper` and their text form.

use std::fmt;
use std::str::FromStr;

use crate::error::ConstraintError;
use crate::geometry::Point2D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusConstraint {
    center: Point2D,
    lower: f64,
    upper: Option<f64>,
    via_relay: bool,
}

impl AnnulusConstraint {
    pub fn new(center: Point2D, lower: f64, upper: Option<f64>) -> Result<Self, ConstraintError> {
        if !center.is_finite() {
            return Err(ConstraintError::NonFiniteCenter);
        }
        if !(lower.is_finite() && lower >= 0.0) {
            return Err(ConstraintError::NegativeLower(lower));
        }
        match upper {
            Some(u) if !(u.is_finite() && lower < u) => {
                Err(ConstraintError::EmptyAnnulus { lower, upper: u })
            }
            None if lower == 0.0 => Err(ConstraintError::Vacuous),
            _ => Ok(AnnulusConstraint {
                center,
                lower,
                upper,
                via_relay: false,
            }),
        }
    }

    pub fn two_sided(center: Point2D, lower: f64, upper: f64) -> Result<Self, ConstraintError> {
        Self::new(center, lower, Some(upper))
    }

    pub fn disk(center: Point2D, upper: f64) -> Result<Self, ConstraintError> {
        Self::new(center, 0.0, Some(upper))
    }

    pub fn lower_only(center: Point2D, lower: f64) -> Result<Self, ConstraintError> {
        Self::new(center, lower, None)
    }

    pub fn relayed(mut self) -> Self {
        self.via_relay = true;
        self
    }

    pub fn center(&self) -> Point2D {
        self.center
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    pub fn via_relay(&self) -> bool {
        self.via_relay
    }

    /// True iff `p` satisfies the inequality exactly (strict lower, closed upper).
    pub fn contains(&self, p: Point2D) -> bool {
        let d = p.distance(self.center);
        d > self.lower && self.upper.is_none_or(|u| d <= u)
    }

    /// Distance by which `p` misses the annulus; zero inside.
    pub fn violation(&self, p: Point2D) -> f64 {
        let d = p.distance(self.center);
        let above = self.upper.map_or(0.0, |u| (d - u).max(0.0));
        above + (self.lower - d).max(0.0)
    }

    /// Squared-radius targets this constraint contributes to the relaxed objective.
    pub(crate) fn squared_radii(&self) -> impl Iterator<Item = f64> {
        std::iter::once(self.lower * self.lower).chain(self.upper.map(|u| u * u))
    }
}

impl fmt::Display for AnnulusConstraint {
    /// One line of the constraint-list format: `cx cy lower upper|-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ", self.center.x, self.center.y, self.lower)?;
        match self.upper {
            Some(u) => write!(f, "{u}"),
            None => write!(f, "-"),
        }
    }
}

impl FromStr for AnnulusConstraint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(format!(
                "expected 4 fields `cx cy lower upper|-`, got {}",
                fields.len()
            ));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
        let center = Point2D::new(num(fields[0])?, num(fields[1])?);
        let lower = num(fields[2])?;
        let upper = match fields[3] {
            "-" => None,
            t => Some(num(t)?),
        };
        AnnulusConstraint::new(center, lower, upper).map_err(|e| e.to_string())
    }
}

/// Parses a constraint list: one constraint per line, `#` starts a comment.
pub fn parse_constraint_list(text: &str) -> Result<Vec<AnnulusConstraint>, ConstraintError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let c = line
            .parse()
            .map_err(|reason| ConstraintError::Parse { line: i + 1, reason })?;
        out.push(c);
    }
    Ok(out)
}
