//! Brute-force reference for the relaxed problem.
//!
//! For a fixed position the relaxed objective depends on `y` only through the
//! slack `s = y - |x|² >= 0`, and every residual is `s + e_i` with
//! `e_i = |x - a_i|² - ρ_i²`. The optimal slack is `max(0, -mean(e))`, which
//! gives a closed-form profile over `x` that a grid search can minimize. The
//! profile is convex, so coarse-to-fine refinement converges to the optimum.

use crate::constraint::AnnulusConstraint;
use crate::geometry::Point2D;

/// Axis-aligned search region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point2D,
    pub max: Point2D,
}

impl BoundingBox {
    pub fn new(min: Point2D, max: Point2D) -> Self {
        BoundingBox { min, max }
    }

    /// Box around every constraint center, padded by the largest radius plus `margin`.
    pub fn around(constraints: &[AnnulusConstraint], margin: f64) -> Self {
        let pad = constraints
            .iter()
            .map(|c| c.upper().unwrap_or(c.lower()))
            .fold(0.0, f64::max)
            + margin;
        let (mut lo, mut hi) = (
            Point2D::new(f64::INFINITY, f64::INFINITY),
            Point2D::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for c in constraints {
            let a = c.center();
            lo = Point2D::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point2D::new(hi.x.max(a.x), hi.y.max(a.y));
        }
        BoundingBox::new(
            Point2D::new(lo.x - pad, lo.y - pad),
            Point2D::new(hi.x + pad, hi.y + pad),
        )
    }
}

/// Relaxed objective minimized over the lifted variable at position `x`.
pub fn relaxed_profile(x: Point2D, constraints: &[AnnulusConstraint]) -> f64 {
    let mut residuals = Vec::with_capacity(2 * constraints.len());
    for c in constraints {
        let d2 = (x - c.center()).norm_squared();
        residuals.push(d2 - c.lower() * c.lower());
        if let Some(u) = c.upper() {
            residuals.push(d2 - u * u);
        }
    }
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let slack = (-mean).max(0.0);
    residuals.iter().map(|e| (e + slack).powi(2)).sum::<f64>().sqrt()
}

fn scan(
    constraints: &[AnnulusConstraint],
    origin: Point2D,
    step: f64,
    nx: usize,
    ny: usize,
) -> (Point2D, f64) {
    let mut best = (origin, f64::INFINITY);
    for i in 0..=nx {
        for j in 0..=ny {
            let p = Point2D::new(origin.x + i as f64 * step, origin.y + j as f64 * step);
            let v = relaxed_profile(p, constraints);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    best
}

/// Grid search with `refine_levels` rounds of ×10 refinement around the incumbent.
///
/// Returns the best position and its relaxed objective value. Panics on an
/// empty constraint list or a non-positive step.
pub fn oracle_grid(
    constraints: &[AnnulusConstraint],
    bbox: BoundingBox,
    coarse_step: f64,
    refine_levels: usize,
) -> (Point2D, f64) {
    assert!(!constraints.is_empty(), "oracle needs at least one constraint");
    assert!(coarse_step > 0.0, "grid step must be positive");
    let nx = ((bbox.max.x - bbox.min.x) / coarse_step).ceil().max(0.0) as usize;
    let ny = ((bbox.max.y - bbox.min.y) / coarse_step).ceil().max(0.0) as usize;
    let mut best = scan(constraints, bbox.min, coarse_step, nx, ny);
    let mut step = coarse_step;
    for _ in 0..refine_levels {
        // two old cells either side of the incumbent, at a tenth of the spacing
        let half = 2.0 * step;
        step /= 10.0;
        let origin = Point2D::new(best.0.x - half, best.0.y - half);
        let cand = scan(constraints, origin, step, 40, 40);
        if cand.1 <= best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_value_is_slack_only() {
        // r=1, R=3: residuals are s+d²-1 and s+d²-9, optimum gives |v| = √2·4
        let c = vec![AnnulusConstraint::two_sided(Point2D::ORIGIN, 1.0, 3.0).unwrap()];
        let (_, v) = oracle_grid(&c, BoundingBox::around(&c, 1.0), 0.5, 2);
        assert!((v - 4.0 * 2f64.sqrt()).abs() < 1e-9);
        // the profile is flat inside the disk |x|² <= 5
        assert!((relaxed_profile(Point2D::new(1.0, 1.5), &c) - v).abs() < 1e-9);
    }

    #[test]
    fn disjoint_disks_midpoint() {
        let c = vec![
            AnnulusConstraint::disk(Point2D::ORIGIN, 1.0).unwrap(),
            AnnulusConstraint::disk(Point2D::new(10.0, 0.0), 1.0).unwrap(),
        ];
        let bb = BoundingBox::new(Point2D::new(-2.0, -2.0), Point2D::new(12.0, 12.0));
        let (p, _) = oracle_grid(&c, bb, 1.0, 3);
        assert!(p.distance(Point2D::new(5.0, 0.0)) <= 1e-3);
    }
}
