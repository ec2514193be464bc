//! Grid-centroid comparator estimator.

use crate::constraint::AnnulusConstraint;
use crate::geometry::Point2D;

/// Sample spacing in meters. Samples sit on multiples of the spacing.
pub const BASELINE_GRID: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
struct Region {
    min: Point2D,
    max: Point2D,
}

impl Region {
    fn of(c: &AnnulusConstraint) -> Region {
        let r = c.upper().unwrap_or(c.lower());
        let a = c.center();
        Region {
            min: Point2D::new(a.x - r, a.y - r),
            max: Point2D::new(a.x + r, a.y + r),
        }
    }

    fn intersect(self, o: Region) -> Region {
        Region {
            min: Point2D::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y)),
            max: Point2D::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y)),
        }
    }

    fn union(self, o: Region) -> Region {
        Region {
            min: Point2D::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point2D::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    fn samples(&self) -> Vec<Point2D> {
        let axis = |lo: f64, hi: f64| {
            let first = (lo / BASELINE_GRID).ceil() as i64;
            let last = (hi / BASELINE_GRID).floor() as i64;
            if first > last {
                vec![((lo + hi) / 2.0 / BASELINE_GRID).round() * BASELINE_GRID]
            } else {
                (first..=last).map(|k| k as f64 * BASELINE_GRID).collect()
            }
        };
        let xs = axis(self.min.x, self.max.x);
        let ys = axis(self.min.y, self.max.y);
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| Point2D::new(x, y)))
            .collect()
    }
}

fn centroid(points: &[Point2D]) -> Point2D {
    points.iter().fold(Point2D::ORIGIN, |acc, &p| acc + p) * (1.0 / points.len() as f64)
}

/// Centroid of the sampled feasible region.
///
/// Samples cover the intersection of the upper-bound disks' bounding boxes
/// (the union of all boxes when that is empty). With no feasible sample, the
/// centroid of the samples with the least total violation is returned.
/// `None` for an empty constraint list.
pub fn baseline_estimate(constraints: &[AnnulusConstraint]) -> Option<Point2D> {
    let union = constraints.iter().map(Region::of).reduce(Region::union)?;
    let bounded = constraints
        .iter()
        .filter(|c| c.upper().is_some())
        .map(Region::of)
        .reduce(Region::intersect);
    let region = match bounded {
        Some(r) if !r.is_empty() => r,
        _ => union,
    };
    let samples = region.samples();
    let feasible: Vec<Point2D> = samples
        .iter()
        .copied()
        .filter(|p| constraints.iter().all(|c| c.contains(*p)))
        .collect();
    if !feasible.is_empty() {
        return Some(centroid(&feasible));
    }
    let scored: Vec<(Point2D, f64)> = samples
        .into_iter()
        .map(|p| (p, constraints.iter().map(|c| c.violation(p)).sum()))
        .collect();
    let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let ties: Vec<Point2D> = scored
        .iter()
        .filter(|s| s.1 <= best + 1e-9 * (1.0 + best))
        .map(|s| s.0)
        .collect();
    Some(centroid(&ties))
}
