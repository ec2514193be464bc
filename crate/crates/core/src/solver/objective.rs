//! Nonconvex estimation objectives evaluated at a candidate position.
//!
//! Both are minimized by the relaxation only indirectly; they serve as the
//! reference quantities the relaxed optimum is compared against.

use crate::constraint::AnnulusConstraint;
use crate::geometry::Point2D;

/// `Σ (d_i - r_i)² + (d_i - R_i)²` with `d_i = |x - a_i|`.
///
/// A constraint without an upper bound contributes only its lower term.
pub fn distance_objective(x: Point2D, constraints: &[AnnulusConstraint]) -> f64 {
    constraints
        .iter()
        .map(|c| {
            let d = x.distance(c.center());
            let lo = (d - c.lower()).powi(2);
            lo + c.upper().map_or(0.0, |u| (d - u).powi(2))
        })
        .sum()
}

/// `sqrt(Σ (d_i² - r_i²)² + (d_i² - R_i²)²)`, the squared-distance residual norm.
///
/// This equals the relaxed objective on the surface `y = |x|²`.
pub fn squared_distance_objective(x: Point2D, constraints: &[AnnulusConstraint]) -> f64 {
    constraints
        .iter()
        .map(|c| {
            let d2 = (x - c.center()).norm_squared();
            c.squared_radii().map(|r2| (d2 - r2).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}
