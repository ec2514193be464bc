//! Convex position estimation from annulus constraints.
//!
//! Each constraint bound `ρ` yields a residual `|x - a|² - ρ²`. Lifting
//! `|x|²` to a free variable `y` makes every residual affine:
//!
//! ```text
//! v(y, x) = y - 2 a·x + |a|² - ρ²
//! ```
//!
//! and the structured matrix `Y = [[y, xᵀ], [x, I₂]]` is positive
//! semidefinite exactly when `y >= |x|²` (Schur complement of the identity
//! block). The semidefinite program therefore reduces to
//!
//! ```text
//! minimize ‖v(y, x)‖   subject to   y >= |x|²
//! ```
//!
//! in three unknowns, solved here with a log-barrier interior-point method on
//! the squared norm (same minimizer). The position estimate is the `x` part of
//! the optimum.

pub mod objective;
pub mod oracle;

pub use objective::{distance_objective, squared_distance_objective};
pub use oracle::{oracle_grid, relaxed_profile, BoundingBox};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::constraint::AnnulusConstraint;
use crate::error::SolveError;
use crate::geometry::Point2D;

/// One affine residual: `y - 2 center·x + |center|² - radius_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub center: Point2D,
    pub radius_sq: f64,
}

impl ResidualRow {
    pub fn eval(&self, y: f64, x: Point2D) -> f64 {
        y - 2.0 * self.center.dot(x) + self.center.norm_squared() - self.radius_sq
    }
}

/// The lifted problem for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedProblem {
    constraints: Vec<AnnulusConstraint>,
    rows: Vec<ResidualRow>,
}

impl RelaxedProblem {
    pub fn new(constraints: Vec<AnnulusConstraint>) -> Result<Self, SolveError> {
        if constraints.is_empty() {
            return Err(SolveError::NotLocalizable);
        }
        let rows = constraints
            .iter()
            .flat_map(|c| {
                let center = c.center();
                c.squared_radii()
                    .map(move |radius_sq| ResidualRow { center, radius_sq })
            })
            .collect();
        Ok(RelaxedProblem { constraints, rows })
    }

    pub fn constraints(&self) -> &[AnnulusConstraint] {
        &self.constraints
    }

    pub fn rows(&self) -> &[ResidualRow] {
        &self.rows
    }

    pub fn residuals(&self, y: f64, x: Point2D) -> Vec<f64> {
        self.rows.iter().map(|r| r.eval(y, x)).collect()
    }

    /// `‖v(y, x)‖`.
    pub fn objective(&self, y: f64, x: Point2D) -> f64 {
        self.rows.iter().map(|r| r.eval(y, x).powi(2)).sum::<f64>().sqrt()
    }
}

/// The rank-one coefficient matrix `[1; -a][1, -aᵀ]`.
pub fn anchor_matrix(a: Point2D) -> Matrix3<f64> {
    let v = Vector3::new(1.0, -a.x, -a.y);
    v * v.transpose()
}

/// The structured lifted matrix `[[y, xᵀ], [x, I₂]]`.
pub fn lifted_matrix(y: f64, x: Point2D) -> Matrix3<f64> {
    Matrix3::new(y, x.x, x.y, x.x, 1.0, 0.0, x.y, 0.0, 1.0)
}

/// Sum of elementwise products.
pub fn frobenius_inner(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    a.component_mul(b).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    /// The optimal `x` is not unique; the minimum-norm optimum (about the
    /// constraint centroid) was returned.
    Degenerate,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveResult {
    pub x_hat: Point2D,
    /// Lifted value standing in for `|x|²`, in m².
    pub y: f64,
    /// Optimal `‖v‖`.
    pub t: f64,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    /// `y - |x̂|²` is within tolerance, i.e. the relaxation is exact here.
    pub relaxation_tight: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative KKT tolerance.
    pub tol: f64,
    /// Cap on Newton iterations across all barrier stages.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Slack below which the relaxation counts as tight, relative to the squared problem scale.
const TIGHT_SLACK: f64 = 1e-6;
/// Relative eigenvalue cutoff for a direction the residuals cannot see.
const NULL_EIG: f64 = 1e-10;
const F_FLOOR: f64 = 1e-14;
const BARRIER_SHRINK: f64 = 0.1;

/// Problem moved to the constraint centroid and divided by a length scale,
/// so the unknowns and coefficients are all O(1).
struct Normalized {
    origin: Point2D,
    scale: f64,
    h: Matrix3<f64>,
    g: Vector3<f64>,
    rows: Vec<(Vector3<f64>, f64)>,
}

impl Normalized {
    fn new(problem: &RelaxedProblem) -> Self {
        let cs = problem.constraints();
        let origin = cs.iter().fold(Point2D::ORIGIN, |acc, c| acc + c.center()) * (1.0 / cs.len() as f64);
        let scale = problem
            .rows()
            .iter()
            .map(|r| (r.center - origin).norm().max(r.radius_sq.sqrt()))
            .fold(1.0, f64::max);
        let mut h = Matrix3::zeros();
        let mut g = Vector3::zeros();
        let rows: Vec<_> = problem
            .rows()
            .iter()
            .map(|r| {
                let a = (r.center - origin) * (1.0 / scale);
                let b = Vector3::new(1.0, -2.0 * a.x, -2.0 * a.y);
                let c = r.radius_sq / (scale * scale) - a.norm_squared();
                h += b * b.transpose();
                g += b * c;
                (b, c)
            })
            .collect();
        Normalized {
            origin,
            scale,
            h,
            g,
            rows,
        }
    }

    fn f(&self, z: &Vector3<f64>) -> f64 {
        self.rows.iter().map(|(b, c)| (b.dot(z) - c).powi(2)).sum()
    }

    fn grad_f(&self, z: &Vector3<f64>) -> Vector3<f64> {
        2.0 * (self.h * z - self.g)
    }

    /// Scaled KKT violation of `(z, λ)`: stationarity, complementarity, primal feasibility.
    fn kkt_residual(&self, z: &Vector3<f64>, lambda: f64) -> f64 {
        let s = slack(z);
        let stationarity = (self.grad_f(z) - slack_grad(z) * lambda).norm();
        stationarity.max((lambda * s).abs()).max((-s).max(0.0)) / self.f(z).max(F_FLOOR)
    }

    /// Active-set refinement of a barrier iterate.
    ///
    /// Tries the unconstrained least-squares point first; when that violates
    /// the cone, runs Newton on `x` with `y = |x|²` substituted. Returns the
    /// refined point and its multiplier, or `None` when neither candidate is a
    /// KKT point.
    fn polish(&self, start: &Vector3<f64>) -> Option<(Vector3<f64>, f64)> {
        let eig = SymmetricEigen::new(self.h);
        if eig.eigenvalues.min() > NULL_EIG * eig.eigenvalues.max() {
            if let Some(z) = self.h.cholesky().map(|ch| ch.solve(&self.g)) {
                if slack(&z) >= 0.0 {
                    return Some((z, 0.0));
                }
            }
        }
        let lift = |x: nalgebra::Vector2<f64>| Vector3::new(x.norm_squared(), x[0], x[1]);
        let surface = |x: nalgebra::Vector2<f64>| self.f(&lift(x));
        let mut x = nalgebra::Vector2::new(start[1], start[2]);
        for _ in 0..50 {
            let z = lift(x);
            let mut grad = nalgebra::Vector2::zeros();
            let mut hess = nalgebra::Matrix2::zeros();
            for (b, c) in &self.rows {
                let r = b.dot(&z) - c;
                let j = 2.0 * x + nalgebra::Vector2::new(b[1], b[2]);
                grad += 2.0 * r * j;
                hess += 2.0 * (j * j.transpose()) + nalgebra::Matrix2::identity() * (4.0 * r);
            }
            let Some(step) = hess.cholesky().map(|ch| -ch.solve(&grad)) else {
                break;
            };
            let f0 = surface(x);
            let mut alpha = 1.0;
            while alpha > 1e-10 && surface(x + step * alpha) > f0 {
                alpha *= 0.5;
            }
            if alpha <= 1e-10 {
                break;
            }
            let next = x + step * alpha;
            let done = (next - x).norm() <= 1e-15 * (1.0 + x.norm());
            x = next;
            if done {
                break;
            }
        }
        let z = lift(x);
        let lambda = self.grad_f(&z)[0];
        (lambda >= 0.0).then_some((z, lambda))
    }
}

fn slack(z: &Vector3<f64>) -> f64 {
    z[0] - z[1] * z[1] - z[2] * z[2]
}

fn slack_grad(z: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(1.0, -2.0 * z[1], -2.0 * z[2])
}

/// Solves the lifted problem with a log-barrier interior-point method.
///
/// The barrier subproblem `f(z) - μ log(y - |x|²)` is minimized by damped
/// Newton steps; `μ` shrinks tenfold per stage until the duality gap `μ` is
/// below `tol · f`. At a barrier minimizer the multiplier of `y >= |x|²` is
/// `μ / s`, which gives the KKT residual reported in the result.
pub fn solve_relaxation(problem: &RelaxedProblem, tol: f64, max_iter: usize) -> SolveResult {
    let np = Normalized::new(problem);
    let mean_c = np.rows.iter().map(|(_, c)| c).sum::<f64>() / np.rows.len() as f64;
    let mut z = Vector3::new(1.0 + mean_c.max(0.0), 0.0, 0.0);
    let mut mu = np.f(&z).max(F_FLOOR);
    let mut iterations = 0;
    let mut converged = false;

    let barrier = |z: &Vector3<f64>, mu: f64| {
        let s = slack(z);
        if s <= 0.0 {
            f64::INFINITY
        } else {
            np.f(z) - mu * s.ln()
        }
    };

    'outer: loop {
        loop {
            let s = slack(&z);
            let ds = slack_grad(&z);
            let grad = np.grad_f(&z) - ds * (mu / s);
            if iterations >= max_iter {
                break 'outer;
            }
            let hess = 2.0 * np.h
                + ds * ds.transpose() * (mu / (s * s))
                + Matrix3::from_diagonal(&Vector3::new(0.0, 2.0, 2.0)) * (mu / s);
            let Some(step) = hess.cholesky().map(|ch| -ch.solve(&grad)) else {
                break;
            };
            let slope = grad.dot(&step);
            // half the squared Newton decrement bounds the distance to the barrier minimizer
            if -slope <= 2e-3 * mu {
                break;
            }
            let phi0 = barrier(&z, mu);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = z + step * alpha;
                if slack(&cand) > 0.0 && barrier(&cand, mu) <= phi0 + 0.25 * alpha * slope {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            iterations += 1;
            if !accepted {
                // no representable decrease left at this μ
                break;
            }
            z += step * alpha;
        }
        if mu <= 0.5 * tol * np.f(&z).max(F_FLOOR) {
            converged = true;
            break;
        }
        mu *= BARRIER_SHRINK;
    }

    let mut lambda = mu / slack(&z);
    if let Some((polished, multiplier)) = np.polish(&z) {
        if np.f(&polished) <= np.f(&z) * (1.0 + 1e-12) {
            z = polished;
            lambda = multiplier;
        }
    }
    let kkt_residual = np.kkt_residual(&z, lambda);
    let s = slack(&z);

    let mut status = if converged && kkt_residual <= tol {
        SolveStatus::Optimal
    } else {
        SolveStatus::MaxIterations
    };

    // Directions invisible to every residual leave x free while the cone
    // constraint is slack; collapse them to the minimum-norm point.
    let mut x = Point2D::new(z[1], z[2]);
    let eig = SymmetricEigen::new(np.h);
    let max_eig = eig.eigenvalues.max();
    if s > TIGHT_SLACK {
        for k in 0..3 {
            if eig.eigenvalues[k] <= NULL_EIG * max_eig {
                let w = eig.eigenvectors.column(k);
                let wx = Point2D::new(w[1], w[2]);
                let n2 = wx.norm_squared();
                if n2 > 0.5 {
                    x = x - wx * (x.dot(wx) / n2);
                    if status == SolveStatus::Optimal {
                        status = SolveStatus::Degenerate;
                    }
                }
            }
        }
    }

    let scale = np.scale;
    let x_centered = x * scale;
    let y_centered = z[0] * scale * scale;
    let slack_orig = y_centered - x_centered.norm_squared();
    let x_hat = np.origin + x_centered;
    let y = slack_orig + x_hat.norm_squared();
    SolveResult {
        x_hat,
        y,
        t: np.f(&z).sqrt() * scale * scale,
        status,
        kkt_residual,
        relaxation_tight: slack_orig <= TIGHT_SLACK * scale * scale,
        iterations,
    }
}

/// Full estimation step for one sensor: validate, solve, report.
pub fn estimate_position(
    constraints: &[AnnulusConstraint],
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let problem = RelaxedProblem::new(constraints.to_vec())?;
    Ok(solve_relaxation(&problem, config.tol, config.max_iter))
}
