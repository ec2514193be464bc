//! Planar primitives: points, obstacle polygons and line-of-sight tests.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Relative tolerance used by the incidence predicates.
const GEOM_EPS: f64 = 1e-9;

/// A position in the field, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2D) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2D) -> f64 {
        (self - other).norm()
    }

    /// Bearing from `self` towards `other` in degrees, in `[0, 360)`.
    pub fn bearing_degrees(self, other: Point2D) -> f64 {
        let d = other - self;
        let deg = d.y.atan2(d.x).to_degrees();
        let wrapped = deg.rem_euclid(360.0);
        // rem_euclid can round up to exactly 360.0 for tiny negative inputs
        if wrapped >= 360.0 {
            0.0
        } else {
            wrapped
        }
    }
}

impl From<[f64; 2]> for Point2D {
    fn from(v: [f64; 2]) -> Self {
        Point2D::new(v[0], v[1])
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, k: f64) -> Point2D {
        Point2D::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// A simple polygon with positive area. Vertices are stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstaclePolygon {
    vertices: Vec<Point2D>,
}

impl ObstaclePolygon {
    /// Validates and normalizes the vertex ring. Either orientation is accepted.
    pub fn new(mut vertices: Vec<Point2D>) -> Result<Self, ScenarioError> {
        if vertices.len() < 3 {
            return Err(ScenarioError::InvalidObstacle(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(ScenarioError::InvalidObstacle(format!("non-finite vertex {p:?}")));
        }
        let area = signed_area(&vertices);
        if area.abs() <= GEOM_EPS * bbox_diag(&vertices).powi(2) {
            return Err(ScenarioError::InvalidObstacle(
                "polygon has zero area".to_string(),
            ));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let poly = ObstaclePolygon { vertices };
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(ScenarioError::InvalidObstacle(format!(
                "polygon is not simple: edges {i} and {j} intersect"
            )));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle with the given corners.
    pub fn rectangle(min: Point2D, max: Point2D) -> Result<Self, ScenarioError> {
        Self::new(vec![
            min,
            Point2D::new(max.x, min.y),
            max,
            Point2D::new(min.x, max.y),
        ])
    }

    /// Axis-aligned square of side `side` centered on `center`.
    pub fn square(center: Point2D, side: f64) -> Result<Self, ScenarioError> {
        let h = side / 2.0;
        Self::rectangle(
            Point2D::new(center.x - h, center.y - h),
            Point2D::new(center.x + h, center.y + h),
        )
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2D {
        let a = self.area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point2D::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn scale(&self) -> f64 {
        bbox_diag(&self.vertices).max(1.0)
    }

    pub fn boundary_distance(&self, p: Point2D) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True iff `p` lies strictly inside the polygon (points on the boundary are outside).
    pub fn contains_interior(&self, p: Point2D) -> bool {
        if self.boundary_distance(p) <= GEOM_EPS * self.scale() {
            return false;
        }
        // even-odd ray cast towards +x
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x_at > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True iff the open segment `pq` passes through the polygon interior.
    ///
    /// The segment is cut at every boundary incidence; a piece blocks when its
    /// midpoint is interior. Grazing a vertex or sliding along an edge leaves
    /// no interior piece.
    pub fn blocks_segment(&self, p: Point2D, q: Point2D) -> bool {
        let r = q - p;
        let len2 = r.norm_squared();
        if len2 == 0.0 {
            return self.contains_interior(p);
        }
        let eps = GEOM_EPS * self.scale();
        let mut cuts = vec![0.0, 1.0];
        for (c, d) in self.edges() {
            let s = d - c;
            let denom = r.cross(s);
            let cp = c - p;
            if denom.abs() > eps * r.norm() * s.norm() {
                let t = cp.cross(s) / denom;
                let u = cp.cross(r) / denom;
                if (0.0..=1.0).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
                    cuts.push(t);
                }
            } else if cp.cross(r).abs() <= eps * r.norm() {
                // collinear edge: its endpoints bound the shared stretch
                for v in [c, d] {
                    let t = (v - p).dot(r) / len2;
                    if (0.0..=1.0).contains(&t) {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2).any(|w| {
            let (t0, t1) = (w[0], w[1]);
            t1 - t0 > 1e-12 && self.contains_interior(p + r * (0.5 * (t0 + t1)))
        })
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edge = |i: usize| (self.vertices[i], self.vertices[(i + 1) % n]);
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edge(i);
                let (c, d) = edge(j);
                if adjacent {
                    // adjacent edges may only share their common vertex
                    let (shared, far_a, far_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let u = far_a - shared;
                    let v = far_b - shared;
                    if u.cross(v).abs() <= GEOM_EPS * u.norm() * v.norm() && u.dot(v) > 0.0 {
                        return Some((i, j));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl Serialize for ObstaclePolygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.vertices.serialize(s)
    }
}

fn signed_area(vertices: &[Point2D]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

fn bbox_diag(points: &[Point2D]) -> f64 {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Point2D::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2D::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    lo.distance(hi)
}

fn orient(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2D, b: Point2D, p: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching included.
pub fn segments_intersect(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Line-of-sight test against every obstacle.
pub fn segment_blocked(p: Point2D, q: Point2D, obstacles: &[ObstaclePolygon]) -> bool {
    obstacles.iter().any(|o| o.blocks_segment(p, q))
}

/// Distance from `p` to the nearest obstacle boundary, `INFINITY` with no obstacles.
pub fn nearest_boundary_distance(p: Point2D, obstacles: &[ObstaclePolygon]) -> f64 {
    obstacles
        .iter()
        .map(|o| o.boundary_distance(p))
        .fold(f64::INFINITY, f64::min)
}
