//! Planar primitives shared by every module: points, orientation with an
//! epsilon ladder, polyline resampling, polygon queries.

use serde::Serialize;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

pub const fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

impl Point {
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self × o`.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Rotation by +90 degrees: (x, y) -> (-y, x).
    pub fn rot90(self) -> Point {
        pt(-self.y, self.x)
    }

    pub fn unit(self) -> Point {
        let n = self.norm();
        debug_assert!(n > 0.0, "unit() on zero vector");
        pt(self.x / n, self.y / n)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        pt(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        pt(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        pt(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        pt(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, s: f64) -> Point {
        pt(self.x / s, self.y / s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        pt(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Orientation {
    Clockwise,
    Collinear,
    CounterClockwise,
}

/// Orientation of the triangle (a, b, c) with an epsilon ladder: the raw
/// determinant is trusted only when it clears a magnitude-scaled bound,
/// otherwise the triple counts as collinear. Relative bound 1e-12 matches
/// the strict-convexity surrogate used by domain discretizations.
pub fn orient2d(a: Point, b: Point, c: Point) -> Orientation {
    let det = (b - a).cross(c - a);
    let scale = (b - a).norm() * (c - a).norm();
    if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        Orientation::Collinear
    } else if det > 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

/// Proper intersection of open segments (p1,p2) and (q1,q2). Touching at
/// endpoints (within eps of an endpoint) does not count.
pub fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point, eps: f64) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    let s1 = (p2 - p1).norm();
    let s2 = (q2 - q1).norm();
    let tol1 = eps * s1.max(1e-300);
    let tol2 = eps * s2.max(1e-300);
    d1 * d2 < -tol1 * tol1 && d3 * d4 < -tol2 * tol2
}

/// Shoelace area of a closed polygon (positive for counterclockwise order).
pub fn polygon_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Even-odd point-in-polygon test. Points within `eps` of an edge count as
/// inside; callers that need a three-way answer should check the distance
/// separately.
pub fn point_in_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let xi = a.x + t * (b.x - a.x);
            if p.x < xi {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the closed polyline (wrapping if `closed`).
pub fn dist_to_polyline(p: Point, pts: &[Point], closed: bool) -> f64 {
    let n = pts.len();
    let m = if closed { n } else { n - 1 };
    let mut best = f64::INFINITY;
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        best = best.min(dist_to_segment(p, a, b));
    }
    best
}

pub fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sq();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug)]
pub struct Bbox {
    pub lo: Point,
    pub hi: Point,
}

impl Bbox {
    pub fn of(pts: &[Point]) -> Bbox {
        let mut lo = pt(f64::INFINITY, f64::INFINITY);
        let mut hi = pt(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Bbox { lo, hi }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn inflate(&self, r: f64) -> Bbox {
        Bbox {
            lo: pt(self.lo.x - r, self.lo.y - r),
            hi: pt(self.hi.x + r, self.hi.y + r),
        }
    }

    pub fn diag(&self) -> f64 {
        self.hi.dist(self.lo)
    }
}

/// Resample a polyline to (approximately) uniform arc-length spacing `ds`.
/// The first and last input vertices are kept exactly; for closed use the
/// caller appends no duplicate of the first vertex.
pub fn resample_by_arclength(pts: &[Point], ds: f64, closed: bool) -> Vec<Point> {
    assert!(pts.len() >= 2 && ds > 0.0);
    let mut cum = Vec::with_capacity(pts.len() + 1);
    cum.push(0.0);
    let n = pts.len();
    let m = if closed { n } else { n - 1 };
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        cum.push(cum[i] + a.dist(b));
    }
    let total = *cum.last().unwrap();
    let count = ((total / ds).round() as usize).max(if closed { 8 } else { 2 });
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count + 1);
    let last = if closed { count } else { count + 1 };
    let mut seg = 0usize;
    for k in 0..last {
        let target = (k as f64 * step).min(total);
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let a = pts[seg];
        let b = pts[(seg + 1) % n];
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        out.push(a.lerp(b, t));
    }
    out
}

/// Cumulative arc-length parameters of a polyline. For a closed polyline the
/// returned vector has `pts.len() + 1` entries (the last one is the total
/// length); for an open one it has `pts.len()` entries.
pub fn cumulative_params(pts: &[Point], closed: bool) -> Vec<f64> {
    let n = pts.len();
    let m = if closed { n } else { n - 1 };
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        cum.push(cum[i] + a.dist(b));
    }
    cum
}

/// Deterministic 64-bit mix (splitmix64). Used for level jitter so runs are
/// reproducible across platforms; std's hasher is not stable across releases.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Uniform in [0, 1) derived from `splitmix64`.
pub fn hash_unit(seed: u64) -> f64 {
    (splitmix64(seed) >> 11) as f64 / (1u64 << 53) as f64
}

/// Find an interior point of a simple polygon: try the centroid, then
/// midpoints of short inward offsets from edge midpoints.
pub fn interior_point(poly: &[Point]) -> Option<Point> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut c = pt(0.0, 0.0);
    for p in poly {
        c = c + *p;
    }
    c = c / n as f64;
    if point_in_polygon(c, poly) {
        return Some(c);
    }
    let area = polygon_area(poly);
    let orient = if area >= 0.0 { 1.0 } else { -1.0 };
    let scale = Bbox::of(poly).diag();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.dist(b) < 1e-12 * scale {
            continue;
        }
        let mid = a.lerp(b, 0.5);
        let inward = (b - a).rot90().unit() * orient;
        for k in [1e-6, 1e-4, 1e-2] {
            let q = mid + inward * (k * scale);
            if point_in_polygon(q, poly) {
                return Some(q);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_ladder() {
        assert_eq!(
            orient2d(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)),
            Orientation::CounterClockwise
        );
        assert_eq!(
            orient2d(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, -1.0)),
            Orientation::Clockwise
        );
        // Nearly collinear within the relative bound.
        assert_eq!(
            orient2d(pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 1e-14)),
            Orientation::Collinear
        );
    }

    #[test]
    fn polygon_queries() {
        let sq = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        assert!((polygon_area(&sq) - 1.0).abs() < 1e-15);
        assert!(point_in_polygon(pt(0.5, 0.5), &sq));
        assert!(!point_in_polygon(pt(1.5, 0.5), &sq));
        assert!((dist_to_polyline(pt(0.5, -1.0), &sq, true) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resample_uniform() {
        let square = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        let r = resample_by_arclength(&square, 0.1, true);
        assert_eq!(r.len(), 40);
        let cum = cumulative_params(&r, true);
        let total = cum.last().unwrap();
        assert!((total - 4.0).abs() < 1e-9);
    }

    #[test]
    fn segment_crossing() {
        assert!(segments_cross(
            pt(0.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
            pt(1.0, 0.0),
            1e-12
        ));
        // Shared endpoint is not a proper crossing.
        assert!(!segments_cross(
            pt(0.0, 0.0),
            pt(1.0, 1.0),
            pt(1.0, 1.0),
            pt(2.0, 0.0),
            1e-12
        ));
    }
}
