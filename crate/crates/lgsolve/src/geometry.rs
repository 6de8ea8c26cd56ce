//! Strictly convex planar domains, bounded and unbounded, stored as dense
//! convex polylines, plus supporting halfplanes and the slab-and-cap
//! truncation that turns an unbounded domain into a bounded strictly convex
//! one.

use crate::geom::{
    cumulative_params, dist_to_polyline, point_in_polygon, polygon_area, pt, resample_by_arclength,
    Bbox, Point,
};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("domain is not convex: {0}")]
    NonConvexDomain(String),
    #[error("truncation slab does not intersect the domain")]
    EmptyTruncation,
    #[error("domain polyline does not extend to depth {0:.2}; rebuild the preset with a larger extent")]
    InsufficientExtent(f64),
    #[error("operation requires an unbounded domain")]
    NotUnbounded,
    #[error("invalid domain input: {0}")]
    BadInput(String),
}

/// Vertex budget for bounded preset boundaries.
pub const BOUNDED_VERTS: usize = 4096;
/// Vertices per unit arc length on unbounded branches.
pub const UNBOUNDED_DENSITY: f64 = 64.0;
/// Default polyline extent (in slab depth) for unbounded presets.
pub const DEFAULT_EXTENT: f64 = 64.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum DomainKind {
    BoundedConvex,
    UnboundedConvex,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PointLocation {
    Inside,
    Boundary,
    Outside,
}

/// Closed halfplane with base point on the boundary and inward unit normal.
/// `depth(p)` measures how far p lies on the inward side of the supporting
/// line; the shifted halfspace of the truncation construction is
/// `depth <= offset`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Halfplane {
    pub base: Point,
    pub normal: Point,
    pub offset: f64,
}

impl Halfplane {
    pub fn depth(&self, p: Point) -> f64 {
        (p - self.base).dot(self.normal)
    }
}

/// Analytic membership tests for the preset shapes; polygon parity otherwise.
#[derive(Clone, Debug)]
enum ShapeTest {
    Polygon,
    Disc,
    Ellipse { a: f64, b: f64 },
    StripExp,
    CuspCubic,
    Hyperbola,
    /// Truncation of an analytic shape: inside iff (base test and depth <=
    /// cut) or inside the cap bulge polygon.
    Truncated { base: Box<ShapeTest>, plane: Halfplane, cut: f64 },
}

/// Metadata a truncation carries so boundary data can be pulled back to the
/// original domain and synthetic (cap / ramp) boundary zones recognized.
#[derive(Clone, Debug)]
pub struct SyntheticInfo {
    pub halfplane: Halfplane,
    /// Slab depth M; data beyond this depth is synthetic.
    pub depth: f64,
    /// Original-domain parameter of the first kept vertex.
    pub kept_offset: f64,
    /// New-parameter range occupied by the kept (true) boundary.
    pub kept_range: (f64, f64),
    /// New-parameter range occupied by the synthetic cap arc.
    pub cap_range: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub kind: DomainKind,
    verts: Vec<Point>,
    /// Cumulative arc-length parameters; closed polylines have one extra
    /// entry holding the total length.
    params: Vec<f64>,
    closed: bool,
    shape: ShapeTest,
    /// Minimal discrete turning per unit length over the polyline (rad/len).
    pub convexity_margin: f64,
    pub allow_nonconvex: bool,
    diameter: f64,
    area: f64,
    label: String,
    /// Preferred base point for supporting halfplanes on unbounded presets.
    anchor: Option<Point>,
    synthetic: Option<SyntheticInfo>,
}

impl Domain {
    fn build(
        verts: Vec<Point>,
        closed: bool,
        shape: ShapeTest,
        label: String,
        allow_nonconvex: bool,
        anchor: Option<Point>,
        synthetic: Option<SyntheticInfo>,
    ) -> Result<Arc<Domain>, GeometryError> {
        if verts.len() < if closed { 8 } else { 4 } {
            return Err(GeometryError::BadInput("too few vertices".into()));
        }
        let verts = dedup_verts(verts, closed);
        let params = cumulative_params(&verts, closed);
        let bbox = Bbox::of(&verts);
        let diameter = bbox.diag();
        let margin = convexity_check(&verts, closed, allow_nonconvex)?;
        let area = if closed { polygon_area(&verts) } else { f64::NAN };
        if closed && area <= 0.0 {
            return Err(GeometryError::BadInput(
                "closed boundary must wind counterclockwise".into(),
            ));
        }
        Ok(Arc::new(Domain {
            kind: if closed {
                DomainKind::BoundedConvex
            } else {
                DomainKind::UnboundedConvex
            },
            verts,
            params,
            closed,
            shape,
            convexity_margin: margin,
            allow_nonconvex,
            diameter,
            area,
            label,
            anchor,
            synthetic,
        }))
    }

    /// Unit disc centred at the origin.
    pub fn disc() -> Arc<Domain> {
        let n = BOUNDED_VERTS;
        let verts: Vec<Point> = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                pt(th.cos(), th.sin())
            })
            .collect();
        Domain::build(verts, true, ShapeTest::Disc, "disc".into(), false, None, None).unwrap()
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Arc<Domain>, GeometryError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(GeometryError::BadInput("ellipse semi-axes must be positive".into()));
        }
        let dense: Vec<Point> = (0..4 * BOUNDED_VERTS)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / (4 * BOUNDED_VERTS) as f64;
                pt(a * th.cos(), b * th.sin())
            })
            .collect();
        let perim = cumulative_params(&dense, true).last().copied().unwrap();
        let verts = resample_by_arclength(&dense, perim / BOUNDED_VERTS as f64, true);
        Domain::build(
            verts,
            true,
            ShapeTest::Ellipse { a, b },
            format!("ellipse({a},{b})"),
            false,
            None,
            None,
        )
    }

    /// The strip-like domain { x > 0, e^{-x} - 1 <= y <= -e^{-x} + 1 },
    /// walked counterclockwise: upper branch from depth `extent` to the apex,
    /// then the lower branch back out.
    pub fn strip_exp_with_extent(extent: f64) -> Arc<Domain> {
        let upper = |x: f64| pt(x, 1.0 - (-x).exp());
        let lower = |x: f64| pt(x, (-x).exp() - 1.0);
        let steps = (extent * 256.0) as usize;
        let up_dense: Vec<Point> = (0..=steps)
            .rev()
            .map(|i| upper(extent * i as f64 / steps as f64))
            .collect();
        let lo_dense: Vec<Point> = (0..=steps)
            .map(|i| lower(extent * i as f64 / steps as f64))
            .collect();
        // Resample each branch separately so the apex vertex is kept exactly.
        let mut verts = resample_by_arclength(&up_dense, 1.0 / UNBOUNDED_DENSITY, false);
        let lo = resample_by_arclength(&lo_dense, 1.0 / UNBOUNDED_DENSITY, false);
        verts.extend_from_slice(&lo[1..]);
        Domain::build(
            verts,
            false,
            ShapeTest::StripExp,
            "strip_exp".into(),
            false,
            Some(pt(0.0, 0.0)),
            None,
        )
        .unwrap()
    }

    pub fn strip_exp() -> Arc<Domain> {
        Domain::strip_exp_with_extent(DEFAULT_EXTENT)
    }

    /// The cubic-cusp domain { x > 0, |y| <= x^3 }. Not convex near the cusp;
    /// construction requires the nonconvex-exterior escape hatch.
    pub fn cusp_cubic(allow_nonconvex: bool) -> Result<Arc<Domain>, GeometryError> {
        let extent = 4.0;
        let steps = (extent * 512.0) as usize;
        let up_dense: Vec<Point> = (0..=steps)
            .rev()
            .map(|i| {
                let x = extent * i as f64 / steps as f64;
                pt(x, x * x * x)
            })
            .collect();
        let lo_dense: Vec<Point> = (0..=steps)
            .map(|i| {
                let x = extent * i as f64 / steps as f64;
                pt(x, -x * x * x)
            })
            .collect();
        let mut verts = resample_by_arclength(&up_dense, 1.0 / UNBOUNDED_DENSITY, false);
        let lo = resample_by_arclength(&lo_dense, 1.0 / UNBOUNDED_DENSITY, false);
        verts.extend_from_slice(&lo[1..]);
        Domain::build(
            verts,
            false,
            ShapeTest::CuspCubic,
            "cusp_cubic".into(),
            allow_nonconvex,
            Some(pt(0.0, 0.0)),
            None,
        )
    }

    /// The hyperbola-bounded cone domain { x, y > 0, xy > 1 }, walked from the
    /// deep y-branch through (1,1) to the deep x-branch.
    pub fn hyperbola_with_extent(extent_depth: f64) -> Arc<Domain> {
        // depth along nu = (1,1)/sqrt(2) from (1,1): (x + 1/x - 2)/sqrt(2).
        let target = 2.0 + (extent_depth + 2.0) * std::f64::consts::SQRT_2;
        // Solve x + 1/x = target for the large root.
        let xmax = 0.5 * (target + (target * target - 4.0).sqrt());
        let steps = 100_000usize;
        // Walk x from small to large: deep y-branch -> (1,1) -> x-branch,
        // keeping (1,1) as an exact vertex.
        let branch = |l0: f64, l1: f64| -> Vec<Point> {
            (0..=steps)
                .map(|i| {
                    let x = (l0 + (l1 - l0) * i as f64 / steps as f64).exp();
                    pt(x, 1.0 / x)
                })
                .collect()
        };
        let mut verts =
            resample_by_arclength(&branch((1.0 / xmax).ln(), 0.0), 1.0 / UNBOUNDED_DENSITY, false);
        let second = resample_by_arclength(&branch(0.0, xmax.ln()), 1.0 / UNBOUNDED_DENSITY, false);
        verts.extend_from_slice(&second[1..]);
        Domain::build(
            verts,
            false,
            ShapeTest::Hyperbola,
            "hyperbola".into(),
            false,
            Some(pt(1.0, 1.0)),
            None,
        )
        .unwrap()
    }

    pub fn hyperbola() -> Arc<Domain> {
        Domain::hyperbola_with_extent(DEFAULT_EXTENT)
    }

    /// Custom bounded domain from an explicit counterclockwise vertex list.
    pub fn from_vertices(
        verts: Vec<Point>,
        allow_nonconvex: bool,
    ) -> Result<Arc<Domain>, GeometryError> {
        Domain::build(
            verts,
            true,
            ShapeTest::Polygon,
            "custom".into(),
            allow_nonconvex,
            None,
            None,
        )
    }

    /// Parse a preset name as used in scenario files: `disc`,
    /// `ellipse(a,b)`, `strip_exp`, `cusp_cubic`, `hyperbola`.
    pub fn preset(name: &str, allow_nonconvex: bool) -> Result<Arc<Domain>, GeometryError> {
        let name = name.trim();
        if name == "disc" {
            return Ok(Domain::disc());
        }
        if name == "strip_exp" {
            return Ok(Domain::strip_exp());
        }
        if name == "hyperbola" {
            return Ok(Domain::hyperbola());
        }
        if name == "cusp_cubic" {
            if !allow_nonconvex {
                return Err(GeometryError::NonConvexDomain(
                    "cusp_cubic has a nonconvex exterior; pass --allow-nonconvex-exterior".into(),
                ));
            }
            return Domain::cusp_cubic(true);
        }
        if let Some(args) = name.strip_prefix("ellipse(").and_then(|s| s.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() == 2 {
                let a: f64 = parts[0].trim().parse().map_err(|_| {
                    GeometryError::BadInput(format!("bad ellipse args: {args}"))
                })?;
                let b: f64 = parts[1].trim().parse().map_err(|_| {
                    GeometryError::BadInput(format!("bad ellipse args: {args}"))
                })?;
                return Domain::ellipse(a, b);
            }
        }
        Err(GeometryError::BadInput(format!("unknown domain preset: {name}")))
    }

    pub fn is_bounded(&self) -> bool {
        self.closed
    }

    pub fn verts(&self) -> &[Point] {
        &self.verts
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn total_param(&self) -> f64 {
        *self.params.last().unwrap()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Enclosed area; only meaningful for bounded domains.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn anchor(&self) -> Option<Point> {
        self.anchor
    }

    pub fn synthetic(&self) -> Option<&SyntheticInfo> {
        self.synthetic.as_ref()
    }

    /// Point on the boundary at arc-length parameter `s` (wrapping for
    /// closed boundaries, clamped for open ones).
    pub fn point_at(&self, s: f64) -> Point {
        let total = self.total_param();
        let s = if self.closed {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        };
        let idx = match self
            .params
            .binary_search_by(|p| p.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let n = self.verts.len();
        let i = idx.min(if self.closed { n - 1 } else { n - 2 });
        let a = self.verts[i];
        let b = self.verts[(i + 1) % n];
        let len = self.params[i + 1] - self.params[i];
        if len <= 0.0 {
            return a;
        }
        a.lerp(b, (s - self.params[i]) / len)
    }

    /// Outward unit normal of the boundary edge containing parameter `s`.
    pub fn outward_normal_at(&self, s: f64) -> Point {
        let total = self.total_param();
        let s = if self.closed {
            s.rem_euclid(total)
        } else {
            s.clamp(0.0, total)
        };
        let idx = match self
            .params
            .binary_search_by(|p| p.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let n = self.verts.len();
        let i = idx.min(if self.closed { n - 1 } else { n - 2 });
        let a = self.verts[i];
        let b = self.verts[(i + 1) % n];
        // CCW boundary: interior on the left, so the outward normal is the
        // right-hand rotation of the edge direction.
        -((b - a).rot90().unit())
    }

    /// Nearest polyline vertex index to `p`.
    pub fn nearest_vertex(&self, p: Point) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, v) in self.verts.iter().enumerate() {
            let d = v.dist(p);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// Supporting halfplane at a boundary point. The normal at a vertex is
    /// the angle bisector of the adjacent edge normals; every domain vertex
    /// must lie on the nonnegative side.
    pub fn supporting_halfplane(&self, x0: Point) -> Result<Halfplane, GeometryError> {
        let i = self.nearest_vertex(x0);
        let v = self.verts[i];
        if v.dist(x0) > 1e-6 * self.diameter.max(1.0) {
            return Err(GeometryError::BadInput(
                "x0 does not lie on the boundary discretization".into(),
            ));
        }
        let n = self.verts.len();
        let inward = |a: Point, b: Point| (b - a).rot90().unit();
        let normal = if self.closed {
            let prev = self.verts[(i + n - 1) % n];
            let next = self.verts[(i + 1) % n];
            (inward(prev, v) + inward(v, next)).unit()
        } else if i == 0 {
            inward(v, self.verts[1])
        } else if i == n - 1 {
            inward(self.verts[n - 2], v)
        } else {
            (inward(self.verts[i - 1], v) + inward(v, self.verts[i + 1])).unit()
        };
        let tol = 1e-9 * self.diameter.max(1.0);
        let mut min_side = f64::INFINITY;
        for w in &self.verts {
            min_side = min_side.min((*w - v).dot(normal));
        }
        if min_side < -tol {
            return Err(GeometryError::NonConvexDomain(format!(
                "vertex at signed distance {min_side:.3e} on the negative side"
            )));
        }
        Ok(Halfplane { base: v, normal, offset: 0.0 })
    }

    /// Bounded strictly convex truncation: equal to the domain inside the
    /// depth-M slab, boundary kept up to depth M+1, closed by a circular cap
    /// through the two exit points bulging outward with sagitta 0.5.
    pub fn truncate(&self, h: &Halfplane, m: f64) -> Result<Arc<Domain>, GeometryError> {
        if self.closed {
            return Err(GeometryError::NotUnbounded);
        }
        if m <= 0.0 {
            return Err(GeometryError::BadInput("truncation depth must be positive".into()));
        }
        let cut = m + 1.0;
        let depths: Vec<f64> = self.verts.iter().map(|v| h.depth(*v)).collect();
        if depths.iter().all(|d| *d < 0.0) || depths.iter().all(|d| *d >= cut) {
            return Err(GeometryError::EmptyTruncation);
        }
        if depths[0] < cut || *depths.last().unwrap() < cut {
            return Err(GeometryError::InsufficientExtent(cut));
        }
        // First and last crossings of depth == cut along the polyline.
        let first = depths.iter().position(|d| *d < cut).unwrap();
        let last = depths.iter().rposition(|d| *d < cut).unwrap();
        let cross_point = |i0: usize, i1: usize| -> Point {
            let (d0, d1) = (depths[i0], depths[i1]);
            let t = (cut - d0) / (d1 - d0);
            self.verts[i0].lerp(self.verts[i1], t)
        };
        let entry = cross_point(first - 1, first); // depth drops below cut
        let exit = cross_point(last, last + 1); // depth rises above cut
        let mut verts: Vec<Point> = Vec::with_capacity(last - first + 64);
        verts.push(entry);
        verts.extend_from_slice(&self.verts[first..=last]);
        verts.push(exit);
        // Original-domain parameter of the entry point.
        let kept_offset = self.params[first - 1] + entry.dist(self.verts[first - 1]);
        let kept_len: f64 = cumulative_params(&verts, false).last().copied().unwrap();
        // Cap: circular arc from `exit` back to `entry`, bulging along +nu.
        let cap = cap_arc(exit, entry, h.normal, 0.5);
        let cap_len: f64 = if cap.is_empty() {
            exit.dist(entry)
        } else {
            let mut chain = vec![exit];
            chain.extend_from_slice(&cap);
            chain.push(entry);
            cumulative_params(&chain, false).last().copied().unwrap()
        };
        verts.extend_from_slice(&cap);
        let total_est = kept_len + cap_len;
        let info = SyntheticInfo {
            halfplane: *h,
            depth: m,
            kept_offset,
            kept_range: (0.0, kept_len),
            cap_range: (kept_len, total_est),
        };
        let shape = ShapeTest::Truncated {
            base: Box::new(self.shape.clone()),
            plane: *h,
            cut,
        };
        Domain::build(
            verts,
            true,
            shape,
            format!("{}|M={m}", self.label),
            self.allow_nonconvex,
            self.anchor,
            Some(info),
        )
    }

    /// Three-way point location with boundary tolerance 1e-9 * diameter.
    pub fn point_location(&self, p: Point) -> PointLocation {
        let tol = 1e-9 * self.diameter.max(1.0);
        let (inside, bdist) = self.shape_test(p);
        if bdist <= tol {
            PointLocation::Boundary
        } else if inside {
            PointLocation::Inside
        } else {
            PointLocation::Outside
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        !matches!(self.point_location(p), PointLocation::Outside)
    }

    /// Approximate distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.shape_test(p).1
    }

    /// (strictly-inside?, approximate distance to the boundary).
    fn shape_test(&self, p: Point) -> (bool, f64) {
        shape_test_impl(&self.shape, &self.verts, self.closed, p)
    }

    /// Depth of the synthetic-zone boundary for truncated domains: parameters
    /// map onto the original domain inside `kept_range`, the rest is cap.
    pub fn param_is_synthetic(&self, s: f64) -> bool {
        match &self.synthetic {
            None => false,
            Some(info) => {
                if s < info.kept_range.0 || s > info.kept_range.1 {
                    return true;
                }
                let p = self.point_at(s);
                info.halfplane.depth(p) > info.depth
            }
        }
    }
}

fn shape_test_impl(shape: &ShapeTest, verts: &[Point], closed: bool, p: Point) -> (bool, f64) {
    match shape {
        ShapeTest::Disc => {
            let r = p.norm();
            (r < 1.0, (r - 1.0).abs())
        }
        ShapeTest::Ellipse { a, b } => {
            let g = (p.x / a).powi(2) + (p.y / b).powi(2) - 1.0;
            let grad = pt(2.0 * p.x / (a * a), 2.0 * p.y / (b * b)).norm().max(1e-12);
            (g < 0.0, g.abs() / grad)
        }
        ShapeTest::StripExp => {
            let w = 1.0 - (-p.x).exp();
            let inside = p.x > 0.0 && p.y.abs() < w;
            // Distance estimate against the nearer wall (slope bound sqrt 2).
            let d = if p.x <= 0.0 {
                p.norm()
            } else {
                (w - p.y.abs()).abs() / std::f64::consts::SQRT_2
            };
            (inside, d)
        }
        ShapeTest::CuspCubic => {
            let w = p.x * p.x * p.x;
            let inside = p.x > 0.0 && p.y.abs() < w;
            let grad = (1.0 + 9.0 * p.x.powi(4)).sqrt();
            let d = if p.x <= 0.0 { p.norm() } else { (w - p.y.abs()).abs() / grad };
            (inside, d)
        }
        ShapeTest::Hyperbola => {
            let g = p.x * p.y - 1.0;
            let inside = p.x > 0.0 && p.y > 0.0 && g > 0.0;
            let grad = pt(p.y, p.x).norm().max(1e-12);
            let d = if p.x <= 0.0 || p.y <= 0.0 { 1.0 } else { g.abs() / grad };
            (inside, d)
        }
        ShapeTest::Truncated { base, plane, cut } => {
            let depth = plane.depth(p);
            let (base_in, base_d) = shape_test_impl(base, verts, closed, p);
            if base_in && depth <= *cut - 1e-12 {
                (true, base_d.min(cut - depth))
            } else {
                // Possibly in the cap bulge; fall back to polygon parity.
                let inside = point_in_polygon(p, verts);
                let d = dist_to_polyline(p, verts, true);
                (inside, d)
            }
        }
        ShapeTest::Polygon => {
            let inside = point_in_polygon(p, verts);
            let d = dist_to_polyline(p, verts, closed);
            (inside, d)
        }
    }
}

fn dedup_verts(verts: Vec<Point>, closed: bool) -> Vec<Point> {
    let scale = Bbox::of(&verts).diag().max(1e-12);
    let mut out: Vec<Point> = Vec::with_capacity(verts.len());
    for v in verts {
        if out.last().map_or(true, |l| l.dist(v) > 1e-12 * scale) {
            out.push(v);
        }
    }
    if closed && out.len() > 1 && out[0].dist(*out.last().unwrap()) <= 1e-12 * scale {
        out.pop();
    }
    out
}

/// Convexity validation. Genuine right turns are rejected (unless the
/// nonconvex escape hatch is set); collinear runs within the 1e-12 ladder are
/// tolerated on unbounded tails, where curvature falls below float
/// resolution, and show up as a zero margin.
fn convexity_check(
    verts: &[Point],
    closed: bool,
    allow_nonconvex: bool,
) -> Result<f64, GeometryError> {
    let n = verts.len();
    let m = if closed { n } else { n - 2 };
    let mut margin: f64 = f64::INFINITY;
    for k in 0..m {
        let a = verts[k];
        let b = verts[(k + 1) % n];
        let c = verts[(k + 2) % n];
        let e1 = b - a;
        let e2 = c - b;
        let cross = e1.cross(e2);
        let scale = e1.norm() * e2.norm();
        let turn = cross.atan2(e1.dot(e2));
        if cross < -1e-12 * scale {
            if !allow_nonconvex {
                return Err(GeometryError::NonConvexDomain(format!(
                    "right turn of {:.3e} rad at vertex {}",
                    turn,
                    (k + 1) % n
                )));
            }
            margin = margin.min(turn / e1.norm().max(1e-300));
        } else {
            margin = margin.min(turn.max(0.0) / e1.norm().max(1e-300));
        }
    }
    Ok(margin)
}

/// Circular arc from `a` to `b` bulging by `sagitta` along `bulge_dir`
/// (interior points only, excluding the endpoints), sampled at the unbounded
/// branch density.
fn cap_arc(a: Point, b: Point, bulge_dir: Point, sagitta: f64) -> Vec<Point> {
    let chord = b - a;
    let half = 0.5 * chord.norm();
    if half < 1e-12 {
        return vec![];
    }
    let mut perp = chord.rot90().unit();
    if perp.dot(bulge_dir) < 0.0 {
        perp = -perp;
    }
    let mid = a.lerp(b, 0.5);
    let radius = (half * half + sagitta * sagitta) / (2.0 * sagitta);
    let center = mid + perp * (sagitta - radius);
    let th_a = (a - center).angle();
    let th_apex = (mid + perp * sagitta - center).angle();
    let th_b = (b - center).angle();
    // Sweep from a to b passing through the apex.
    let norm_sweep = |from: f64, to: f64, dir: f64| -> f64 {
        let mut d = (to - from) * dir;
        while d < 0.0 {
            d += 2.0 * std::f64::consts::PI;
        }
        d
    };
    let dir = if norm_sweep(th_a, th_apex, 1.0) + norm_sweep(th_apex, th_b, 1.0)
        <= norm_sweep(th_a, th_apex, -1.0) + norm_sweep(th_apex, th_b, -1.0)
    {
        1.0
    } else {
        -1.0
    };
    let sweep = norm_sweep(th_a, th_b, dir);
    let count = ((radius * sweep * UNBOUNDED_DENSITY).ceil() as usize).clamp(8, 100_000);
    let mut out = Vec::with_capacity(count);
    for k in 1..count {
        let th = th_a + dir * sweep * k as f64 / count as f64;
        out.push(center + pt(th.cos(), th.sin()) * radius);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_basics() {
        let d = Domain::disc();
        assert!(d.is_bounded());
        assert!((d.area() - std::f64::consts::PI).abs() < 1e-3);
        assert_eq!(d.point_location(pt(0.0, 0.0)), PointLocation::Inside);
        assert_eq!(d.point_location(pt(2.0, 0.0)), PointLocation::Outside);
        assert_eq!(d.point_location(pt(1.0, 0.0)), PointLocation::Boundary);
        assert!(d.convexity_margin > 0.0);
    }

    #[test]
    fn disc_supporting_halfplane() {
        let d = Domain::disc();
        let h = d.supporting_halfplane(pt(1.0, 0.0)).unwrap();
        assert!((h.normal - pt(-1.0, 0.0)).norm() < 1e-9);
        // Every vertex on the nonnegative side.
        for v in d.verts() {
            assert!((*v - h.base).dot(h.normal) >= -1e-9 * d.diameter());
        }
    }

    #[test]
    fn hyperbola_supporting_halfplane() {
        // Inward normal at (1,1) is the normalized gradient of xy, +(1,1)/sqrt2;
        // verified by the all-samples-on-positive-side postcondition.
        let d = Domain::hyperbola_with_extent(16.0);
        let i = d.nearest_vertex(pt(1.0, 1.0));
        let h = d.supporting_halfplane(d.verts()[i]).unwrap();
        let expect = pt(1.0, 1.0).unit();
        assert!(
            (h.normal - expect).norm() < 0.02,
            "normal {:?} should be near (1,1)/sqrt2",
            h.normal
        );
        for v in d.verts() {
            assert!((*v - h.base).dot(h.normal) >= -1e-9 * d.diameter());
        }
    }

    #[test]
    fn nonsmooth_vertex_bisector() {
        // A coarse regular octagon: every vertex carries a genuine normal
        // cone, and the supporting normal is its angle bisector.
        let verts: Vec<Point> = (0..8)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
                pt(th.cos(), th.sin())
            })
            .collect();
        let d = Domain::from_vertices(verts, false).unwrap();
        let h = d.supporting_halfplane(pt(1.0, 0.0)).unwrap();
        assert!(h.normal.dot(pt(-1.0, 0.0)) > 0.999);
        for v in d.verts() {
            assert!((*v - h.base).dot(h.normal) >= -1e-12);
        }
    }

    #[test]
    fn strip_truncation_convex_and_nested() {
        let d = Domain::strip_exp();
        let h = d.supporting_halfplane(pt(0.0, 0.0)).unwrap();
        assert!((h.normal - pt(1.0, 0.0)).norm() < 1e-6);
        let t10 = d.truncate(&h, 10.0).unwrap();
        assert!(t10.is_bounded());
        assert!(t10.area() > 0.0);
        // Contains the depth-10 slab of the strip.
        for x in [0.5, 2.0, 5.0, 9.5] {
            assert_eq!(t10.point_location(pt(x, 0.0)), PointLocation::Inside);
        }
        // Nested in a deeper truncation.
        let t14 = d.truncate(&h, 14.0).unwrap();
        for v in t10.verts() {
            assert!(
                t14.contains(*v),
                "vertex {:?} of the M=10 truncation escapes the M=14 one",
                v
            );
        }
        // Union recovery: any fixed point is eventually inside.
        let p = pt(17.0, 0.3);
        assert_eq!(d.truncate(&h, 20.0).unwrap().point_location(p), PointLocation::Inside);
    }

    #[test]
    fn hyperbola_truncation_cap_on_branches() {
        let d = Domain::hyperbola_with_extent(16.0);
        let i = d.nearest_vertex(pt(1.0, 1.0));
        let h = d.supporting_halfplane(d.verts()[i]).unwrap();
        let t = d.truncate(&h, 5.0).unwrap();
        let info = t.synthetic().unwrap();
        // Cap endpoints lie on the two hyperbola branches: x*y = 1.
        let e0 = t.point_at(info.kept_range.0);
        let e1 = t.point_at(info.kept_range.1);
        assert!((e0.x * e0.y - 1.0).abs() < 1e-3, "{e0:?}");
        assert!((e1.x * e1.y - 1.0).abs() < 1e-3, "{e1:?}");
        assert!(t.convexity_margin >= 0.0);
    }

    #[test]
    fn cusp_needs_escape_hatch() {
        assert!(Domain::cusp_cubic(false).is_err());
        let d = Domain::cusp_cubic(true).unwrap();
        assert!(d.convexity_margin < 0.0, "cusp domain records a concave turn");
    }

    #[test]
    fn empty_truncation_rejected() {
        let d = Domain::strip_exp_with_extent(16.0);
        let h = d.supporting_halfplane(pt(0.0, 0.0)).unwrap();
        assert!(matches!(
            d.truncate(&h, 40.0),
            Err(GeometryError::InsufficientExtent(_))
        ));
        // A halfplane shifted far past the domain yields an empty slab.
        let far = Halfplane { base: pt(100.0, 0.0), normal: pt(1.0, 0.0), offset: 0.0 };
        assert!(matches!(d.truncate(&far, 2.0), Err(GeometryError::EmptyTruncation)));
    }
}
