//! Unbounded strictly convex domains: the slab-truncation loop with
//! stabilization detection on a fixed probe region, classification of level
//! lines escaping through the synthetic boundary, a uniqueness mode for
//! compactly supported data, steering toward distinct minimisers on cone
//! domains, and BV certification on strip domains.

use crate::anisotropy::Norm2D;
use crate::boundary::{extend_truncated, BoundaryFunction, DataClass};
use crate::chord::{solve, SolutionField, SolveError, SolveOptions};
use crate::geom::{pt, Bbox, Point};
use crate::geometry::{Domain, GeometryError, Halfplane, PointLocation};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnboundedError {
    #[error("truncation loop did not stabilize within {budget} iterations")]
    NoStabilization { budget: usize, partial: Box<UnboundedOutcome> },
    #[error("data class {0:?} is not compactly supported continuous data")]
    NotC0Data(DataClass),
    #[error("domain has no cone directions (asymptotically slab-like); steering needs two distinct recession directions")]
    NoConeDirections,
    #[error("domain is not strip-like (unbounded in one direction with bounded width)")]
    NotStripDomain,
    #[error("certification refused: {0}")]
    CertificationRefused(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Offsets of the truncation loop with the probe region and tolerance used
/// for stabilization detection.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationSchedule {
    pub halfplane: Halfplane,
    /// Slab depths M_n, strictly increasing by at least 2.
    pub offsets: Vec<f64>,
    pub probe_depth: f64,
    pub stab_tol: f64,
}

impl TruncationSchedule {
    /// Default schedule M_n = 5 n with 8 iterations, probe depth 5, and
    /// stabilization tolerance 1e-4, anchored at the domain's anchor point.
    pub fn default_for(domain: &Arc<Domain>) -> Result<TruncationSchedule, UnboundedError> {
        let anchor = domain.anchor().ok_or(UnboundedError::NoConeDirections)?;
        let halfplane = domain.supporting_halfplane(anchor)?;
        Ok(TruncationSchedule {
            halfplane,
            offsets: (1..=8).map(|n| 5.0 * n as f64).collect(),
            probe_depth: 5.0,
            stab_tol: 1e-4,
        })
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        assert!(offsets.windows(2).all(|w| w[1] >= w[0] + 2.0), "offsets must increase by >= 2");
        self.offsets = offsets;
        self
    }

    pub fn with_probe_depth(mut self, d: f64) -> Self {
        self.probe_depth = d;
        self
    }

    pub fn with_stab_tol(mut self, t: f64) -> Self {
        self.stab_tol = t;
        self
    }
}

/// A level line leaving through the synthetic (cap or ramp) boundary zone.
#[derive(Clone, Debug, Serialize)]
pub struct Escape {
    pub t: f64,
    /// Endpoint on the true boundary (the shallower endpoint when both are
    /// synthetic).
    pub foot: Point,
    /// Unit direction pointing toward the synthetic zone.
    pub direction: Point,
    pub length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeLevel {
    pub t: f64,
    pub escapes: Vec<Escape>,
    pub closed_chords: usize,
}

/// Per-level classification of the final iterate's chords.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EscapeReport {
    pub levels: Vec<EscapeLevel>,
}

impl EscapeReport {
    pub fn max_escapes_per_level(&self) -> usize {
        self.levels.iter().map(|l| l.escapes.len()).max().unwrap_or(0)
    }

    pub fn escaping_levels(&self) -> usize {
        self.levels.iter().filter(|l| !l.escapes.is_empty()).count()
    }
}

/// Fixed probe region sampling used for the stabilization metric.
pub struct ProbeGrid {
    pub pts: Vec<Point>,
    pub cell_area: f64,
}

impl ProbeGrid {
    fn build(domain: &Arc<Domain>, h: &Halfplane, depth: f64) -> ProbeGrid {
        let verts: Vec<Point> = domain
            .verts()
            .iter()
            .filter(|v| h.depth(**v) <= depth)
            .cloned()
            .collect();
        let bb = Bbox::of(&verts);
        let n = 64usize;
        let dx = (bb.hi.x - bb.lo.x) / n as f64;
        let dy = (bb.hi.y - bb.lo.y) / n as f64;
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = pt(
                    bb.lo.x + (i as f64 + 0.5) * dx,
                    bb.lo.y + (j as f64 + 0.5) * dy,
                );
                if h.depth(p) <= depth && domain.point_location(p) == PointLocation::Inside {
                    pts.push(p);
                }
            }
        }
        ProbeGrid { pts, cell_area: dx * dy }
    }

    pub fn area(&self) -> f64 {
        self.pts.len() as f64 * self.cell_area
    }

    pub fn l1(&self, a: &SolutionField, b: &SolutionField) -> f64 {
        self.pts
            .iter()
            .map(|p| (a.eval(*p) - b.eval(*p)).abs() * self.cell_area)
            .sum()
    }
}

pub struct UnboundedOutcome {
    /// Solution on the deepest truncation computed.
    pub field: SolutionField,
    pub truncated: Arc<Domain>,
    /// All truncation iterates, shallowest first.
    pub iterates: Vec<SolutionField>,
    pub increments: Vec<f64>,
    pub escape: EscapeReport,
    pub converged: bool,
    pub probe_area: f64,
}

impl std::fmt::Debug for UnboundedOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnboundedOutcome")
            .field("iterations", &self.iterates.len())
            .field("increments", &self.increments)
            .field("converged", &self.converged)
            .field("escaping_levels", &self.escape.escaping_levels())
            .finish()
    }
}

/// The truncation loop: solve on nested slab truncations with zero-padded
/// data until the solution stabilizes on the probe region for two consecutive
/// steps.
pub fn solve_unbounded(
    domain: &Arc<Domain>,
    f: &BoundaryFunction,
    norm: &Norm2D,
    sched: &TruncationSchedule,
    opts: &SolveOptions,
) -> Result<UnboundedOutcome, UnboundedError> {
    run_truncation_loop(domain, f, norm, sched, opts, None)
}

fn run_truncation_loop(
    domain: &Arc<Domain>,
    f: &BoundaryFunction,
    norm: &Norm2D,
    sched: &TruncationSchedule,
    opts: &SolveOptions,
    steer: Option<&SteerBias>,
) -> Result<UnboundedOutcome, UnboundedError> {
    if domain.is_bounded() {
        return Err(UnboundedError::Solve(SolveError::NotBounded));
    }
    let probe = ProbeGrid::build(domain, &sched.halfplane, sched.probe_depth);
    let mut iterates: Vec<SolutionField> = Vec::new();
    let mut truncs: Vec<Arc<Domain>> = Vec::new();
    let mut increments = Vec::new();
    let mut consecutive = 0usize;
    let mut converged = false;
    // All iterates share one level grid (pinned from the first truncation's
    // data range) so the stabilization metric sees structural change only.
    let mut pinned_range = opts.level_range;
    for m in &sched.offsets {
        let trunc = domain.truncate(&sched.halfplane, *m)?;
        let data = match steer {
            None => extend_truncated(f, &trunc),
            Some(bias) => steered_data(f, &trunc, bias)?,
        };
        if pinned_range.is_none() {
            let dense = data.sample_at_verts();
            let lo = dense.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = dense.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            pinned_range = Some((lo, hi));
        }
        let opts = SolveOptions { level_range: pinned_range, ..opts.clone() };
        let field = solve(&trunc, &data, norm, &opts)?;
        if let Some(prev) = iterates.last() {
            let inc = probe.l1(prev, &field);
            increments.push(inc);
            if inc < sched.stab_tol * probe.area() {
                consecutive += 1;
            } else {
                consecutive = 0;
            }
        }
        iterates.push(field);
        truncs.push(trunc);
        if consecutive >= 2 {
            converged = true;
            break;
        }
    }
    let field = iterates.last().unwrap().clone();
    let truncated = truncs.last().unwrap().clone();
    let escape = classify_escapes(&field, &truncated);
    let outcome = UnboundedOutcome {
        field,
        truncated,
        iterates,
        increments,
        escape,
        converged,
        probe_area: probe.area(),
    };
    if !outcome.converged {
        return Err(UnboundedError::NoStabilization {
            budget: sched.offsets.len(),
            partial: Box::new(outcome),
        });
    }
    Ok(outcome)
}

/// Chords with an endpoint in the synthetic boundary zone (beyond the slab
/// depth or on the cap) are level lines escaping to infinity.
pub fn classify_escapes(field: &SolutionField, trunc: &Arc<Domain>) -> EscapeReport {
    let mut levels = Vec::new();
    for l in &field.family.levels {
        let mut escapes = Vec::new();
        let mut closed = 0usize;
        for (a, b) in l.matching.pairs.iter().map(|(i, j)| {
            (&l.crossings[*i], &l.crossings[*j])
        }) {
            let syn_a = trunc.param_is_synthetic(a.s);
            let syn_b = trunc.param_is_synthetic(b.s);
            if !syn_a && !syn_b {
                closed += 1;
                continue;
            }
            let (foot, far) = match (syn_a, syn_b) {
                (false, true) => (a.point, b.point),
                (true, false) => (b.point, a.point),
                _ => {
                    // Both synthetic: orient by halfplane depth.
                    let info = trunc.synthetic().unwrap();
                    if info.halfplane.depth(a.point) <= info.halfplane.depth(b.point) {
                        (a.point, b.point)
                    } else {
                        (b.point, a.point)
                    }
                }
            };
            let len = foot.dist(far);
            if len <= 0.0 {
                continue;
            }
            escapes.push(Escape {
                t: l.t,
                foot,
                direction: (far - foot) / len,
                length: len,
            });
        }
        levels.push(EscapeLevel { t: l.t, escapes, closed_chords: closed });
    }
    EscapeReport { levels }
}

/// The quantified shortcut of the single-escape argument: when a level has
/// two escaping components, a U-shaped chain (two stubs plus a crossbar near
/// the feet) replaces them at strictly lower cost.
#[derive(Clone, Debug, Serialize)]
pub struct UShortcut {
    pub t: f64,
    pub replaced_length: f64,
    pub chain_length: f64,
    pub saving: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeCheck {
    pub pass: bool,
    pub worst: Option<UShortcut>,
}

/// Pass iff every level has at most one escaping component; on failure the
/// U-shaped shortcut and its cost saving are reported as the witness.
pub fn verify_single_escape(report: &EscapeReport) -> EscapeCheck {
    let mut worst: Option<UShortcut> = None;
    for l in &report.levels {
        if l.escapes.len() <= 1 {
            continue;
        }
        for pair in l.escapes.windows(2) {
            let (e1, e2) = (&pair[0], &pair[1]);
            let p1 = e1.foot + e1.direction * e1.length;
            let p2 = e2.foot + e2.direction * e2.length;
            let w = e1.foot.dist(e2.foot);
            // Stubs of length w from each foot along the escape direction,
            // then the crossbar.
            let q1 = e1.foot + e1.direction * w;
            let q2 = e2.foot + e2.direction * w;
            let chain = 2.0 * w + q1.dist(q2);
            let replaced = e1.length + e2.length;
            let _ = (p1, p2);
            let saving = replaced - chain;
            let cand = UShortcut { t: l.t, replaced_length: replaced, chain_length: chain, saving };
            if worst.as_ref().map_or(true, |b| cand.saving > b.saving) {
                worst = Some(cand);
            }
        }
    }
    EscapeCheck { pass: worst.is_none(), worst }
}

/// Containment certificate of the uniqueness construction: all chords of
/// levels above the residual data bound stay inside the slab.
#[derive(Clone, Debug, Serialize)]
pub struct UniquenessCert {
    /// sup |f| beyond the deepest slab used.
    pub residual_bound: f64,
    /// Minimal depth margin (slab depth minus deepest chord endpoint) over
    /// all certified levels.
    pub min_margin: f64,
    pub certified_levels: usize,
    pub pass: bool,
}

/// Solve with compactly supported (or vanishing) continuous data and certify
/// the localization that underlies uniqueness: above the residual bound the
/// superlevel sets never touch the synthetic zone.
pub fn solve_c0_unique(
    domain: &Arc<Domain>,
    f: &BoundaryFunction,
    norm: &Norm2D,
    sched: &TruncationSchedule,
    opts: &SolveOptions,
) -> Result<(UnboundedOutcome, UniquenessCert), UnboundedError> {
    if !matches!(f.class(), DataClass::C0Compact | DataClass::C0) {
        return Err(UnboundedError::NotC0Data(f.class()));
    }
    let outcome = solve_unbounded(domain, f, norm, sched, opts)?;
    let info = outcome.truncated.synthetic().unwrap();
    let m = info.depth;
    let residual = f.sup_beyond_depth(&info.halfplane, m);
    let mut min_margin = f64::INFINITY;
    let mut certified = 0usize;
    for l in &outcome.field.family.levels {
        if l.t.abs() <= residual {
            continue;
        }
        certified += 1;
        for c in &l.crossings {
            let depth = info.halfplane.depth(c.point);
            min_margin = min_margin.min(m - depth);
        }
    }
    if certified == 0 {
        min_margin = m;
    }
    let cert = UniquenessCert {
        residual_bound: residual,
        min_margin,
        certified_levels: certified,
        pass: min_margin >= 0.0,
    };
    Ok((outcome, cert))
}

/// Steering target for domains containing a cone: continue the data
/// constantly along one asymptotic axis over the synthetic cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SteerBias {
    AxisX,
    AxisY,
    /// The mixed plateau: axis-x up to x0, axis-y below 1/x0, constant at the
    /// x0 value in between.
    Mixed(f64),
}

/// Cap data for a steered solve: pull the cap point back to the true
/// boundary along the biased axis and evaluate the data there.
fn steered_data(
    f: &BoundaryFunction,
    trunc: &Arc<Domain>,
    bias: &SteerBias,
) -> Result<BoundaryFunction, UnboundedError> {
    let info = trunc.synthetic().unwrap().clone();
    let orig = f.clone();
    let orig_for_cap = f.clone();
    let (k0, k1) = info.kept_range;
    let offset = info.kept_offset;
    let bias = *bias;
    let dom = trunc.clone();
    // Parameter of the original-domain boundary point with the given
    // coordinate; boundary walks have monotone x, so binary search works.
    let param_at_x = make_coord_lookup(f.domain(), true);
    let param_at_y = make_coord_lookup(f.domain(), false);
    let eval = move |s: f64, p: Point| -> f64 {
        if s >= k0 && s <= k1 {
            return orig.eval(offset + (s - k0));
        }
        // Cap: continue constantly along the biased axis.
        let lookup = |b: SteerBias, p: Point| -> f64 {
            match b {
                SteerBias::AxisX => orig_for_cap.eval(param_at_x(p.x)),
                SteerBias::AxisY => orig_for_cap.eval(param_at_y(p.y)),
                SteerBias::Mixed(_) => unreachable!(),
            }
        };
        match bias {
            SteerBias::Mixed(x0) => {
                if p.x <= x0 {
                    lookup(SteerBias::AxisX, p)
                } else if p.y <= 1.0 / x0 {
                    lookup(SteerBias::AxisY, p)
                } else {
                    orig_for_cap.eval(param_at_x(x0))
                }
            }
            b => lookup(b, p),
        }
    };
    Ok(BoundaryFunction::new(
        dom,
        eval,
        vec![],
        DataClass::Cb,
        format!("steer({}, {:?})", f.label(), bias),
    ))
}

/// Binary-search lookup of the boundary parameter whose point has the given
/// x (or y) coordinate. Requires the coordinate to be monotone along the
/// boundary walk, which holds for the cone presets.
fn make_coord_lookup(domain: &Arc<Domain>, by_x: bool) -> impl Fn(f64) -> f64 {
    let coords: Vec<f64> = domain
        .verts()
        .iter()
        .map(|v| if by_x { v.x } else { v.y })
        .collect();
    let params = domain.params().to_vec();
    let ascending = coords.last() > coords.first();
    move |c: f64| -> f64 {
        let cmp = |probe: &f64| {
            if ascending {
                probe.partial_cmp(&c).unwrap()
            } else {
                c.partial_cmp(probe).unwrap()
            }
        };
        match coords.binary_search_by(cmp) {
            Ok(i) => params[i],
            Err(i) => {
                let i = i.clamp(1, coords.len() - 1);
                let (c0, c1) = (coords[i - 1], coords[i]);
                let t = if (c1 - c0).abs() > 1e-300 { (c - c0) / (c1 - c0) } else { 0.0 };
                params[i - 1] + (params[i] - params[i - 1]) * t.clamp(0.0, 1.0)
            }
        }
    }
}

/// Steered unbounded solve on a cone domain: realizes one of the distinct
/// minimisers by choosing the direction along which the data continues over
/// the cap.
pub fn steer_nonunique(
    domain: &Arc<Domain>,
    f: &BoundaryFunction,
    norm: &Norm2D,
    bias: SteerBias,
    sched: &TruncationSchedule,
    opts: &SolveOptions,
) -> Result<UnboundedOutcome, UnboundedError> {
    let (d1, d2) = recession_directions(domain);
    if d1.dot(d2) > (10f64).to_radians().cos() {
        return Err(UnboundedError::NoConeDirections);
    }
    run_truncation_loop(domain, f, norm, sched, opts, Some(&bias))
}

fn recession_directions(domain: &Arc<Domain>) -> (Point, Point) {
    let v = domain.verts();
    let n = v.len();
    let d1 = (v[0] - v[n.min(32) - 1]).unit();
    let d2 = (v[n - 1] - v[n - n.min(32)]).unit();
    (d1, d2)
}

/// Uniform BV certificate on strip-like domains.
#[derive(Clone, Debug, Serialize)]
pub struct StripBvCert {
    pub width: f64,
    /// The strip Poincare constant C(d) = d/2 entering the bound with the
    /// factor 2 C(d) + 1.
    pub constant: f64,
    pub slab_tvs: Vec<f64>,
    pub sup_tv: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Check the uniform BV bound over expanding slabs for data in L1 and Linf
/// on a strip-like domain. Refused when the data is not integrable.
pub fn certify_strip_bv(
    domain: &Arc<Domain>,
    field: &SolutionField,
    f: &BoundaryFunction,
    h: &Halfplane,
) -> Result<StripBvCert, UnboundedError> {
    let (d1, d2) = recession_directions(domain);
    if d1.dot(d2) < (10f64).to_radians().cos() {
        return Err(UnboundedError::NotStripDomain);
    }
    let l1 = match f.l1_norm() {
        Some(v) => v,
        None => {
            return Err(UnboundedError::CertificationRefused(
                "boundary data is not in L1; the uniform BV bound does not apply".into(),
            ))
        }
    };
    // Width across the recession direction.
    let perp = d1.rot90();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in domain.verts() {
        let c = v.dot(perp);
        lo = lo.min(c);
        hi = hi.max(c);
    }
    let width = hi - lo;
    let sup_f = {
        let mut s: f64 = 0.0;
        for (i, _) in domain.verts().iter().enumerate() {
            s = s.max(f.eval(domain.params()[i]).abs());
        }
        s
    };
    let c_d = width / 2.0;
    let bound = (2.0 * c_d + 1.0) * (l1 + width * sup_f);
    let max_depth = field
        .domain
        .synthetic()
        .map(|i| i.depth)
        .unwrap_or(field.domain.diameter());
    let mut slab_tvs = Vec::new();
    let mut x = 1.0;
    while x <= max_depth {
        slab_tvs.push(field.discrete_tv_in_slab(h, x));
        x += 1.0;
    }
    let sup_tv = slab_tvs.last().cloned().unwrap_or(0.0);
    let pass = sup_tv <= bound;
    Ok(StripBvCert { width, constant: c_d, slab_tvs, sup_tv, bound, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{bump_train, exp_decay, linear_y, single_bump};

    fn quick_opts() -> SolveOptions {
        SolveOptions { levels: 80, ..Default::default() }
    }

    #[test]
    fn compact_bump_stabilizes_immediately() {
        let d = Domain::strip_exp_with_extent(24.0);
        let f = single_bump(d.clone(), 2.0, 1.0);
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![5.0, 7.0, 9.0]);
        let (outcome, cert) =
            solve_c0_unique(&d, &f, &Norm2D::l2(), &sched, &quick_opts()).unwrap();
        assert!(outcome.converged);
        // Support inside depth 3: extensions agree, iterates identical.
        for inc in &outcome.increments {
            assert!(*inc < 1e-9, "iterates should coincide, increment {inc}");
        }
        assert!(cert.pass, "containment margins must be positive");
        assert!(cert.min_margin > 0.0);
        // All nonzero-level chords stay within depth 3.
        for l in &outcome.field.family.levels {
            if l.t > 0.05 {
                for c in &l.crossings {
                    assert!(c.point.x <= 3.0 + 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_data_trivial() {
        let d = Domain::strip_exp_with_extent(24.0);
        let f = single_bump(d.clone(), 2.0, 0.0);
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![5.0, 7.0, 9.0]);
        let (outcome, _) = solve_c0_unique(&d, &f, &Norm2D::l2(), &sched, &quick_opts()).unwrap();
        for p in [pt(1.0, 0.0), pt(3.0, 0.3)] {
            assert_eq!(outcome.field.eval(p), 0.0);
        }
    }

    #[test]
    fn two_separated_bumps_localize() {
        let d = Domain::strip_exp_with_extent(40.0);
        let b1 = single_bump(d.clone(), 1.0, 1.0);
        let b2 = single_bump(d.clone(), 20.0, 0.5);
        let f = BoundaryFunction::new(
            d.clone(),
            move |s, p| b1.eval(s).max(0.0) + b2.eval(s).max(0.0) - b1.eval(s).min(0.0) * 0.0 + (b2.eval(s) - b2.eval(s)) + (p.x - p.x),
            vec![],
            DataClass::C0Compact,
            "two_bumps",
        );
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![10.0, 25.0, 27.0]);
        let (outcome, cert) =
            solve_c0_unique(&d, &f, &Norm2D::l2(), &sched, &quick_opts()).unwrap();
        // Levels above 1/2 stay near the first bump.
        for l in &outcome.field.family.levels {
            if l.t > 0.55 {
                for c in &l.crossings {
                    assert!(c.point.x < 3.0, "level {} crossing at x={}", l.t, c.point.x);
                }
            }
        }
        assert!(cert.pass);
    }

    #[test]
    fn monotone_data_escapes_horizontally() {
        let d = Domain::strip_exp_with_extent(24.0);
        let f = linear_y(d.clone());
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![6.0, 10.0, 14.0])
            .with_stab_tol(5e-2);
        let outcome = match solve_unbounded(&d, &f, &Norm2D::l2(), &sched, &quick_opts()) {
            Ok(o) => o,
            Err(UnboundedError::NoStabilization { partial, .. }) => *partial,
            Err(e) => panic!("unexpected error {e}"),
        };
        // Every level in (-1, 1) escapes exactly once, horizontally.
        let mut checked = 0;
        for l in &outcome.escape.levels {
            if l.t.abs() < 0.85 {
                assert_eq!(l.escapes.len(), 1, "level {} escapes: {:?}", l.t, l.escapes.len());
                let e = &l.escapes[0];
                assert!(e.direction.x > 0.9, "horizontal escape, got {:?}", e.direction);
                checked += 1;
            }
        }
        assert!(checked > 20);
        let check = verify_single_escape(&outcome.escape);
        assert!(check.pass);
    }

    #[test]
    fn doubled_halflines_rejected_with_saving() {
        // Synthetic report: two parallel halflines at distance 1, depth 10.
        let report = EscapeReport {
            levels: vec![EscapeLevel {
                t: 0.5,
                escapes: vec![
                    Escape {
                        t: 0.5,
                        foot: pt(0.0, 0.0),
                        direction: pt(1.0, 0.0),
                        length: 10.0,
                    },
                    Escape {
                        t: 0.5,
                        foot: pt(0.0, 1.0),
                        direction: pt(1.0, 0.0),
                        length: 10.0,
                    },
                ],
                closed_chords: 0,
            }],
        };
        let check = verify_single_escape(&report);
        assert!(!check.pass);
        let w = check.worst.unwrap();
        // Replaced 20, chain 2*1 + 1 = 3, saving 17 = 2*10 - 1 - 2.
        assert!((w.saving - 17.0).abs() < 1e-9, "saving {}", w.saving);
        assert!(w.saving > 0.0);
        // All-closed report passes vacuously.
        let empty = EscapeReport {
            levels: vec![EscapeLevel { t: 0.1, escapes: vec![], closed_chords: 3 }],
        };
        assert!(verify_single_escape(&empty).pass);
    }

    #[test]
    fn steering_realizes_both_minimisers() {
        let d = Domain::hyperbola_with_extent(20.0);
        let f = exp_decay(d.clone());
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![6.0, 9.0, 12.0])
            .with_stab_tol(1e-3);
        let opts = SolveOptions { levels: 150, ..Default::default() };
        let ox = steer_nonunique(&d, &f, &Norm2D::l2(), SteerBias::AxisX, &sched, &opts).unwrap();
        let oy = steer_nonunique(&d, &f, &Norm2D::l2(), SteerBias::AxisY, &sched, &opts).unwrap();
        // u1(x, y) = e^{-x}, u2(x, y) = e^{-1/y} on the probe region.
        let p = pt(2.0, 3.0);
        assert!(
            (ox.field.eval(p) - (-2.0f64).exp()).abs() < 0.02,
            "axis-x value {} vs {}",
            ox.field.eval(p),
            (-2.0f64).exp()
        );
        assert!(
            (oy.field.eval(p) - (-1.0f64 / 3.0).exp()).abs() < 0.02,
            "axis-y value {} vs {}",
            oy.field.eval(p),
            (-1.0f64 / 3.0).exp()
        );
        // The two certified solutions genuinely differ.
        let mut linf: f64 = 0.0;
        for i in 0..100 {
            let q = pt(
                1.0 + 2.0 * crate::geom::hash_unit(i),
                1.0 + 2.0 * crate::geom::hash_unit(i + 321),
            );
            if d.point_location(q) == PointLocation::Inside {
                linf = linf.max((ox.field.eval(q) - oy.field.eval(q)).abs());
            }
        }
        assert!(linf >= 0.1, "L-inf gap {linf}");
        // Escapes: one per level, vertical for axis-x and horizontal for
        // axis-y steering.
        for l in &ox.escape.levels {
            if l.t > 0.05 && l.t < 0.9 {
                assert!(l.escapes.len() <= 1);
            }
        }
    }

    #[test]
    fn steering_rejects_slab_domains() {
        let d = Domain::strip_exp_with_extent(16.0);
        let f = linear_y(d.clone());
        let sched = TruncationSchedule::default_for(&d).unwrap();
        assert!(matches!(
            steer_nonunique(&d, &f, &Norm2D::l2(), SteerBias::AxisX, &sched, &quick_opts()),
            Err(UnboundedError::NoConeDirections)
        ));
    }

    #[test]
    fn strip_bv_certificate() {
        let d = Domain::strip_exp_with_extent(24.0);
        let h = d.supporting_halfplane(pt(0.0, 0.0)).unwrap();
        let sched = TruncationSchedule::default_for(&d)
            .unwrap()
            .with_offsets(vec![6.0, 8.0, 10.0]);
        // One bump of mass ~1: slab TV stabilizes after the bump's depth and
        // stays under the uniform bound.
        let f = single_bump(d.clone(), 2.0, 1.0);
        let (outcome, _) = solve_c0_unique(&d, &f, &Norm2D::l2(), &sched, &quick_opts()).unwrap();
        let cert = certify_strip_bv(&d, &outcome.field, &f, &h).unwrap();
        assert!(cert.pass, "sup {} vs bound {}", cert.sup_tv, cert.bound);
        assert!((cert.width - 2.0).abs() < 0.01);
        // The slab TVs stabilize once the bump is inside.
        let tail: Vec<f64> = cert.slab_tvs.iter().rev().take(3).cloned().collect();
        assert!((tail[0] - tail[2]).abs() < 1e-6);
        // Zero data: all slab TVs vanish.
        let z = single_bump(d.clone(), 2.0, 0.0);
        let (oz, _) = solve_c0_unique(&d, &z, &Norm2D::l2(), &sched, &quick_opts()).unwrap();
        let cz = certify_strip_bv(&d, &oz.field, &z, &h).unwrap();
        assert!(cz.sup_tv == 0.0);
        // Non-integrable data is refused.
        let bt = bump_train(d.clone());
        let err = certify_strip_bv(&d, &oz.field, &bt, &h);
        assert!(matches!(err, Err(UnboundedError::CertificationRefused(_))));
    }
}
