//! Boundary functions on the domain boundary: evaluation in the arc-length
//! parameter, declared discontinuities, class tags, periodic mollification,
//! the zero-padded extension onto truncated domains, and the fat Cantor
//! indicator.

use crate::geom::Point;
#[cfg(test)]
use crate::geom::pt;
use crate::geometry::Domain;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("boundary data is not locally integrable")]
    NonIntegrableData,
    #[error("operation requires compactly supported continuous data, got class {0:?}")]
    NotC0Data(DataClass),
    #[error("invalid boundary data: {0}")]
    BadInput(String),
}

/// Continuity class of boundary data, ordered roughly by regularity.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum DataClass {
    /// Continuous with compact support (in the boundary parameter).
    C0Compact,
    /// Continuous, vanishing at infinity along unbounded branches.
    C0,
    /// Continuous and bounded.
    Cb,
    /// Continuous, possibly unbounded.
    CUnbounded,
    /// Continuous outside a declared null set of jump points.
    AeContinuous,
    /// Bounded variation (jumps declared, one-sided limits recorded).
    Bv,
    /// Discontinuity set of positive measure; existence theory fails.
    Pathological,
}

impl DataClass {
    /// Classes the bounded solver accepts (a.e. continuous or better).
    pub fn solvable(self) -> bool {
        !matches!(self, DataClass::Pathological)
    }

    pub fn is_continuous(self) -> bool {
        matches!(
            self,
            DataClass::C0Compact | DataClass::C0 | DataClass::Cb | DataClass::CUnbounded
        )
    }
}

/// A declared jump discontinuity at boundary parameter `at`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Jump {
    pub at: f64,
    pub left: f64,
    pub right: f64,
}

type Evaluator = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;

/// A real function on the domain boundary, evaluated in the arc-length
/// parameter. Discontinuities must be declared by the constructor; they are
/// never detected from samples.
#[derive(Clone)]
pub struct BoundaryFunction {
    domain: Arc<Domain>,
    eval_fn: Evaluator,
    jumps: Vec<Jump>,
    class: DataClass,
    /// Measure of the discontinuity set of the represented (limit) object;
    /// positive only for the Pathological class.
    disc_measure: f64,
    /// L1 norm over the whole boundary when finite and known.
    l1_norm: Option<f64>,
    label: String,
}

impl std::fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("label", &self.label)
            .field("class", &self.class)
            .field("jumps", &self.jumps.len())
            .finish()
    }
}

impl BoundaryFunction {
    pub fn new(
        domain: Arc<Domain>,
        eval_fn: impl Fn(f64, Point) -> f64 + Send + Sync + 'static,
        mut jumps: Vec<Jump>,
        class: DataClass,
        label: impl Into<String>,
    ) -> BoundaryFunction {
        jumps.sort_by(|a, b| a.at.partial_cmp(&b.at).unwrap());
        BoundaryFunction {
            domain,
            eval_fn: Arc::new(eval_fn),
            jumps,
            class,
            disc_measure: 0.0,
            l1_norm: None,
            label: label.into(),
        }
    }

    pub fn with_l1_norm(mut self, l1: Option<f64>) -> BoundaryFunction {
        self.l1_norm = l1;
        self
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn eval(&self, s: f64) -> f64 {
        let p = self.domain.point_at(s);
        (self.eval_fn)(s, p)
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn class(&self) -> DataClass {
        self.class
    }

    pub fn l1_norm(&self) -> Option<f64> {
        self.l1_norm
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Dense samples at the domain polyline vertices (used by level scans).
    pub fn sample_at_verts(&self) -> Vec<f64> {
        self.domain
            .params()
            .iter()
            .take(self.domain.verts().len())
            .map(|s| self.eval(*s))
            .collect()
    }

    /// Supremum over a dense sample of the part of the boundary at halfplane
    /// depth greater than `d`.
    pub fn sup_beyond_depth(&self, h: &crate::geometry::Halfplane, d: f64) -> f64 {
        let mut sup: f64 = 0.0;
        for (i, v) in self.domain.verts().iter().enumerate() {
            if h.depth(*v) > d {
                sup = sup.max(self.eval(self.domain.params()[i]).abs());
            }
        }
        sup
    }
}

/// Smooth even bump profile on (-1,1) with unit mass, optionally skewed by
/// `beta` without changing support or mass: rho_beta(t) = rho(t)(1 + beta t).
#[derive(Clone, Debug)]
pub struct MollificationKernel {
    pub radius: f64,
    pub beta: f64,
    norm_const: f64,
}

impl MollificationKernel {
    pub fn new(radius: f64) -> MollificationKernel {
        MollificationKernel::skewed(radius, 0.0)
    }

    pub fn skewed(radius: f64, beta: f64) -> MollificationKernel {
        assert!(radius > 0.0 && beta.abs() < 1.0);
        // Normalize the symmetric part; the skew term integrates to zero.
        let mass = simpson(|t| bump_raw(t), -1.0, 1.0, 4096);
        MollificationKernel { radius, beta, norm_const: 1.0 / mass }
    }

    /// Profile value at t in [-1, 1] (already normalized to unit mass).
    pub fn profile(&self, t: f64) -> f64 {
        self.norm_const * bump_raw(t) * (1.0 + self.beta * t)
    }

    pub fn mass(&self) -> f64 {
        simpson(|t| self.profile(t), -1.0, 1.0, 4096)
    }
}

fn bump_raw(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// The normalized standard mollifier on (-1, 1) (unit mass), as used by the
/// bump-train data.
pub fn std_mollifier(t: f64) -> f64 {
    // Cache the normalization constant.
    use std::sync::OnceLock;
    static NORM: OnceLock<f64> = OnceLock::new();
    let c = NORM.get_or_init(|| 1.0 / simpson(bump_raw, -1.0, 1.0, 4096));
    c * bump_raw(t)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Periodic (for bounded domains) arc-length convolution with the kernel.
/// The integral is split at declared jumps inside the window so the quadrature
/// only ever sees smooth integrands.
pub fn mollify(f: &BoundaryFunction, kernel: &MollificationKernel) -> BoundaryFunction {
    let eps = kernel.radius;
    let kern = kernel.clone();
    let inner = f.clone();
    let total = f.domain().total_param();
    let closed = f.domain().is_bounded();
    let jump_params: Vec<f64> = f.jumps.iter().map(|j| j.at).collect();
    let eval = move |s: f64, _p: Point| -> f64 {
        // Integrate rho(t) * f(s - eps t) dt over t in [-1, 1], split where
        // s - eps t hits a declared jump.
        let mut cuts: Vec<f64> = vec![-1.0, 1.0];
        for jp in &jump_params {
            // Solve s - eps t = jp + k*total for all wrappings that land in range.
            let base = (s - jp) / eps;
            if closed {
                let span = total / eps;
                let kmin = ((-1.0 - base) / span).floor() as i64 - 1;
                let kmax = ((1.0 - base) / span).ceil() as i64 + 1;
                for k in kmin..=kmax {
                    let t = base + k as f64 * span;
                    if t > -1.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            } else if base > -1.0 && base < 1.0 {
                cuts.push(base);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-15 {
                continue;
            }
            let integrand = |t: f64| {
                let mut sv = s - eps * t;
                if closed {
                    sv = sv.rem_euclid(total);
                } else {
                    sv = sv.clamp(0.0, total);
                }
                kern.profile(t) * inner.eval(sv)
            };
            // Composite rule: the bump profile is extremely flat near the
            // support ends, where a single panel loses ~8 digits.
            let panels = 4;
            for q in 0..panels {
                let pa = a + (b - a) * q as f64 / panels as f64;
                let pb = a + (b - a) * (q + 1) as f64 / panels as f64;
                acc += gauss32(integrand, pa, pb);
            }
        }
        acc
    };
    BoundaryFunction::new(
        f.domain.clone(),
        eval,
        vec![],
        if f.class.is_continuous() { f.class } else { DataClass::C0 },
        format!("mollify({}, eps={:.1e})", f.label, eps),
    )
    .with_l1_norm(f.l1_norm)
}

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (symmetric half stored).
const GL32_X: [f64; 16] = [
    0.048307665687738316,
    0.144471961582796493,
    0.239287362252137075,
    0.331868602282127650,
    0.421351276130635345,
    0.506899908932229390,
    0.587715757240762329,
    0.663044266930215201,
    0.732182118740289680,
    0.794483795967942407,
    0.849367613732569970,
    0.896321155766052124,
    0.934906075937739689,
    0.964762255587506430,
    0.985611511545268335,
    0.997263861849481564,
];
const GL32_W: [f64; 16] = [
    0.096540088514727801,
    0.095638720079274859,
    0.093844399080804566,
    0.091173878695763885,
    0.087652093004403811,
    0.083311924226946755,
    0.078193895787070306,
    0.072345794108848506,
    0.065822222776361847,
    0.058684093478535547,
    0.050998059262376176,
    0.042835898022226681,
    0.034273862913021433,
    0.025392065309262059,
    0.016274394730905671,
    0.007018610009470097,
];

fn gauss32(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..16 {
        acc += GL32_W[i] * (f(c + h * GL32_X[i]) + f(c - h * GL32_X[i]));
    }
    acc * h
}

/// Boundary data for a truncated domain: the original data inside the
/// depth-M slab, a linear-in-parameter ramp to zero across depths (M, M+1],
/// and zero on the synthetic cap.
pub fn extend_truncated(f: &BoundaryFunction, truncated: &Arc<Domain>) -> BoundaryFunction {
    let info = truncated
        .synthetic()
        .expect("extend_truncated requires a truncated domain")
        .clone();
    let orig = f.clone();
    let h = info.halfplane;
    let m = info.depth;
    let (k0, k1) = info.kept_range;
    // Parameters (in the new domain) where the kept boundary crosses depth M,
    // one near each end of the kept range.
    let depth_at = {
        let dom = truncated.clone();
        move |s: f64| h.depth(dom.point_at(s))
    };
    let find_cross = |mut lo: f64, mut hi: f64| -> f64 {
        // depth(lo) and depth(hi) straddle M by construction.
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (depth_at(mid) - m) * (depth_at(lo) - m) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let s_m_start = find_cross(k0, 0.5 * (k0 + k1));
    let s_m_end = find_cross(0.5 * (k0 + k1), k1);
    let offset = info.kept_offset;
    let anchor_start = orig.eval(offset + (s_m_start - k0));
    let anchor_end = orig.eval(offset + (s_m_end - k0));
    let dom = truncated.clone();
    let jumps: Vec<Jump> = f
        .jumps
        .iter()
        .filter(|j| j.at >= offset + (s_m_start - k0) && j.at <= offset + (s_m_end - k0))
        .map(|j| Jump { at: j.at - offset + k0, ..*j })
        .collect();
    let eval = move |s: f64, p: Point| -> f64 {
        if s < k0 || s > k1 {
            return 0.0; // cap
        }
        let depth = h.depth(p);
        if depth <= m {
            return orig.eval(offset + (s - k0));
        }
        // Ramp zone: interpolate linearly in the parameter between the value
        // at depth M and zero at the cut.
        if s <= s_m_start {
            let t = (s_m_start - s) / (s_m_start - k0).max(1e-12);
            anchor_start * (1.0 - t)
        } else {
            let t = (s - s_m_end) / (k1 - s_m_end).max(1e-12);
            anchor_end * (1.0 - t)
        }
    };
    let class = match f.class {
        c if c.is_continuous() => DataClass::C0Compact,
        c => c,
    };
    BoundaryFunction::new(
        dom,
        eval,
        jumps,
        class,
        format!("extend({}, M={})", f.label, m),
    )
}

/// Indicator of a depth-`depth` Smith-Volterra-Cantor approximation keeping
/// `measure_kept` of an arc. The construction occupies the parameter arc
/// [0, L/2) of the domain boundary.
pub fn fat_cantor_indicator(
    domain: Arc<Domain>,
    measure_kept: f64,
    depth: u32,
) -> BoundaryFunction {
    assert!((0.0..1.0).contains(&measure_kept) && measure_kept > 0.0);
    assert!(depth <= 24, "depth capped at 24");
    let arc = domain.total_param() * 0.5;
    // Kept intervals in [0,1]: start from the whole interval, remove from the
    // middle of each piece at step k a fraction so the total removed mass is
    // (1 - p)(1 - 2^-depth).
    let c = 2.0 * (1.0 - measure_kept);
    let mut intervals = vec![(0.0f64, 1.0f64)];
    for k in 1..=depth {
        let remove = c * 0.25f64.powi(k as i32);
        let mut next = Vec::with_capacity(intervals.len() * 2);
        for (a, b) in intervals {
            let mid = 0.5 * (a + b);
            next.push((a, mid - 0.5 * remove));
            next.push((mid + 0.5 * remove, b));
        }
        intervals = next;
    }
    let scaled: Vec<(f64, f64)> = intervals.iter().map(|(a, b)| (a * arc, b * arc)).collect();
    let mut jumps = Vec::with_capacity(2 * scaled.len());
    for (a, b) in &scaled {
        jumps.push(Jump { at: *a, left: 0.0, right: 1.0 });
        jumps.push(Jump { at: *b, left: 1.0, right: 0.0 });
    }
    let support: f64 = scaled.iter().map(|(a, b)| b - a).sum();
    let lookup = scaled.clone();
    let eval = move |s: f64, _p: Point| -> f64 {
        let i = lookup.partition_point(|(a, _)| *a <= s);
        if i > 0 && s < lookup[i - 1].1 {
            1.0
        } else {
            0.0
        }
    };
    let mut f = BoundaryFunction::new(
        domain,
        eval,
        jumps,
        DataClass::Pathological,
        format!("cantor({measure_kept},{depth})"),
    )
    .with_l1_norm(Some(support));
    // The limit object is discontinuous exactly on the fat Cantor set.
    f.disc_measure = measure_kept * arc;
    f
}

/// Class tag plus the measure of the discontinuity set (from declarations).
pub fn classify_continuity(f: &BoundaryFunction) -> (DataClass, f64) {
    let measure = if f.class == DataClass::Pathological {
        f.disc_measure
    } else {
        0.0
    };
    (f.class, measure)
}

// ---- presets ----------------------------------------------------------

/// Brothers-type data on the unit disc: cos(2 theta) + 1 on the arcs where
/// |x| > 1/sqrt2, cos(2 theta) - 1 elsewhere; four jump points on the
/// diagonals.
pub fn brothers(domain: Arc<Domain>) -> BoundaryFunction {
    let total = domain.total_param();
    let quarter = total / 8.0;
    let jumps: Vec<Jump> = (0..4)
        .map(|k| {
            let at = quarter * (2 * k + 1) as f64;
            // Jumps down by 2 at 45 and 225 degrees, up at 135 and 315.
            let (l, r) = if k % 2 == 0 { (1.0, -1.0) } else { (-1.0, 1.0) };
            Jump { at, left: l, right: r }
        })
        .collect();
    BoundaryFunction::new(
        domain,
        |_s, p: Point| {
            let shift = if p.x.abs() > std::f64::consts::FRAC_1_SQRT_2 { 1.0 } else { -1.0 };
            p.x * p.x - p.y * p.y + shift
        },
        jumps,
        DataClass::AeContinuous,
        "brothers",
    )
}

/// f = cos(theta) on a circle-like boundary (evaluated from the point angle).
pub fn cos_theta(domain: Arc<Domain>) -> BoundaryFunction {
    BoundaryFunction::new(
        domain,
        |_s, p: Point| p.angle().cos(),
        vec![],
        DataClass::C0,
        "cos_theta",
    )
}

/// f = e^{-x}; bounded continuous data on the hyperbola domain.
pub fn exp_decay(domain: Arc<Domain>) -> BoundaryFunction {
    BoundaryFunction::new(domain, |_s, p: Point| (-p.x).exp(), vec![], DataClass::Cb, "exp_decay")
        .with_l1_norm(None)
}

/// f = y; bounded monotone data on the strip domain (limits +-1 at infinity).
pub fn linear_y(domain: Arc<Domain>) -> BoundaryFunction {
    BoundaryFunction::new(domain, |_s, p: Point| p.y, vec![], DataClass::Cb, "linear_y")
        .with_l1_norm(None)
}

/// Bump train sum_n (1/n) rho(x - n^2) with the standard unit-mass mollifier;
/// continuous, vanishing at infinity, but not integrable on the boundary.
pub fn bump_train(domain: Arc<Domain>) -> BoundaryFunction {
    BoundaryFunction::new(
        domain,
        |_s, p: Point| {
            // Supports (n^2 - 1, n^2 + 1) are disjoint; at most one term.
            let n = (p.x.sqrt()).round().max(1.0);
            let mut v = 0.0;
            for k in [n - 1.0, n, n + 1.0] {
                if k >= 1.0 {
                    v += std_mollifier(p.x - k * k) / k;
                }
            }
            v
        },
        vec![],
        DataClass::C0,
        "bump_train",
    )
    .with_l1_norm(None)
}

/// A single unit-mass bump of height scale `height` centred at depth
/// `x0` along the strip boundary (compact support).
pub fn single_bump(domain: Arc<Domain>, x0: f64, height: f64) -> BoundaryFunction {
    let peak = std_mollifier(0.0);
    BoundaryFunction::new(
        domain,
        move |_s, p: Point| height / peak * std_mollifier(p.x - x0),
        vec![],
        DataClass::C0Compact,
        format!("bump(x0={x0},h={height})"),
    )
    .with_l1_norm(Some(2.0 * height / peak))
}

/// A k-step staircase in the boundary parameter: values j/k on the j-th arc,
/// k jumps. BV data for trace-recovery tests.
pub fn staircase(domain: Arc<Domain>, k: usize) -> BoundaryFunction {
    let total = domain.total_param();
    let step = total / k as f64;
    let mut jumps = Vec::with_capacity(k);
    for j in 1..k {
        jumps.push(Jump {
            at: step * j as f64,
            left: (j - 1) as f64 / k as f64,
            right: j as f64 / k as f64,
        });
    }
    jumps.push(Jump { at: 0.0, left: (k - 1) as f64 / k as f64, right: 0.0 });
    let kk = k as f64;
    BoundaryFunction::new(
        domain,
        move |s, _p| {
            let j = ((s / step).floor() as usize).min(k - 1);
            j as f64 / kk
        },
        jumps,
        DataClass::Bv,
        format!("staircase({k})"),
    )
}

/// Two plateau bumps of equal height on opposite arcs of a circle-like
/// boundary; the mirror-symmetric tie instance.
pub fn two_plateaus(domain: Arc<Domain>) -> BoundaryFunction {
    let total = domain.total_param();
    let eighth = total / 8.0;
    let jumps = vec![
        Jump { at: eighth, left: 1.0, right: 0.0 },
        Jump { at: 3.0 * eighth, left: 0.0, right: 1.0 },
        Jump { at: 5.0 * eighth, left: 1.0, right: 0.0 },
        Jump { at: 7.0 * eighth, left: 0.0, right: 1.0 },
    ];
    BoundaryFunction::new(
        domain,
        move |s, _p| {
            let s = s.rem_euclid(total);
            if s < eighth || s >= 7.0 * eighth || (s >= 3.0 * eighth && s < 5.0 * eighth) {
                1.0
            } else {
                0.0
            }
        },
        jumps,
        DataClass::Bv,
        "two_plateaus",
    )
}

/// Parse a data preset name: `brothers`, `cantor(p,depth)`, `cos_theta`,
/// `exp_decay`, `bump_train`, `linear_y`, `staircase(k)`, `bump(x0,h)`.
pub fn preset(name: &str, domain: Arc<Domain>) -> Result<BoundaryFunction, DataError> {
    let name = name.trim();
    match name {
        "brothers" => return Ok(brothers(domain)),
        "cos_theta" => return Ok(cos_theta(domain)),
        "exp_decay" => return Ok(exp_decay(domain)),
        "bump_train" => return Ok(bump_train(domain)),
        "linear_y" => return Ok(linear_y(domain)),
        "two_plateaus" => return Ok(two_plateaus(domain)),
        _ => {}
    }
    if let Some(args) = name.strip_prefix("cantor(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() == 2 {
            let p: f64 = parts[0].trim().parse().map_err(|_| bad(name))?;
            let d: u32 = parts[1].trim().parse().map_err(|_| bad(name))?;
            return Ok(fat_cantor_indicator(domain, p, d));
        }
    }
    if let Some(args) = name.strip_prefix("staircase(").and_then(|s| s.strip_suffix(')')) {
        let k: usize = args.trim().parse().map_err(|_| bad(name))?;
        if k >= 2 {
            return Ok(staircase(domain, k));
        }
    }
    if let Some(args) = name.strip_prefix("bump(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').collect();
        if parts.len() == 2 {
            let x0: f64 = parts[0].trim().parse().map_err(|_| bad(name))?;
            let h: f64 = parts[1].trim().parse().map_err(|_| bad(name))?;
            return Ok(single_bump(domain, x0, h));
        }
    }
    Err(bad(name))
}

fn bad(name: &str) -> DataError {
    DataError::BadInput(format!("unknown data preset: {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::hash_unit;

    #[test]
    fn kernel_mass_and_support() {
        for beta in [0.0, 0.3, -0.7] {
            let k = MollificationKernel::skewed(0.01, beta);
            assert!((k.mass() - 1.0).abs() < 1e-12, "unit mass");
            assert!(k.profile(-1.0) == 0.0 && k.profile(1.0) == 0.0);
            assert!(k.profile(0.0) > 0.0);
            for i in 0..100 {
                let t = 2.0 * hash_unit(i) - 1.0;
                assert!(k.profile(t) >= 0.0);
            }
        }
    }

    #[test]
    fn mollify_constant_and_step() {
        let d = Domain::disc();
        let c = BoundaryFunction::new(d.clone(), |_, _| 3.25, vec![], DataClass::C0, "const");
        let m = mollify(&c, &MollificationKernel::new(0.05));
        for i in 0..32 {
            let s = d.total_param() * i as f64 / 32.0;
            assert!((m.eval(s) - 3.25).abs() < 1e-10);
        }
        // Unit step at s0: symmetric kernel gives exactly 1/2 at the jump.
        let s0 = 1.0;
        let step = BoundaryFunction::new(
            d.clone(),
            move |s, _| if s >= s0 && s < s0 + 2.0 { 1.0 } else { 0.0 },
            vec![
                Jump { at: s0, left: 0.0, right: 1.0 },
                Jump { at: s0 + 2.0, left: 1.0, right: 0.0 },
            ],
            DataClass::Bv,
            "step",
        );
        let m = mollify(&step, &MollificationKernel::new(0.01));
        assert!((m.eval(s0) - 0.5).abs() < 1e-9);
        // Away from the jumps the mollification is exact.
        assert!((m.eval(s0 + 1.0) - 1.0).abs() < 1e-12);
        assert!((m.eval(s0 - 1.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn mollify_indicator_quadrature() {
        // chi over half the circle, eps = L/100: inside [0,1] everywhere,
        // equal to f outside 2 eps of the jumps.
        let d = Domain::disc();
        let total = d.total_param();
        let half = total / 2.0;
        let f = BoundaryFunction::new(
            d,
            move |s, _| if s < half { 1.0 } else { 0.0 },
            vec![
                Jump { at: 0.0, left: 0.0, right: 1.0 },
                Jump { at: half, left: 1.0, right: 0.0 },
            ],
            DataClass::Bv,
            "chi_half",
        );
        let eps = total / 100.0;
        let m = mollify(&f, &MollificationKernel::new(eps));
        for i in 0..256 {
            let s = total * i as f64 / 256.0;
            let v = m.eval(s);
            assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            let near_jump = (s - 0.0).abs() < 2.0 * eps
                || (s - half).abs() < 2.0 * eps
                || (total - s) < 2.0 * eps;
            if !near_jump {
                assert!((v - f.eval(s)).abs() < 1e-12, "s={s}, v={v}");
            }
        }
    }

    #[test]
    fn mollify_local_bounds_property() {
        // min over the window <= mollified <= max over the window, on 1000
        // random parameters.
        let d = Domain::disc();
        let f = brothers(d.clone());
        let eps = 0.03;
        let m = mollify(&f, &MollificationKernel::new(eps));
        let total = d.total_param();
        for i in 0..1000 {
            let s = total * hash_unit(i);
            let mv = m.eval(s);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..200 {
                let sv = s - eps + 2.0 * eps * k as f64 / 199.0;
                let v = f.eval(sv.rem_euclid(total));
                lo = lo.min(v);
                hi = hi.max(v);
            }
            assert!(
                mv >= lo - 1e-6 && mv <= hi + 1e-6,
                "local bound violated at s={s}: {lo} <= {mv} <= {hi}"
            );
        }
    }

    #[test]
    fn mollify_pointwise_convergence() {
        let d = Domain::disc();
        let f = brothers(d.clone());
        let total = d.total_param();
        // At continuity points, |f_eps - f| is controlled by the local
        // modulus of continuity over the eps window.
        for i in 0..50 {
            let s = total * hash_unit(i * 31 + 7);
            let near_jump = f.jumps().iter().any(|j| {
                let dd = (s - j.at).abs();
                dd.min(total - dd) < 0.2
            });
            if near_jump {
                continue;
            }
            for eps in [1e-2, 1e-3] {
                let m = mollify(&f, &MollificationKernel::new(eps));
                let mut modulus: f64 = 0.0;
                for k in 0..100 {
                    let sv = s - eps + 2.0 * eps * k as f64 / 99.0;
                    modulus = modulus.max((f.eval(sv.rem_euclid(total)) - f.eval(s)).abs());
                }
                assert!((m.eval(s) - f.eval(s)).abs() <= modulus + 1e-9);
            }
        }
    }

    #[test]
    fn cantor_measures() {
        let d = Domain::disc();
        // depth 0: the whole arc.
        let f0 = fat_cantor_indicator(d.clone(), 0.5, 0);
        let arc = d.total_param() / 2.0;
        assert!((f0.l1_norm().unwrap() - arc).abs() < 1e-12);
        // depth 8, p = 1/2: support measure is arc * (1/2 + 2^-9) exactly
        // (closed-form removed-interval sum).
        let f8 = fat_cantor_indicator(d.clone(), 0.5, 8);
        let expect = arc * (0.5 + 2f64.powi(-9));
        assert!(
            (f8.l1_norm().unwrap() - expect).abs() < 2f64.powi(-8),
            "support {} vs {}",
            f8.l1_norm().unwrap(),
            expect
        );
        // The limit's discontinuity set has positive measure: existence
        // theory does not apply.
        let (class, measure) = classify_continuity(&f8);
        assert_eq!(class, DataClass::Pathological);
        assert!((measure - 0.5 * arc).abs() < 1e-12);
    }

    #[test]
    fn classification() {
        let d = Domain::disc();
        let (c, m) = classify_continuity(&brothers(d.clone()));
        assert_eq!(c, DataClass::AeContinuous);
        assert_eq!(brothers(d.clone()).jumps().len(), 4);
        assert_eq!(m, 0.0);
        let hyp = Domain::hyperbola_with_extent(8.0);
        let (c, _) = classify_continuity(&exp_decay(hyp));
        assert_eq!(c, DataClass::Cb);
    }

    #[test]
    fn extension_zero_and_padding() {
        let d = Domain::strip_exp_with_extent(24.0);
        let h = d.supporting_halfplane(pt(0.0, 0.0)).unwrap();
        let t = d.truncate(&h, 10.0).unwrap();
        // f == 0 extends to 0.
        let z = BoundaryFunction::new(d.clone(), |_, _| 0.0, vec![], DataClass::C0, "zero");
        let ez = extend_truncated(&z, &t);
        for i in 0..64 {
            let s = t.total_param() * i as f64 / 64.0;
            assert_eq!(ez.eval(s), 0.0);
        }
        // Bump train: equals f for x <= 10, zero for x >= 11.
        let f = bump_train(d.clone());
        let ef = extend_truncated(&f, &t);
        let mut checked_keep = 0;
        let mut checked_cap = 0;
        for i in 0..2000 {
            let s = t.total_param() * i as f64 / 2000.0;
            let p = t.point_at(s);
            if p.x <= 10.0 - 1e-6 {
                let expect = f.eval(0.0); // placeholder; compare by point
                let _ = expect;
                // same x on the original boundary: values agree since the
                // data depends only on x.
                let want = {
                    let n = (p.x.sqrt()).round().max(1.0);
                    let mut v = 0.0;
                    for k in [n - 1.0, n, n + 1.0] {
                        if k >= 1.0 {
                            v += std_mollifier(p.x - k * k) / k;
                        }
                    }
                    v
                };
                assert!((ef.eval(s) - want).abs() < 1e-9, "x={} s={}", p.x, s);
                checked_keep += 1;
            } else if p.x >= 11.0 + 1e-6 || t.param_is_synthetic(s) && p.x >= 11.0 {
                assert_eq!(ef.eval(s), 0.0, "cap/beyond must be zero at x={}", p.x);
                checked_cap += 1;
            }
        }
        assert!(checked_keep > 100 && checked_cap > 10);
        // Compactly supported data inside the slab: extension is exactly f
        // padded by zero.
        let b = single_bump(d.clone(), 3.0, 1.0);
        let eb = extend_truncated(&b, &t);
        for i in 0..500 {
            let s = t.total_param() * i as f64 / 500.0;
            let p = t.point_at(s);
            let want = if p.x > 2.0 && p.x < 4.0 { b.eval(0.0).max(0.0) } else { 0.0 };
            let _ = want;
            let direct = {
                let peak = std_mollifier(0.0);
                1.0 / peak * std_mollifier(p.x - 3.0)
            };
            if !t.param_is_synthetic(s) {
                assert!((eb.eval(s) - direct).abs() < 1e-9);
            }
        }
        // Consistency across levels: extensions at M and M+4 agree on the
        // depth-M slab.
        let t2 = d.truncate(&h, 14.0).unwrap();
        let ef2 = extend_truncated(&f, &t2);
        for i in 0..800 {
            let s = t.total_param() * i as f64 / 800.0;
            let p = t.point_at(s);
            if p.x < 10.0 - 1e-9 && !t.param_is_synthetic(s) {
                // Find the matching parameter on t2 (same original point).
                let s2 = s; // both kept ranges start at the same original cut depth? no:
                let _ = s2;
            }
        }
        // Direct check by matching x on the upper branch instead.
        for x in [0.5, 2.0, 5.0, 9.0] {
            let p_up = pt(x, 1.0 - (-x).exp());
            let s1 = nearest_param(&t, p_up);
            let s2 = nearest_param(&t2, p_up);
            assert!((ef.eval(s1) - ef2.eval(s2)).abs() < 1e-6, "x={x}");
        }
    }

    fn nearest_param(d: &Arc<Domain>, p: Point) -> f64 {
        let i = d.nearest_vertex(p);
        d.params()[i]
    }

    #[test]
    fn staircase_jumps() {
        let d = Domain::disc();
        let f = staircase(d, 10);
        assert_eq!(f.jumps().len(), 10);
        assert_eq!(f.class(), DataClass::Bv);
        assert!((f.eval(0.01) - 0.0).abs() < 1e-12);
        let total = f.domain().total_param();
        assert!((f.eval(total * 0.95) - 0.9).abs() < 1e-12);
    }
}
