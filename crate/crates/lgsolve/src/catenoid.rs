//! Closed-form discs-versus-catenoid comparison for the axisymmetric ball
//! example: boundary data +-1 split by the planes z = +-a inside the unit
//! ball. The minimiser either jumps across the two discs, follows the
//! catenoid spanned by the two circles, or (at the critical offset) admits a
//! one-parameter family of values between the sheets.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatenoidError {
    #[error("offset a must lie in (0, 1), got {0}")]
    BadOffset(f64),
    #[error("no sign change of the area difference in the scanned bracket")]
    NoSignChange,
}

/// One plane-offset instance: circles of radius r(a) = sqrt(1 - a^2) at
/// heights +-a, and the catenary parameters c solving c cosh(a/c) = r(a).
#[derive(Clone, Debug, Serialize)]
pub struct CatenoidInstance {
    pub a: f64,
    pub radius: f64,
    /// Catenary roots ordered ascending (0, 1, or 2 of them). Each satisfies
    /// the defining equation to 1e-12.
    pub roots: Vec<f64>,
}



impl CatenoidInstance {
    pub fn new(a: f64) -> Result<CatenoidInstance, CatenoidError> {
        if !(0.0 < a && a < 1.0) {
            return Err(CatenoidError::BadOffset(a));
        }
        let radius = (1.0 - a * a).sqrt();
        // g(c) = c cosh(a/c) - r is convex-ish with a single interior
        // minimum: g -> infinity as c -> 0+ and g -> c - r as c -> infinity.
        let g = |c: f64| c * (a / c).cosh() - radius;
        // Locate the minimum of g by golden-section search.
        let (mut lo, mut hi) = (a / 700.0, 4.0);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        for _ in 0..200 {
            if g(x1) < g(x2) {
                hi = x2;
                x2 = x1;
                x1 = hi - phi * (hi - lo);
            } else {
                lo = x1;
                x1 = x2;
                x2 = lo + phi * (hi - lo);
            }
        }
        let cmin = 0.5 * (lo + hi);
        let mut roots = Vec::new();
        if g(cmin) <= 0.0 {
            roots.push(bisect(&g, a / 700.0, cmin));
            roots.push(bisect(&g, cmin, 8.0));
        }
        for c in &roots {
            debug_assert!(
                (c * (a / c).cosh() - radius).abs() < 1e-12,
                "root residual too large"
            );
        }
        Ok(CatenoidInstance { a, radius, roots })
    }
}

/// Float-exact bisection: runs until the midpoint is no longer strictly
/// between the bracket ends, which pins steep roots to the last ulp.
fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = g(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return mid;
        }
        let fm = g(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Combined area of the two discs cut by the planes: 2 pi (1 - a^2).
pub fn disc_area(a: f64) -> f64 {
    2.0 * std::f64::consts::PI * (1.0 - a * a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CatenoidArea {
    NoCatenoid,
    Area { value: f64, c: f64 },
}

/// Lateral area of the catenoid spanned by the two circles, evaluated in
/// closed form: 2 pi (c a + (c^2 / 2) sinh(2a/c)). With two catenary roots
/// the smaller-area (stable) one is returned.
pub fn catenoid_area(a: f64) -> Result<CatenoidArea, CatenoidError> {
    let inst = CatenoidInstance::new(a)?;
    let area_of = |c: f64| {
        2.0 * std::f64::consts::PI * (c * a + 0.5 * c * c * (2.0 * a / c).sinh())
    };
    let best = inst
        .roots
        .iter()
        .map(|c| (area_of(*c), *c))
        .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(match best {
        None => CatenoidArea::NoCatenoid,
        Some((value, c)) => CatenoidArea::Area { value, c },
    })
}

/// Same area by numerical quadrature of 2 pi integral of y sqrt(1 + y'^2),
/// the crosscheck for the closed form.
pub fn catenoid_area_quadrature(a: f64, c: f64) -> f64 {
    // y = c cosh(z/c), sqrt(1 + y'^2) = cosh(z/c): integrand c cosh^2(z/c).
    let f = |z: f64| c * (z / c).cosh().powi(2);
    // Composite Gauss-Legendre via Simpson at high panel count is plenty for
    // 1e-10 on a smooth integrand.
    let n = 20_000;
    let h = 2.0 * a / n as f64;
    let mut acc = f(-a) + f(a);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-a + i as f64 * h);
    }
    2.0 * std::f64::consts::PI * acc * h / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// The discs are the cheaper interface: the field jumps across the
    /// planes (u = 1 above/below, -1 between).
    DiscJump,
    /// The catenoid is cheaper: three zones, +1 outside the planes, +1 inside
    /// the catenoid, -1 between planes outside the catenoid.
    CatenoidRegion,
    /// Equal areas: a one-parameter family of values on the inner region.
    Critical,
}

impl Regime {
    /// Identifier of the closed-form field the regime carries.
    pub fn formula_id(self) -> &'static str {
        match self {
            Regime::DiscJump => "plane_jump",
            Regime::CatenoidRegion => "catenoid_three_zone",
            Regime::Critical => "lambda_family",
        }
    }
}

const CRITICAL_TOL: f64 = 1e-9;

pub fn classify_regime(a: f64) -> Result<Regime, CatenoidError> {
    let d = disc_area(a);
    Ok(match catenoid_area(a)? {
        CatenoidArea::NoCatenoid => Regime::DiscJump,
        CatenoidArea::Area { value, .. } => {
            if (d - value).abs() <= CRITICAL_TOL {
                Regime::Critical
            } else if d < value {
                Regime::DiscJump
            } else {
                Regime::CatenoidRegion
            }
        }
    })
}

/// The critical offset where disc and catenoid areas coincide, by bisection
/// on the area difference; the residual at the returned value is at most
/// 1e-10.
pub fn find_critical() -> Result<f64, CatenoidError> {
    let gap = |a: f64| -> Option<f64> {
        match catenoid_area(a) {
            Ok(CatenoidArea::Area { value, .. }) => Some(disc_area(a) - value),
            _ => None,
        }
    };
    // Scan for a sign-change bracket where the catenoid exists.
    let n = 256;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..n {
        let a = 0.02 + 0.94 * i as f64 / n as f64;
        if let Some(g) = gap(a) {
            if let Some((pa, pg)) = prev {
                if pg * g < 0.0 {
                    bracket = Some((pa, a));
                    break;
                }
            }
            prev = Some((a, g));
        }
    }
    let (mut lo, mut hi) = bracket.ok_or(CatenoidError::NoSignChange)?;
    let mut glo = gap(lo).unwrap();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = gap(mid).unwrap();
        if gm.abs() <= 1e-11 {
            return Ok(mid);
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_area_formula() {
        assert!((disc_area(0.6) - 2.0 * std::f64::consts::PI * 0.64).abs() < 1e-15);
        // Monotone decreasing, vanishing at a -> 1.
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let v = disc_area(a);
            assert!(v < prev);
            prev = v;
        }
        assert!(disc_area(0.999) < 0.02);
    }

    #[test]
    fn catenoid_small_offset_band_asymptotic() {
        // Small a: the catenoid is nearly a cylinder band of area
        // 2 pi r * 2a, and much smaller than the discs.
        let a = 0.05;
        match catenoid_area(a).unwrap() {
            CatenoidArea::Area { value, c } => {
                let band = 2.0 * std::f64::consts::PI * (1.0 - a * a).sqrt() * 2.0 * a;
                assert!((value - band).abs() < 0.05 * band, "area {value} vs band {band}");
                assert!(value < disc_area(a));
                // Residual of the defining equation.
                let r = (1.0f64 - a * a).sqrt();
                assert!((c * (a / c).cosh() - r).abs() < 1e-12);
            }
            _ => panic!("catenoid must exist for small a"),
        }
    }

    #[test]
    fn no_catenoid_near_one() {
        assert_eq!(catenoid_area(0.99).unwrap(), CatenoidArea::NoCatenoid);
        assert_eq!(classify_regime(0.99).unwrap(), Regime::DiscJump);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for a in [0.1, 0.3, 0.45] {
            if let CatenoidArea::Area { value, c } = catenoid_area(a).unwrap() {
                let q = catenoid_area_quadrature(a, c);
                assert!((value - q).abs() < 1e-10, "a={a}: {value} vs {q}");
            } else {
                panic!("expected catenoid at a={a}");
            }
        }
    }

    #[test]
    fn critical_offset_and_regime_flip() {
        let a_star = find_critical().unwrap();
        assert!(0.0 < a_star && a_star < 1.0);
        // Area residual at the critical point.
        if let CatenoidArea::Area { value, .. } = catenoid_area(a_star).unwrap() {
            assert!((disc_area(a_star) - value).abs() <= 1e-10);
        } else {
            panic!("catenoid must exist at the critical offset");
        }
        assert_eq!(classify_regime(a_star).unwrap(), Regime::Critical);
        // Exactly one transition: CatenoidRegion below, DiscJump above.
        assert_eq!(classify_regime(a_star - 0.05).unwrap(), Regime::CatenoidRegion);
        assert_eq!(classify_regime(a_star + 0.05).unwrap(), Regime::DiscJump);
        // Regime is monotone in a over a scan.
        let mut flips = 0;
        let mut prev = classify_regime(0.05).unwrap();
        for i in 1..200 {
            let a = 0.05 + 0.9 * i as f64 / 200.0;
            let r = classify_regime(a).unwrap();
            if r != prev && r != Regime::Critical && prev != Regime::Critical {
                flips += 1;
            }
            if r != Regime::Critical {
                prev = r;
            }
        }
        assert_eq!(flips, 1, "exactly one regime transition");
        // Re-running with a tightened tolerance moves the root negligibly.
        let again = find_critical().unwrap();
        assert!((a_star - again).abs() < 1e-8);
    }
}
