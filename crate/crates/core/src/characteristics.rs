//! Radial characteristic structure: root pair, speeds, trapped-surface
//! classification, and a randomized cone-pairing consistency check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{MetricSample, RadialMetric};

/// The two roots s of g00 s^2 + 2 gr0 s + grr = 0 (slopes dr/dx0 of radial
/// characteristics), s_minus < s_plus.
#[derive(Clone, Copy, Debug)]
pub struct CharRoots {
    pub s_minus: f64,
    pub s_plus: f64,
    /// Discriminant q = (gr0)^2 - g00 grr at the sample point.
    pub q: f64,
}

/// Roots of the characteristic quadratic at (x0, r).
pub fn radial_char_roots(metric: &RadialMetric, x0: f64, r: f64) -> Result<CharRoots> {
    let g00 = metric.g00(x0, r);
    let gr0 = metric.gr0(x0, r);
    let q = metric.q(x0, r);
    if q <= 0.0 || g00 <= 0.0 {
        return Err(Error::HyperbolicityViolation { x0, r, q });
    }
    let sq = q.sqrt();
    Ok(CharRoots {
        s_minus: (-gr0 - sq) / g00,
        s_plus: (-gr0 + sq) / g00,
        q,
    })
}

/// Characteristic speeds c_± = dr/dx0 along the two families:
/// c_± = gr0/g00 ± sqrt(q)/g00.
pub fn char_speeds(metric: &RadialMetric, x0: f64, r: f64) -> Result<(f64, f64)> {
    let g00 = metric.g00(x0, r);
    let gr0 = metric.gr0(x0, r);
    let q = metric.q(x0, r);
    if q <= 0.0 || g00 <= 0.0 {
        return Err(Error::HyperbolicityViolation { x0, r, q });
    }
    let sq = q.sqrt();
    Ok((gr0 / g00 - sq / g00, gr0 / g00 + sq / g00))
}

/// Factored speeds b_± = gr0 ± sqrt(q), so that c_∓ = b_∓ / g00.
pub fn factor_speeds_bpm(metric: &RadialMetric, x0: f64, r: f64) -> Result<(f64, f64)> {
    let gr0 = metric.gr0(x0, r);
    let q = metric.q(x0, r);
    if q <= 0.0 {
        return Err(Error::HyperbolicityViolation { x0, r, q });
    }
    let sq = q.sqrt();
    Ok((gr0 - sq, gr0 + sq))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceClass {
    Trapped,
    OutermostTrapped,
    Antitrapped,
    OutermostAntitrapped,
    Untrapped,
}

/// Classification of the sphere r = r_s at time x0 by the signs of the two
/// conormal roots there.
///
/// With the conormal normalized to xi_r = 1, the characteristic speed of a
/// family is minus its xi_0 root, so both roots positive means both families
/// move inward: trapped. Marginal cases (one root within tolerance of zero,
/// the other on the matching side) are the outermost variants; a straddling
/// pair is untrapped. The tolerance band is relative:
/// |s| < tol * (1 + |other root|).
pub fn classify_surface(
    metric: &RadialMetric,
    x0: f64,
    r_s: f64,
    tol: f64,
) -> Result<SurfaceClass> {
    if r_s <= 0.0 {
        return Err(Error::InvalidArgument("surface radius must be positive".into()));
    }
    let roots = radial_char_roots(metric, x0, r_s)?;
    let (sm, sp) = (roots.s_minus, roots.s_plus);
    let near_zero = |a: f64, other: f64| a.abs() < tol * (1.0 + other.abs());

    if near_zero(sp, sm) && near_zero(sm, sp) {
        return Err(Error::DegenerateClassification {
            r_s,
            xi_plus: sp,
            xi_minus: sm,
        });
    }
    // the smaller root sitting at zero with the larger positive: the slower
    // family is marginal, the other ingoing
    if near_zero(sm, sp) {
        return if sp > 0.0 {
            Ok(SurfaceClass::OutermostTrapped)
        } else {
            Err(Error::DegenerateClassification {
                r_s,
                xi_plus: sp,
                xi_minus: sm,
            })
        };
    }
    if near_zero(sp, sm) {
        return if sm < 0.0 {
            Ok(SurfaceClass::OutermostAntitrapped)
        } else {
            Err(Error::DegenerateClassification {
                r_s,
                xi_plus: sp,
                xi_minus: sm,
            })
        };
    }
    Ok(if sm > 0.0 {
        SurfaceClass::Trapped
    } else if sp < 0.0 {
        SurfaceClass::Antitrapped
    } else {
        SurfaceClass::Untrapped
    })
}

/// Report of the randomized cone-pairing check.
#[derive(Clone, Debug)]
pub struct ConePairingReport {
    pub pairs_tested: usize,
    pub violations: usize,
    pub min_pairing: f64,
}

/// Sample timelike vectors xdot in the forward cone K_+ (covariant form
/// positive, time component positive) and covectors xi in the forward dual
/// cone K^+ (inverse form positive, on the e0 side), and verify the pairing
/// sum_k xdot^k xi_k > 0 for every pair.
///
/// Rejection sampling from an isotropic Gaussian; deterministic under the
/// seed.
pub fn cone_pairing_check(
    sample: &MetricSample,
    pairs: usize,
    seed: u64,
) -> Result<ConePairingReport> {
    let d = sample.n + 1;
    let cov = sample.cov()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let cov_form = |v: &[f64]| -> f64 {
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                s += cov[j * d + k] * v[j] * v[k];
            }
        }
        s
    };

    // e0-side test for covectors: xi is in the same component as dx0
    // iff the inverse-metric pairing g^{0k} xi_k is positive.
    let e0_side = |xi: &[f64]| -> f64 {
        let mut s = 0.0;
        for k in 0..d {
            s += sample.inv[k] * xi[k];
        }
        s
    };

    let mut draw_vec = |pred: &dyn Fn(&[f64]) -> bool| -> Result<Vec<f64>> {
        for _ in 0..100_000 {
            let v: Vec<f64> = (0..d).map(|_| gauss(&mut rng)).collect();
            if pred(&v) {
                return Ok(v);
            }
        }
        Err(Error::Numerical(
            "cone rejection sampling failed to find interior points".into(),
        ))
    };

    let mut violations = 0usize;
    let mut min_pairing = f64::INFINITY;
    for _ in 0..pairs {
        let xdot = draw_vec(&|v: &[f64]| cov_form(v) > 1e-10 && v[0] > 0.0)?;
        let xi = draw_vec(&|v: &[f64]| sample.inv_form(v) > 1e-10 && e0_side(v) > 0.0)?;
        let p: f64 = (0..d).map(|k| xdot[k] * xi[k]).sum();
        min_pairing = min_pairing.min(p);
        if p <= 0.0 {
            violations += 1;
        }
    }
    Ok(ConePairingReport {
        pairs_tested: pairs,
        violations,
        min_pairing,
    })
}

/// Standard normal via Box-Muller.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TimeProfile;

    fn acoustic(a: f64) -> RadialMetric {
        RadialMetric::acoustic(TimeProfile::constant(a))
    }

    #[test]
    fn minkowski_roots() {
        let m = RadialMetric::minkowski();
        let r = radial_char_roots(&m, 0.0, 1.0).unwrap();
        assert!((r.s_minus + 1.0).abs() < 1e-15);
        assert!((r.s_plus - 1.0).abs() < 1e-15);
        assert_eq!(r.q, 1.0);
    }

    #[test]
    fn acoustic_roots_at_horizon() {
        // A = -2: at r = 2 the plus root vanishes, minus root = 2... check signs
        let m = acoustic(-2.0);
        let r = radial_char_roots(&m, 0.0, 2.0).unwrap();
        // gr0 = -1: roots (1 - 1, 1 + 1) of -(gr0) ± sqrt(q)
        assert!(r.s_minus.abs() < 1e-14);
        assert!((r.s_plus - 2.0).abs() < 1e-14);
    }

    #[test]
    fn speeds_match_roots_with_sign_convention() {
        // c_± solve the same quadratic as slopes of dr/dx0 along curves,
        // using gr0/g00 ± sqrt(q)/g00
        let m = acoustic(-2.0);
        for &r in &[0.5, 1.0, 2.0, 3.0, 10.0] {
            let (cm, cp) = char_speeds(&m, 0.0, r).unwrap();
            let a = -2.0;
            assert!((cm - (a / r - 1.0)).abs() < 1e-13);
            assert!((cp - (a / r + 1.0)).abs() < 1e-13);
            let (bm, bp) = factor_speeds_bpm(&m, 0.0, r).unwrap();
            assert!((bm - (a / r - 1.0)).abs() < 1e-13);
            assert!((bp - (a / r + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn classify_black_hole_surfaces() {
        let m = acoustic(-2.0);
        let tol = 1e-8;
        assert_eq!(
            classify_surface(&m, 0.0, 1.0, tol).unwrap(),
            SurfaceClass::Trapped
        );
        assert_eq!(
            classify_surface(&m, 0.0, 2.0, tol).unwrap(),
            SurfaceClass::OutermostTrapped
        );
        assert_eq!(
            classify_surface(&m, 0.0, 5.0, tol).unwrap(),
            SurfaceClass::Untrapped
        );
    }

    #[test]
    fn classify_white_hole_surfaces() {
        let m = acoustic(2.0);
        let tol = 1e-8;
        assert_eq!(
            classify_surface(&m, 0.0, 1.0, tol).unwrap(),
            SurfaceClass::Antitrapped
        );
        assert_eq!(
            classify_surface(&m, 0.0, 2.0, tol).unwrap(),
            SurfaceClass::OutermostAntitrapped
        );
        assert_eq!(
            classify_surface(&m, 0.0, 3.0, tol).unwrap(),
            SurfaceClass::Untrapped
        );
    }

    #[test]
    fn classify_minkowski_untrapped() {
        let m = RadialMetric::minkowski();
        assert_eq!(
            classify_surface(&m, 0.0, 1.0, 1e-8).unwrap(),
            SurfaceClass::Untrapped
        );
    }

    #[test]
    fn cone_pairing_minkowski() {
        let s = MetricSample::minkowski(3);
        let rep = cone_pairing_check(&s, 500, 42).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.min_pairing > 0.0);
    }

    #[test]
    fn cone_pairing_acoustic_supersonic() {
        // |v| > 1: cones tilted past vertical, pairing must still hold
        let s = MetricSample::acoustic(&[-1.5, 0.3, 0.1]);
        let rep = cone_pairing_check(&s, 500, 7).unwrap();
        assert_eq!(rep.violations, 0);
    }
}
