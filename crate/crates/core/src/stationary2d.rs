//! Stationary 2D rotating flows: ergosphere location, the two
//! zero-frequency characteristic families on the ergoregion annulus, and
//! detection of closed characteristic curves with their horizon kind.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geodesics::{
    integrate_polar2d, polar_rhs, Fate, PolarOpts, PolarState, TimeDirection,
};
use crate::metric::PolarMetric2D;
use crate::ode::{self, Event, OdeOpts, StopReason};

/// The curve Delta = 0 sampled over theta, with diagnostics.
#[derive(Clone, Debug)]
pub struct Ergosphere {
    pub theta: Vec<f64>,
    pub r_e: Vec<f64>,
    /// max |Delta(r_e, theta)| over the grid.
    pub max_residual: f64,
    /// Thetas where the curve is (numerically) characteristic; the
    /// downstream horizon arguments assume this list is empty.
    pub characteristic_points: Vec<f64>,
}

impl Ergosphere {
    pub fn min_r(&self) -> f64 {
        self.r_e.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_r(&self) -> f64 {
        self.r_e.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Root of Delta(., theta) on each ray by bisection to 1e-10.
///
/// Also checks the non-characteristic condition: the spatial quadratic form
/// evaluated on the curve's conormal (dr - r_e' dtheta) must not vanish.
/// Points failing the check are reported, not fatal (a purely radial flow
/// has a characteristic ergosphere).
pub fn locate_ergosphere(metric: &PolarMetric2D, n_theta: usize) -> Result<Ergosphere> {
    let n = n_theta.max(8);
    let mut theta = Vec::with_capacity(n + 1);
    let mut r_e = Vec::with_capacity(n + 1);
    let mut max_residual = 0.0f64;
    for i in 0..=n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let r = bisect_delta(metric, th)?;
        max_residual = max_residual.max(metric.delta(r, th).abs());
        theta.push(th);
        r_e.push(r);
    }

    // non-characteristic check at the grid points
    let mut characteristic_points = Vec::new();
    for i in 0..n {
        let th = theta[i];
        let r = r_e[i];
        // dr_e/dtheta by centered difference on the sampled curve
        let prev = r_e[(i + n - 1) % n];
        let next = r_e[(i + 1) % n];
        let dth = 2.0 * std::f64::consts::PI / n as f64;
        let drdth = (next - prev) / (2.0 * dth);
        let c = metric.comps(r, th);
        let (xr, xt) = (1.0, -drdth / r); // conormal, orthonormal angular slot
        let form = c.grr * xr * xr + 2.0 * c.grt * xr * xt + c.gtt * xt * xt;
        // compare against the overall coefficient scale, not the evaluated
        // terms (those can all vanish together at a characteristic point)
        let scale =
            (c.grr.abs() + 2.0 * c.grt.abs() + c.gtt.abs()) * (xr * xr + xt * xt);
        if form.abs() <= 1e-8 * scale.max(1e-8) {
            characteristic_points.push(th);
        }
    }

    Ok(Ergosphere {
        theta,
        r_e,
        max_residual,
        characteristic_points,
    })
}

fn bisect_delta(metric: &PolarMetric2D, theta: f64) -> Result<f64> {
    // scan outward for the sign change; Delta < 0 inside the ergoregion
    let mut r_lo = None;
    let mut r_hi = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=400 {
        let r = 1e-3 * (1e5f64).powf(i as f64 / 400.0); // 1e-3 .. 100
        let d = metric.delta(r, theta);
        if let Some((rp, dp)) = prev {
            if dp < 0.0 && d >= 0.0 {
                r_lo = Some(rp);
                r_hi = Some(r);
                break;
            }
        }
        prev = Some((r, d));
    }
    let (mut a, mut b) = match (r_lo, r_hi) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::PartialErgosphere(format!(
                "Delta does not change sign along theta = {theta}"
            )))
        }
    };
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if metric.delta(mid, theta) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitFamily {
    Minus,
    Plus,
}

/// The two zero-frequency null covectors at (r, theta), oriented so that
/// coordinate time increases along the bicharacteristic, ordered so that
/// index 1 ("plus") has the larger dr/dx0.
///
/// Returns (xi_r, xi_theta) pairs; only defined inside the ergoregion
/// (Delta < 0), where the spatial form is indefinite.
pub fn null_directions(metric: &PolarMetric2D, r: f64, theta: f64) -> Result<[(f64, f64); 2]> {
    let c = metric.comps(r, theta);
    if metric.delta(r, theta) >= 0.0 {
        return Err(Error::InvalidArgument(
            "zero-frequency null directions exist only inside the ergoregion".into(),
        ));
    }
    // null lines of the indefinite form grr xr^2 + 2 grt xr y + gtt y^2,
    // y = xi_theta / r, via its eigendecomposition (stable even when the
    // diagonal entries vanish, e.g. on a closed orbit radius)
    let (a, b, cc) = (c.grr, c.grt, c.gtt);
    let half_tr = 0.5 * (a + cc);
    let det = a * cc - b * b;
    let gap = (half_tr * half_tr - det).sqrt();
    let (l1, l2) = (half_tr + gap, half_tr - gap); // l1 >= 0 >= l2 inside
    if !(l1 > 0.0 && l2 < 0.0) {
        return Err(Error::DegenerateCoordinates(format!(
            "spatial form not indefinite at r = {r}: eigenvalues ({l1}, {l2})"
        )));
    }
    // unit eigenvector for l1
    let (e1x, e1y) = if b.abs() > (a - l1).abs() {
        let v = (b, l1 - a);
        let n = (v.0 * v.0 + v.1 * v.1).sqrt();
        (v.0 / n, v.1 / n)
    } else {
        let v = (l1 - cc, b);
        let n = (v.0 * v.0 + v.1 * v.1).sqrt();
        (v.0 / n, v.1 / n)
    };
    let (e2x, e2y) = (-e1y, e1x);
    let (al, be) = ((-l2).sqrt(), l1.sqrt());
    let mut dirs: [(f64, f64); 2] = [
        (al * e1x + be * e2x, (al * e1y + be * e2y) * r),
        (al * e1x - be * e2x, (al * e1y - be * e2y) * r),
    ];

    // orient forward in x0, then order by dr/dx0
    let mut speeds = [0.0f64; 2];
    for (k, d) in dirs.iter_mut().enumerate() {
        let dx0 = 2.0 * (c.gr0 * d.0 + c.gt0 * d.1 / r);
        if dx0 == 0.0 {
            return Err(Error::DegenerateCoordinates(
                "null covector annihilates the time flow".into(),
            ));
        }
        if dx0 < 0.0 {
            d.0 = -d.0;
            d.1 = -d.1;
        }
        let dx0 = 2.0 * (c.gr0 * d.0 + c.gt0 * d.1 / r);
        let dr = 2.0 * (c.grr * d.0 + c.grt * d.1 / r);
        speeds[k] = dr / dx0;
    }
    if speeds[0] > speeds[1] {
        dirs.swap(0, 1);
    }
    Ok(dirs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitKind {
    BlackHorizon,
    WhiteHorizon,
}

#[derive(Clone, Debug)]
pub struct ClosedOrbit {
    pub family: OrbitFamily,
    /// Radius on the section theta = 0 after refinement.
    pub radius: f64,
    /// One period of the orbit.
    pub samples: Vec<PolarState>,
    /// Coordinate-time period of one revolution.
    pub period_x0: f64,
    pub kind: OrbitKind,
    /// |P(radius) - radius| after refinement.
    pub closure_defect: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct OrbitSearchOpts {
    pub n_seeds: usize,
    pub max_returns: usize,
    pub return_tol: f64,
    pub dedup_tol: f64,
    /// Inner edge of the seeding annulus.
    pub r_min: f64,
}

impl Default for OrbitSearchOpts {
    fn default() -> Self {
        OrbitSearchOpts {
            n_seeds: 12,
            max_returns: 60,
            return_tol: 1e-10,
            dedup_tol: 1e-6,
            r_min: 0.05,
        }
    }
}

/// One application of the Poincare return map on the section theta = 0:
/// integrate the family's flow from (r, 0) until |theta| accumulates 2*pi.
/// `reverse` runs the flow backward (finds orbits repelling forward).
/// Returns the next section radius and the elapsed coordinate time.
fn return_map(
    metric: &PolarMetric2D,
    family: OrbitFamily,
    r0: f64,
    reverse: bool,
) -> Result<(f64, f64, Vec<PolarState>)> {
    let dirs = null_directions(metric, r0, 0.0)?;
    let d = match family {
        OrbitFamily::Minus => dirs[0],
        OrbitFamily::Plus => dirs[1],
    };
    let sgn = if reverse { -1.0 } else { 1.0 };
    let y0 = [0.0, r0, 0.0, 0.0, d.0, d.1];
    let rhs = |_s: f64, y: &[f64]| -> Vec<f64> {
        let mut f = polar_rhs(metric, y);
        let n = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 && n.is_finite() {
            for v in &mut f {
                *v *= sgn / n;
            }
        }
        f
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let ev_plus = |_s: f64, y: &[f64]| y[2] - two_pi;
    let ev_minus = |_s: f64, y: &[f64]| y[2] + two_pi;
    let ev_in = |_s: f64, y: &[f64]| y[1] - 1e-4;
    let ev_out = |_s: f64, y: &[f64]| y[1] - 100.0;
    let events = [
        Event { f: &ev_plus, direction: 1 },
        Event { f: &ev_minus, direction: -1 },
        Event { f: &ev_in, direction: -1 },
        Event { f: &ev_out, direction: 1 },
    ];
    let sol = ode::integrate(
        &rhs,
        0.0,
        &y0,
        1.0e4,
        &events,
        None,
        &OdeOpts {
            atol: 1e-12,
            rtol: 1e-11,
            h_max: 0.1,
            ..Default::default()
        },
    )?;
    match sol.stop {
        StopReason::Event(0) | StopReason::Event(1) => {
            let states: Vec<PolarState> = sol
                .y
                .iter()
                .map(|y| PolarState {
                    x0: y[0],
                    r: y[1],
                    theta: y[2],
                    xi0: y[3],
                    xir: y[4],
                    xit: y[5],
                })
                .collect();
            let last = states.last().unwrap();
            Ok((last.r, last.x0, states))
        }
        _ => Err(Error::NoHorizonInWindow(format!(
            "trajectory from r = {r0} left the annulus before returning to the section"
        ))),
    }
}

/// Search for closed orbits of one family by iterating the return map from
/// seeded radii (forward, then backward if the forward iteration diverges),
/// polishing converged candidates by a Newton step on P(r) - r, and
/// deduplicating. Absence of results is not evidence of nonexistence.
pub fn find_closed_orbits(
    metric: &PolarMetric2D,
    family: OrbitFamily,
    opts: &OrbitSearchOpts,
) -> Result<Vec<ClosedOrbit>> {
    let ergo = locate_ergosphere(metric, 64)?;
    let r_hi = 0.98 * ergo.min_r();
    let r_lo = opts.r_min;
    if r_lo >= r_hi {
        return Err(Error::InvalidArgument("empty seeding annulus".into()));
    }
    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..opts.n_seeds {
        let r_seed = r_lo * (r_hi / r_lo).powf((i as f64 + 0.5) / opts.n_seeds as f64);
        for &reverse in &[false, true] {
            if let Some(r_star) = iterate_to_orbit(metric, family, r_seed, reverse, opts) {
                candidates.push(r_star);
            }
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() < opts.dedup_tol);

    let mut orbits = Vec::new();
    for r_star in candidates {
        // Newton polish on P(r) - r; the direction that converged is also
        // the stable one for evaluating P. A polish that wanders out of the
        // annulus exposes the candidate as spurious: drop it.
        let polish = || -> Result<ClosedOrbit> {
            let reverse = is_reverse_stable(metric, family, r_star);
            let g = |r: f64| -> Result<f64> { Ok(return_map(metric, family, r, reverse)?.0 - r) };
            let mut r = r_star;
            for _ in 0..4 {
                let f0 = g(r)?;
                if f0.abs() < opts.return_tol {
                    break;
                }
                let h = 1e-7 * (1.0 + r.abs());
                let fp = (g(r + h)? - g(r - h)?) / (2.0 * h);
                if fp.abs() < 1e-12 {
                    break;
                }
                r -= f0 / fp;
            }
            let (r_ret, period, samples) = return_map(metric, family, r, reverse)?;
            let closure_defect = (r_ret - r).abs();
            let kind = classify_orbit(metric, family, &samples)?;
            Ok(ClosedOrbit {
                family,
                radius: r,
                samples,
                period_x0: period.abs(),
                kind,
                closure_defect,
            })
        };
        if let Ok(orbit) = polish() {
            if orbit.closure_defect < 1e-6 {
                orbits.push(orbit);
            }
        }
    }
    Ok(orbits)
}

fn iterate_to_orbit(
    metric: &PolarMetric2D,
    family: OrbitFamily,
    r_seed: f64,
    reverse: bool,
    opts: &OrbitSearchOpts,
) -> Option<f64> {
    let mut r = r_seed;
    let mut prev_gap = f64::INFINITY;
    for _ in 0..opts.max_returns {
        let (r_next, _, _) = return_map(metric, family, r, reverse).ok()?;
        if r_next < 20.0 * 1e-4 {
            // sinking into the origin along a tightening spiral, whose
            // per-revolution change vanishes without any closed orbit
            return None;
        }
        let gap = (r_next - r).abs();
        if gap < 1e-9 {
            return Some(r_next);
        }
        if gap > 4.0 * prev_gap.max(1e-14) && gap > 1e-6 {
            return None; // diverging
        }
        prev_gap = gap;
        r = r_next;
    }
    None
}

fn is_reverse_stable(metric: &PolarMetric2D, family: OrbitFamily, r_star: f64) -> bool {
    // measure the forward return-map multiplier with a small offset
    let d = 1e-5 * (1.0 + r_star);
    let p = |r: f64| return_map(metric, family, r, false).map(|t| t.0);
    match (p(r_star + d), p(r_star - d)) {
        (Ok(a), Ok(b)) => ((a - b) / (2.0 * d)).abs() > 1.0,
        _ => true,
    }
}

/// Kind of a closed orbit: sample the *other* family at 8 points along the
/// orbit and take the majority sign of its radial motion. Pointing inward
/// means the orbit bounds a black-hole region.
fn classify_orbit(
    metric: &PolarMetric2D,
    family: OrbitFamily,
    samples: &[PolarState],
) -> Result<OrbitKind> {
    let mut inward = 0usize;
    let mut outward = 0usize;
    let n = samples.len();
    for k in 0..8 {
        let st = &samples[(k * n) / 8];
        let dirs = null_directions(metric, st.r, st.theta)?;
        let other = match family {
            OrbitFamily::Minus => dirs[1],
            OrbitFamily::Plus => dirs[0],
        };
        let c = metric.comps(st.r, st.theta);
        let dr = 2.0 * (c.grr * other.0 + c.grt * other.1 / st.r);
        let dx0 = 2.0 * (c.gr0 * other.0 + c.gt0 * other.1 / st.r);
        if dr / dx0 < 0.0 {
            inward += 1;
        } else {
            outward += 1;
        }
    }
    if inward > outward + 2 {
        Ok(OrbitKind::BlackHorizon)
    } else if outward > inward + 2 {
        Ok(OrbitKind::WhiteHorizon)
    } else {
        Err(Error::DegenerateClassification {
            r_s: samples[0].r,
            xi_plus: inward as f64,
            xi_minus: outward as f64,
        })
    }
}

/// Census of seeded zero-frequency bicharacteristics started on r = eps:
/// with b1 < 0 they must all reach the origin floor forward in x0; with
/// b1 > 0 backward.
#[derive(Clone, Debug)]
pub struct CensusReport {
    pub total: usize,
    pub hits: usize,
    pub direction: TimeDirection,
    /// (theta, family) of trajectories that failed to reach the floor.
    pub violators: Vec<(f64, OrbitFamily)>,
}

pub fn trapping_census(
    metric: &PolarMetric2D,
    eps: f64,
    n_per_family: usize,
    seed: u64,
) -> Result<CensusReport> {
    let b1 = metric.b1(0.0);
    if b1 == 0.0 {
        return Err(Error::InvalidArgument("census requires b1 != 0".into()));
    }
    let direction = if b1 < 0.0 {
        TimeDirection::Forward
    } else {
        TimeDirection::Backward
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    let mut total = 0;
    let mut violators = Vec::new();
    let opts = PolarOpts {
        r_escape: 100.0,
        ..PolarOpts::default()
    };
    for fam in [OrbitFamily::Minus, OrbitFamily::Plus] {
        for _ in 0..n_per_family {
            let theta: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let dirs = null_directions(metric, eps, theta)?;
            let d = match fam {
                OrbitFamily::Minus => dirs[0],
                OrbitFamily::Plus => dirs[1],
            };
            let st = PolarState {
                x0: 0.0,
                r: eps,
                theta,
                xi0: 0.0,
                xir: d.0,
                xit: d.1,
            };
            let tr = integrate_polar2d(metric, &st, direction, 1e4, &opts)?;
            total += 1;
            if matches!(tr.fate, Fate::HitOrigin(_)) {
                hits += 1;
            } else {
                violators.push((theta, fam));
            }
        }
    }
    Ok(CensusReport {
        total,
        hits,
        direction,
        violators,
    })
}

/// Convenience: radial-flow limit check used by tests. For B = 0 the orbit
/// detector must agree with the radial fixed point r = |A|.
pub fn radial_fixed_point(metric: &PolarMetric2D) -> f64 {
    metric.b1(0.0).abs()
}
