//! Null curves: radial characteristic trajectories with their fates, and the
//! 2D stationary polar Hamiltonian flow.

use crate::error::{Error, Result};
use crate::metric::{PolarMetric2D, RadialMetric};
use crate::ode::{self, Event, OdeOpts, StopReason};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fate {
    /// Reached r <= r_floor at the recorded x0.
    HitOrigin(f64),
    /// Still inside the window when integration ended.
    Alive,
    /// Crossed r_escape moving outward at the recorded x0.
    Escaped(f64),
}

impl Fate {
    /// Total order used by bisection: hit < alive < escaped.
    pub fn rank(&self) -> i8 {
        match self {
            Fate::HitOrigin(_) => -1,
            Fate::Alive => 0,
            Fate::Escaped(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Minus,
    Plus,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub x0: Vec<f64>,
    pub r: Vec<f64>,
    pub fate: Fate,
}

impl Trajectory {
    pub fn last(&self) -> (f64, f64) {
        (*self.x0.last().unwrap(), *self.r.last().unwrap())
    }

    /// Linear interpolation of r at a given x0 (requires monotone x0).
    pub fn r_at(&self, x0: f64) -> Option<f64> {
        let asc = self.x0.len() < 2 || self.x0[1] >= self.x0[0];
        let xs: Vec<f64> = if asc {
            self.x0.clone()
        } else {
            self.x0.iter().rev().cloned().collect()
        };
        let rs: Vec<f64> = if asc {
            self.r.clone()
        } else {
            self.r.iter().rev().cloned().collect()
        };
        if x0 < xs[0] || x0 > *xs.last().unwrap() {
            return None;
        }
        let i = xs.partition_point(|&t| t <= x0).min(xs.len() - 1).max(1);
        let (t0, t1) = (xs[i - 1], xs[i]);
        let (r0, r1) = (rs[i - 1], rs[i]);
        if t1 == t0 {
            return Some(r0);
        }
        Some(r0 + (r1 - r0) * (x0 - t0) / (t1 - t0))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RadialOpts {
    pub r_floor: f64,
    pub r_escape: f64,
    pub atol: f64,
    pub rtol: f64,
    /// Minimal outward slope (in the direction of integration) required at
    /// the escape radius for the crossing to count as an escape.
    pub escape_slope: f64,
}

impl RadialOpts {
    pub fn for_metric(metric: &RadialMetric) -> Self {
        // crude sup of |b1| over a wide time range
        let mut sup = 0.0f64;
        for i in 0..=400 {
            let x0 = -100.0 + 0.5 * i as f64;
            sup = sup.max(metric.b1(x0).abs());
        }
        RadialOpts {
            r_floor: 1e-6,
            r_escape: 10.0 * sup.max(1.0),
            atol: 1e-10,
            rtol: 1e-9,
            escape_slope: 0.25,
        }
    }
}

/// Speed of the chosen characteristic family at (x0, r).
pub fn family_speed(metric: &RadialMetric, family: Family, x0: f64, r: f64) -> f64 {
    let g00 = metric.g00(x0, r);
    let gr0 = metric.gr0(x0, r);
    let sq = metric.q(x0, r).sqrt();
    match family {
        Family::Minus => (gr0 - sq) / g00,
        Family::Plus => (gr0 + sq) / g00,
    }
}

/// r * speed, smooth through r = 0 for acoustic-type metrics
/// (r*gr0 -> b1 as r -> 0).
fn regularized_speed(metric: &RadialMetric, family: Family, x0: f64, r: f64) -> f64 {
    let g00 = metric.g00(x0, r);
    let rgr0 = if metric.is_acoustic() {
        metric.b1(x0)
    } else {
        metric.gr0(x0, r) * r
    };
    let sq = metric.q(x0, r.max(1e-300)).sqrt();
    match family {
        Family::Minus => (rgr0 - sq * r) / g00,
        Family::Plus => (rgr0 + sq * r) / g00,
    }
}

/// Integrate the radial characteristic dr/dx0 = c_family(x0, r) from
/// (x0_start, r0) to x0_end (either direction), stopping at the origin
/// floor or the escape radius.
///
/// The integration variable is w = r^2/2, whose flow r*c stays smooth as
/// r -> 0, so origin hits are resolved without step-size collapse.
pub fn integrate_radial(
    metric: &RadialMetric,
    family: Family,
    x0_start: f64,
    r0: f64,
    x0_end: f64,
    opts: &RadialOpts,
) -> Result<Trajectory> {
    if r0 <= 0.0 {
        return Err(Error::InvalidArgument("initial radius must be positive".into()));
    }
    let dir = if x0_end >= x0_start { 1.0 } else { -1.0 };
    let rhs = |x0: f64, y: &[f64]| -> Vec<f64> {
        let w = y[0];
        if w <= 0.0 {
            // limiting flow at the origin, so trial stages that overshoot
            // w = 0 see a smooth continuation instead of a cliff
            return vec![metric.b1(x0) / metric.g00(x0, 1e-9)];
        }
        let r = (2.0 * w).sqrt();
        // dw/dx0 = r * dr/dx0; regularized_speed already carries the factor r
        vec![regularized_speed(metric, family, x0, r)]
    };
    let w_floor = 0.5 * opts.r_floor * opts.r_floor;
    let w_escape = 0.5 * opts.r_escape * opts.r_escape;
    let hit = |_x0: f64, y: &[f64]| y[0] - w_floor;
    let esc = |_x0: f64, y: &[f64]| y[0] - w_escape;
    let events = [
        Event {
            f: &hit,
            direction: -1,
        },
        Event {
            f: &esc,
            direction: 1,
        },
    ];
    let ode_opts = OdeOpts {
        atol: (opts.atol * opts.atol).max(1e-16), // w-scale tolerance
        rtol: opts.rtol,
        ..Default::default()
    };
    let sol = ode::integrate(
        &rhs,
        x0_start,
        &[0.5 * r0 * r0],
        x0_end,
        &events,
        None,
        &ode_opts,
    )?;
    let x0: Vec<f64> = sol.t.clone();
    let r: Vec<f64> = sol.y.iter().map(|y| (2.0 * y[0].max(0.0)).sqrt()).collect();
    let fate = match sol.stop {
        StopReason::Event(0) => Fate::HitOrigin(*x0.last().unwrap()),
        StopReason::Event(_) => {
            let (xe, re) = (*x0.last().unwrap(), *r.last().unwrap());
            let slope = dir * family_speed(metric, family, xe, re);
            if slope >= opts.escape_slope {
                Fate::Escaped(xe)
            } else {
                Fate::Alive
            }
        }
        StopReason::EndOfInterval => Fate::Alive,
    };
    Ok(Trajectory { x0, r, fate })
}

/// Fates of a batch of initial radii launched at x0_start toward x0_end.
pub fn fate_census(
    metric: &RadialMetric,
    family: Family,
    x0_start: f64,
    radii: &[f64],
    x0_end: f64,
    opts: &RadialOpts,
) -> Result<Vec<Fate>> {
    radii
        .iter()
        .map(|&r0| Ok(integrate_radial(metric, family, x0_start, r0, x0_end, opts)?.fate))
        .collect()
}

// ---------------------------------------------------------------------------
// 2D stationary polar flow
// ---------------------------------------------------------------------------

/// Phase point of the 2D polar Hamiltonian system. xi0 is conserved
/// (stationary metric).
#[derive(Clone, Copy, Debug)]
pub struct PolarState {
    pub x0: f64,
    pub r: f64,
    pub theta: f64,
    pub xi0: f64,
    pub xir: f64,
    pub xit: f64,
}

#[derive(Clone, Debug)]
pub struct PolarTrajectory {
    pub states: Vec<PolarState>,
    pub fate: Fate,
    /// Largest |H|/|xi|^2 observed along the run.
    pub max_drift: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PolarOpts {
    pub r_floor: f64,
    pub r_escape: f64,
    pub atol: f64,
    pub rtol: f64,
    /// Abort threshold on |H|/|xi|^2.
    pub drift_tol: f64,
    /// Cap on the affine-parameter extent, in units of the x0 span.
    pub s_factor: f64,
}

impl Default for PolarOpts {
    fn default() -> Self {
        PolarOpts {
            r_floor: 1e-6,
            r_escape: 50.0,
            atol: 1e-11,
            rtol: 1e-10,
            drift_tol: 1e-6,
            s_factor: 400.0,
        }
    }
}

/// Hamiltonian value g^{jk} xi_j xi_k with orthonormal angular pairing
/// (the theta slot couples to xi_theta / r).
pub fn polar_hamiltonian(metric: &PolarMetric2D, st: &PolarState) -> f64 {
    polar_hamiltonian_scaled(metric, st).0
}

/// Hamiltonian together with the sum of the magnitudes of its terms; the
/// ratio is the natural relative measure of nullity (the terms grow like
/// inverse powers of r and cancel near the origin).
pub fn polar_hamiltonian_scaled(metric: &PolarMetric2D, st: &PolarState) -> (f64, f64) {
    let c = metric.comps(st.r, st.theta);
    let (x0, xr, xt) = (st.xi0, st.xir, st.xit / st.r);
    let terms = [
        c.g00 * x0 * x0,
        2.0 * c.gr0 * x0 * xr,
        2.0 * c.gt0 * x0 * xt,
        c.grr * xr * xr,
        2.0 * c.grt * xr * xt,
        c.gtt * xt * xt,
    ];
    let h: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    (h, scale)
}

pub(crate) fn polar_rhs(metric: &PolarMetric2D, y: &[f64]) -> Vec<f64> {
    let (r, theta) = (y[1], y[2]);
    let (xi0, xir, xit) = (y[3], y[4], y[5]);
    let c = metric.comps(r, theta);
    let dc = metric.d_comps_dr(r, theta);
    let dt = metric.d_comps_dtheta(r, theta);
    let xt = xit / r;

    let dx0 = 2.0 * (c.g00 * xi0 + c.gr0 * xir + c.gt0 * xt);
    let dr = 2.0 * (c.gr0 * xi0 + c.grr * xir + c.grt * xt);
    let dtheta = 2.0 * (c.gt0 * xi0 + c.grt * xir + c.gtt * xt) / r;

    // -dH/dr: metric-coefficient variation plus explicit 1/r factors
    let dh_dr = dc.g00 * xi0 * xi0
        + 2.0 * dc.gr0 * xi0 * xir
        + 2.0 * dc.gt0 * xi0 * xt
        + dc.grr * xir * xir
        + 2.0 * dc.grt * xir * xt
        + dc.gtt * xt * xt
        + (-2.0 * c.gt0 * xi0 * xt - 2.0 * c.grt * xir * xt - 2.0 * c.gtt * xt * xt) / r;
    let dh_dtheta = dt.g00 * xi0 * xi0
        + 2.0 * dt.gr0 * xi0 * xir
        + 2.0 * dt.gt0 * xi0 * xt
        + dt.grr * xir * xir
        + 2.0 * dt.grt * xir * xt
        + dt.gtt * xt * xt;

    vec![dx0, dr, dtheta, 0.0, -dh_dr, -dh_dtheta]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    Backward,
}

/// Integrate the polar null flow until the trajectory leaves
/// [r_floor, r_escape], covers x0_span in coordinate time, or the parameter
/// budget runs out (fate Alive in the latter two cases).
///
/// The covector is flipped if needed so that x0 initially moves in the
/// requested direction. Two orbit-preserving rescalings keep the run
/// regular near r = 0, where the raw field components blow up like inverse
/// powers of r:
/// - the vector field is normalized to unit length (positive rescaling of
///   an autonomous field keeps the same orbits), so the infall becomes
///   exponential decay of r in the parameter instead of a finite-parameter
///   blow-up;
/// - the covector is rescaled to unit size whenever it drifts outside
///   [0.1, 10]; the Hamiltonian is homogeneous of degree two, so this only
///   reparameterizes the curve.
pub fn integrate_polar2d(
    metric: &PolarMetric2D,
    start: &PolarState,
    time_dir: TimeDirection,
    x0_span: f64,
    opts: &PolarOpts,
) -> Result<PolarTrajectory> {
    let mut st = *start;
    let h0 = polar_hamiltonian(metric, &st);
    let xi_norm2 = st.xi0 * st.xi0 + st.xir * st.xir + st.xit * st.xit;
    if h0.abs() > opts.drift_tol.max(1e-9) * xi_norm2 {
        return Err(Error::InvalidArgument(format!(
            "initial covector is not null: H = {h0:e}"
        )));
    }

    // orient the curve in the requested time direction
    let want = match time_dir {
        TimeDirection::Forward => 1.0,
        TimeDirection::Backward => -1.0,
    };
    let rhs0 = polar_rhs(metric, &[st.x0, st.r, st.theta, st.xi0, st.xir, st.xit]);
    if rhs0[0] * want < 0.0 {
        st.xi0 = -st.xi0;
        st.xir = -st.xir;
        st.xit = -st.xit;
    } else if rhs0[0] == 0.0 {
        return Err(Error::DegenerateClassification {
            r_s: st.r,
            xi_plus: st.xir,
            xi_minus: st.xit,
        });
    }

    let mut states = vec![st];
    let mut max_drift = 0.0f64;
    let s_budget = opts.s_factor * x0_span.max(1.0);
    let mut s_used = 0.0;
    let x0_target = start.x0 + want * x0_span;

    let ode_opts = OdeOpts {
        atol: opts.atol,
        rtol: opts.rtol,
        h_max: 0.2,
        ..Default::default()
    };

    let mut fate = Fate::Alive;
    'outer: while s_used < s_budget {
        // renormalize the covector if it wandered; homogeneity makes this a
        // pure reparameterization
        let nrm =
            (st.xi0 * st.xi0 + st.xir * st.xir + st.xit * st.xit).sqrt();
        if !(0.1..=10.0).contains(&nrm) {
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::Reparameterization(
                    "covector norm degenerated along the flow".into(),
                ));
            }
            st.xi0 /= nrm;
            st.xir /= nrm;
            st.xit /= nrm;
        }

        let rhs = |_s: f64, y: &[f64]| {
            let mut f = polar_rhs(metric, y);
            let n = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 && n.is_finite() {
                for v in &mut f {
                    *v /= n;
                }
            }
            f
        };
        let ev_floor = |_s: f64, y: &[f64]| y[1] - opts.r_floor;
        let ev_escape = |_s: f64, y: &[f64]| y[1] - opts.r_escape;
        let ev_time = |_s: f64, y: &[f64]| (y[0] - x0_target) * want;
        let events = [
            Event {
                f: &ev_floor,
                direction: -1,
            },
            Event {
                f: &ev_escape,
                direction: 1,
            },
            Event {
                f: &ev_time,
                direction: 1,
            },
        ];
        let chunk = 0.5f64.min(s_budget - s_used);
        let y0 = [st.x0, st.r, st.theta, st.xi0, st.xir, st.xit];
        let sol = ode::integrate(&rhs, 0.0, &y0, chunk, &events, None, &ode_opts)?;
        for y in &sol.y[1..] {
            let s = PolarState {
                x0: y[0],
                r: y[1],
                theta: y[2],
                xi0: y[3],
                xir: y[4],
                xit: y[5],
            };
            let (h, scale) = polar_hamiltonian_scaled(metric, &s);
            let n2 = s.xi0 * s.xi0 + s.xir * s.xir + s.xit * s.xit;
            let drift = h.abs() / scale.max(n2).max(1e-300);
            max_drift = max_drift.max(drift);
            if drift > opts.drift_tol {
                return Err(Error::HamiltonianDrift {
                    drift,
                    tol: opts.drift_tol,
                });
            }
            states.push(s);
        }
        st = *states.last().unwrap();
        match sol.stop {
            StopReason::Event(0) => {
                fate = Fate::HitOrigin(st.x0);
                break 'outer;
            }
            StopReason::Event(1) => {
                fate = Fate::Escaped(st.x0);
                break 'outer;
            }
            StopReason::Event(_) => {
                // covered the requested time span
                break 'outer;
            }
            StopReason::EndOfInterval => {
                s_used += chunk;
            }
        }
    }

    Ok(PolarTrajectory {
        states,
        fate,
        max_drift,
    })
}
