//! Boundary data of radial waves: characteristic coordinates, the 1+1
//! d'Alembert reduction, Dirichlet-to-Neumann traces computed two
//! independent ways, and the isometry map between boundary-equivalent
//! metrics.

use crate::error::{Error, Result};
use crate::metric::RadialMetric;
use crate::ode::{self, Event, OdeOpts, StopReason};

/// Compactly supported smooth probe: a Gaussian truncated where it falls
/// below 1e-16, so values outside the support are exactly zero.
#[derive(Clone, Copy, Debug)]
pub struct ProbePulse {
    pub center: f64,
    pub sigma: f64,
    pub halfwidth: f64,
}

impl ProbePulse {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidArgument("pulse width must be positive".into()));
        }
        Ok(ProbePulse {
            center,
            sigma,
            // exp(-t^2/2) < 1e-16 for t > 8.58
            halfwidth: 8.58 * sigma,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = x - self.center;
        if t.abs() > self.halfwidth {
            return 0.0;
        }
        (-0.5 * t * t / (self.sigma * self.sigma)).exp()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = x - self.center;
        if t.abs() > self.halfwidth {
            return 0.0;
        }
        -t / (self.sigma * self.sigma) * (-0.5 * t * t / (self.sigma * self.sigma)).exp()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }
}

/// Which of the two characteristic families a coordinate function rides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ray {
    /// Ingoing speed c- (carries phi1, boundary data x0 + a).
    Ingoing,
    /// Outgoing speed c+ (carries phi2, boundary data -x0 + a).
    Outgoing,
}

fn speed(metric: &RadialMetric, ray: Ray, x0: f64, r: f64) -> f64 {
    let g00 = metric.g00(x0, r);
    let gr0 = metric.gr0(x0, r);
    let sq = metric.q(x0, r).sqrt();
    match ray {
        Ray::Ingoing => (gr0 - sq) / g00,
        Ray::Outgoing => (gr0 + sq) / g00,
    }
}

fn dspeed_dr(metric: &RadialMetric, ray: Ray, x0: f64, r: f64) -> f64 {
    let h = 1e-6 * (1.0 + r.abs());
    (speed(metric, ray, x0, r + h) - speed(metric, ray, x0, r - h)) / (2.0 * h)
}

/// Characteristic-coordinate data at a single point: both coordinate values
/// and their first derivatives. The x0-derivatives come from the exact
/// advection relation phi_x0 = -c * phi_r; the r-derivatives from the
/// variational equation along the characteristic.
#[derive(Clone, Copy, Debug)]
pub struct CharPoint {
    pub phi1: f64,
    pub phi2: f64,
    pub phi1_r: f64,
    pub phi2_r: f64,
    pub phi1_x0: f64,
    pub phi2_x0: f64,
}

impl CharPoint {
    /// The flattening map to half-plane coordinates; restricted to r = a it
    /// is the identity by construction of the boundary data.
    pub fn y(&self) -> (f64, f64) {
        (0.5 * (self.phi1 - self.phi2), 0.5 * (self.phi1 + self.phi2))
    }

    /// Jacobian determinant of (x0, r) -> (y0, y1).
    pub fn jacobian(&self) -> f64 {
        let y0_x0 = 0.5 * (self.phi1_x0 - self.phi2_x0);
        let y0_r = 0.5 * (self.phi1_r - self.phi2_r);
        let y1_x0 = 0.5 * (self.phi1_x0 + self.phi2_x0);
        let y1_r = 0.5 * (self.phi1_r + self.phi2_r);
        y0_x0 * y1_r - y0_r * y1_x0
    }
}

/// Trace one characteristic of the given family from (x0, r) to the
/// cylinder r = a, returning the arrival time and the accumulated
/// variational factor J = exp(int d(speed)/dr dt).
fn trace_to_boundary(
    metric: &RadialMetric,
    ray: Ray,
    x0: f64,
    r: f64,
    a: f64,
) -> Result<(f64, f64)> {
    if (r - a).abs() < 1e-14 {
        return Ok((x0, 1.0));
    }
    if r > a {
        return Err(Error::InvalidArgument("point outside the cylinder".into()));
    }
    // ingoing rays come *from* the boundary: walk them backward in time;
    // outgoing rays reach it forward
    let t_end = match ray {
        Ray::Ingoing => x0 - 1e4,
        Ray::Outgoing => x0 + 1e4,
    };
    let rhs = |t: f64, y: &[f64]| -> Vec<f64> {
        vec![
            speed(metric, ray, t, y[0]),
            dspeed_dr(metric, ray, t, y[0]),
        ]
    };
    let hit = |_t: f64, y: &[f64]| y[0] - a;
    let stall = |t: f64, y: &[f64]| {
        // characteristics trapped at a horizon never reach the boundary
        speed(metric, ray, t, y[0]).abs() - 1e-12
    };
    let events = [
        Event { f: &hit, direction: 0 },
        Event { f: &stall, direction: -1 },
    ];
    let sol = ode::integrate(
        &rhs,
        x0,
        &[r, 0.0],
        t_end,
        &events,
        None,
        &OdeOpts {
            atol: 1e-13,
            rtol: 1e-12,
            ..Default::default()
        },
    )?;
    match sol.stop {
        StopReason::Event(0) => {
            let (t1, y) = sol.last();
            Ok((t1, y[1].exp()))
        }
        _ => Err(Error::DegenerateCoordinates(format!(
            "characteristic from (x0={x0}, r={r}) never reached r = {a}"
        ))),
    }
}

/// Characteristic coordinates and their gradients at one point.
pub fn char_point(metric: &RadialMetric, a: f64, x0: f64, r: f64) -> Result<CharPoint> {
    let (t1, j1) = trace_to_boundary(metric, Ray::Ingoing, x0, r, a)?;
    let (t2, j2) = trace_to_boundary(metric, Ray::Outgoing, x0, r, a)?;
    let cm_b = speed(metric, Ray::Ingoing, t1, a);
    let cp_b = speed(metric, Ray::Outgoing, t2, a);
    // arrival-time sensitivity: delta r propagates by J, then trades for a
    // time shift against the boundary speed
    let phi1_r = -j1 / cm_b;
    let phi2_r = j2 / cp_b; // phi2 = -t2 + a, and dt2/dr = -J/c+
    let cm = speed(metric, Ray::Ingoing, x0, r);
    let cp = speed(metric, Ray::Outgoing, x0, r);
    Ok(CharPoint {
        phi1: t1 + a,
        phi2: -t2 + a,
        phi1_r,
        phi2_r,
        phi1_x0: -cm * phi1_r,
        phi2_x0: -cp * phi2_r,
    })
}

/// Characteristic coordinates sampled on a rectangular mesh, with the
/// diagnostics used by the coordinate-validity checks.
#[derive(Clone, Debug)]
pub struct CharCoordinates {
    pub a: f64,
    pub x0: Vec<f64>,
    pub r: Vec<f64>,
    pub points: Vec<Vec<CharPoint>>, // indexed [ix0][ir]
    pub jacobian_min: f64,
    /// Max over the interior mesh of the same-index transformed-metric
    /// residual, computed with finite-difference x0-gradients (independent
    /// integrations) so the check is not circular.
    pub nullity_residual: f64,
}

pub fn build_char_coords(
    metric: &RadialMetric,
    a: f64,
    x0_range: (f64, f64),
    r_min: f64,
    nx: usize,
    nr: usize,
) -> Result<CharCoordinates> {
    if !(r_min > 0.0 && r_min < a) {
        return Err(Error::InvalidArgument("need 0 < r_min < a".into()));
    }
    let nx = nx.max(3);
    let nr = nr.max(3);
    let x0s: Vec<f64> = (0..nx)
        .map(|i| x0_range.0 + (x0_range.1 - x0_range.0) * i as f64 / (nx - 1) as f64)
        .collect();
    let rs: Vec<f64> = (0..nr)
        .map(|j| r_min + (a - r_min) * j as f64 / (nr - 1) as f64)
        .collect();
    let mut points = Vec::with_capacity(nx);
    let mut jacobian_min = f64::INFINITY;
    for &x0 in &x0s {
        let mut row = Vec::with_capacity(nr);
        for &r in &rs {
            let p = char_point(metric, a, x0, r)?;
            jacobian_min = jacobian_min.min(p.jacobian().abs());
            row.push(p);
        }
        points.push(row);
    }
    if jacobian_min < 1e-8 {
        return Err(Error::DegenerateCoordinates(format!(
            "coordinate Jacobian degenerates: min |J| = {jacobian_min:.3e}"
        )));
    }

    // nullity residual with finite-difference time gradients
    let dx = x0s[1] - x0s[0];
    let mut nullity_residual = 0.0f64;
    for i in 1..nx - 1 {
        for j in 0..nr {
            let (x0, r) = (x0s[i], rs[j]);
            let g00 = metric.g00(x0, r);
            let gr0 = metric.gr0(x0, r);
            let grr = metric.grr(x0, r);
            for field in 0..2 {
                let v = |p: &CharPoint| if field == 0 { p.phi1 } else { p.phi2 };
                let vr = |p: &CharPoint| if field == 0 { p.phi1_r } else { p.phi2_r };
                let ft = (v(&points[i + 1][j]) - v(&points[i - 1][j])) / (2.0 * dx);
                let fr = vr(&points[i][j]);
                let res = g00 * ft * ft + 2.0 * gr0 * ft * fr + grr * fr * fr;
                let scale = (g00 * ft * ft).abs()
                    + (2.0 * gr0 * ft * fr).abs()
                    + (grr * fr * fr).abs();
                nullity_residual = nullity_residual.max(res.abs() / scale.max(1e-30));
            }
        }
    }

    Ok(CharCoordinates {
        a,
        x0: x0s,
        r: rs,
        points,
        jacobian_min,
        nullity_residual,
    })
}

/// The unique ingoing solution of the flattened wave equation with zero
/// past data: u_hat(y0, y1) = f(y0 + y1 - a).
pub fn dalembert_solve(pulse: &ProbePulse, a: f64, y0: f64, y1: f64) -> f64 {
    pulse.value(y0 + y1 - a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DnMethod {
    DirectFd,
    Characteristic,
}

/// A Dirichlet-to-Neumann trace: boundary data f and its normal-derivative
/// response on a common time grid at r = a.
#[derive(Clone, Debug)]
pub struct DnTrace {
    pub method: DnMethod,
    pub a: f64,
    pub x0: Vec<f64>,
    pub f: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl DnTrace {
    pub fn lambda_at(&self, x0: f64) -> Option<f64> {
        if x0 < self.x0[0] || x0 > *self.x0.last().unwrap() {
            return None;
        }
        let i = self.x0.partition_point(|&t| t <= x0).clamp(1, self.x0.len() - 1);
        let (t0, t1) = (self.x0[i - 1], self.x0[i]);
        let (l0, l1) = (self.lambda[i - 1], self.lambda[i]);
        Some(l0 + (l1 - l0) * (x0 - t0) / (t1 - t0))
    }
}

/// Metric-normalized outward conormal derivative at r = a, from the state
/// (u_x0, u_r) there.
fn lambda_from_state(metric: &RadialMetric, a: f64, x0: f64, p: f64, w: f64) -> f64 {
    let gr0 = metric.gr0(x0, a);
    let grr = metric.grr(x0, a);
    let sq = metric.q(x0, a).sqrt();
    -(gr0 * p + grr * w) / sq
}

/// DN trace through the characteristic coordinates: the ingoing solution is
/// u = f(phi1 - a); its radial derivative at the boundary comes from a
/// one-sided second-order stencil on three characteristic evaluations.
pub fn dn_characteristic(
    metric: &RadialMetric,
    pulse: &ProbePulse,
    a: f64,
    times: &[f64],
    h: f64,
) -> Result<DnTrace> {
    if h <= 0.0 || 2.0 * h >= a {
        return Err(Error::InvalidArgument("bad boundary stencil width".into()));
    }
    let mut f = Vec::with_capacity(times.len());
    let mut lambda = Vec::with_capacity(times.len());
    for &x0 in times {
        let u0 = pulse.value(x0); // phi1(x0, a) - a = x0 exactly
        let u1 = pulse.value(char_point(metric, a, x0, a - h)?.phi1 - a);
        let u2 = pulse.value(char_point(metric, a, x0, a - 2.0 * h)?.phi1 - a);
        let w = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h);
        let p = pulse.derivative(x0);
        f.push(u0);
        lambda.push(lambda_from_state(metric, a, x0, p, w));
    }
    Ok(DnTrace {
        method: DnMethod::Characteristic,
        a,
        x0: times.to_vec(),
        f,
        lambda,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct DirectOpts {
    /// Number of radial cells.
    pub cells: usize,
    /// CFL number.
    pub cfl: f64,
    /// Power of r in the volume weight rho = r^p / sqrt(q). Zero gives the
    /// two-dimensional reduction for which the DN trace of the ingoing
    /// solution is exactly f'; two gives the physical three-dimensional
    /// weight.
    pub area_power: f64,
    /// Record max |state| below this radius (white-hole support check).
    pub watch_below: Option<f64>,
}

impl Default for DirectOpts {
    fn default() -> Self {
        DirectOpts {
            cells: 200,
            cfl: 0.4,
            area_power: 0.0,
            watch_below: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirectSolveReport {
    pub trace: DnTrace,
    pub r_abs: f64,
    pub h: f64,
    /// Max |u_x0| + |u_r| observed at radii below `watch_below`.
    pub max_state_watched: f64,
}

/// DN trace by a direct finite-difference solve of the weighted wave
/// equation, as a first-order system q = (u_x0, u_r):
///
///   q_t + M q_r = C q,  M = [[2 g0r/g00, grr/g00], [-1, 0]],
///
/// advanced by MacCormack steps (second order). Characteristic variables
/// z_pm = u_x0 + c_mp u_r ride at speeds c_pm; the boundary conditions are
/// imposed family by family: Dirichlet data fixes u_x0 at r = a with the
/// outgoing variable extrapolated, and the inner edge r_abs is pure
/// outflow/absorption. r_abs sits three cells inside the outgoing-speed
/// zero when a horizon is present, where both families point inward and no
/// interior information can reach the boundary.
pub fn dn_direct(
    metric: &RadialMetric,
    pulse: &ProbePulse,
    a: f64,
    x0_end: f64,
    opts: &DirectOpts,
) -> Result<DirectSolveReport> {
    let n = opts.cells.max(16);
    let x0_start = pulse.support().0 - 1e-9;
    if x0_end <= x0_start {
        return Err(Error::InvalidArgument("empty time interval".into()));
    }

    // locate a c+ zero (horizon) if any, at the initial time
    let h_est = a / n as f64;
    let r_abs = match outgoing_zero(metric, x0_start, a) {
        Some(r0) => (r0 - 3.0 * h_est).max(1e-3),
        None => 0.05 * a,
    };
    let h = (a - r_abs) / n as f64;
    let rs: Vec<f64> = (0..=n).map(|i| r_abs + i as f64 * h).collect();

    // per-node coefficient tables (refreshed per step only if nonstationary;
    // the shipped profiles are stationary or slowly varying, so evaluate at
    // the current time each step)
    let mut p = vec![0.0f64; n + 1];
    let mut w = vec![0.0f64; n + 1];
    let mut ps = vec![0.0f64; n + 1];
    let mut ws = vec![0.0f64; n + 1];

    let mut trace_t = Vec::new();
    let mut trace_f = Vec::new();
    let mut trace_l = Vec::new();
    let mut max_watch = 0.0f64;

    let mut x0 = x0_start;
    let mut guard = 0usize;
    while x0 < x0_end {
        guard += 1;
        if guard > 4_000_000 {
            return Err(Error::Numerical("direct solve step budget exhausted".into()));
        }
        // time step from the fastest speed on the grid
        let mut cmax = 0.0f64;
        for &r in rs.iter().step_by(8.max(n / 32)) {
            cmax = cmax.max(speed(metric, Ray::Ingoing, x0, r).abs());
            cmax = cmax.max(speed(metric, Ray::Outgoing, x0, r).abs());
        }
        let dt = (opts.cfl * h / cmax.max(1e-8)).min(x0_end - x0);

        // predictor: forward differences
        for i in 0..n {
            let (m, c) = node_ops(metric, opts.area_power, x0, rs[i]);
            let dpr = (p[i + 1] - p[i]) / h;
            let dwr = (w[i + 1] - w[i]) / h;
            ps[i] = p[i] - dt * (m[0] * dpr + m[1] * dwr) + dt * (c[0] * p[i] + c[1] * w[i]);
            ws[i] = w[i] - dt * (m[2] * dpr + m[3] * dwr);
        }
        ps[n] = p[n];
        ws[n] = w[n];
        apply_bcs(metric, pulse, a, x0 + dt, &rs, &mut ps, &mut ws);

        // corrector: backward differences on the predictor
        let mut pn = vec![0.0f64; n + 1];
        let mut wn = vec![0.0f64; n + 1];
        for i in 1..n {
            let (m, c) = node_ops(metric, opts.area_power, x0 + dt, rs[i]);
            let dpr = (ps[i] - ps[i - 1]) / h;
            let dwr = (ws[i] - ws[i - 1]) / h;
            pn[i] = 0.5
                * (p[i] + ps[i] - dt * (m[0] * dpr + m[1] * dwr)
                    + dt * (c[0] * ps[i] + c[1] * ws[i]));
            wn[i] = 0.5 * (w[i] + ws[i] - dt * (m[2] * dpr + m[3] * dwr));
        }
        pn[0] = ps[0];
        wn[0] = ws[0];
        pn[n] = ps[n];
        wn[n] = ws[n];
        apply_bcs(metric, pulse, a, x0 + dt, &rs, &mut pn, &mut wn);

        p = pn;
        w = wn;
        x0 += dt;

        trace_t.push(x0);
        trace_f.push(pulse.value(x0));
        trace_l.push(lambda_from_state(metric, a, x0, p[n], w[n]));

        if let Some(limit) = opts.watch_below {
            for i in 0..=n {
                if rs[i] < limit {
                    max_watch = max_watch.max(p[i].abs() + w[i].abs());
                }
            }
        }
    }

    Ok(DirectSolveReport {
        trace: DnTrace {
            method: DnMethod::DirectFd,
            a,
            x0: trace_t,
            f: trace_f,
            lambda: trace_l,
        },
        r_abs,
        h,
        max_state_watched: max_watch,
    })
}

/// Zero of the outgoing speed c+ in (0, a), if any.
fn outgoing_zero(metric: &RadialMetric, x0: f64, a: f64) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=200 {
        let r = 1e-3 + (a - 2e-3) * i as f64 / 200.0;
        let c = speed(metric, Ray::Outgoing, x0, r);
        if let Some((rp, cp)) = prev {
            if cp < 0.0 && c >= 0.0 {
                bracket = Some((rp, r));
                break;
            }
        }
        prev = Some((r, c));
    }
    let (mut lo, mut hi) = bracket?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if speed(metric, Ray::Outgoing, x0, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Flux matrix (row-major 2x2) and source column for the first-order system
/// at one node. The source coefficients come from derivatives of the
/// weighted metric density rho * g.
fn node_ops(metric: &RadialMetric, area_power: f64, x0: f64, r: f64) -> ([f64; 4], [f64; 2]) {
    let g00 = metric.g00(x0, r);
    let gr0 = metric.gr0(x0, r);
    let grr = metric.grr(x0, r);
    let m = [2.0 * gr0 / g00, grr / g00, -1.0, 0.0];

    let rho = |x0: f64, r: f64| r.powf(area_power) / metric.q(x0, r).sqrt();
    let hx = 1e-5;
    let d0_rho_g00 = (rho(x0 + hx, r) * metric.g00(x0 + hx, r)
        - rho(x0 - hx, r) * metric.g00(x0 - hx, r))
        / (2.0 * hx);
    let d0_rho_gr0 = (rho(x0 + hx, r) * metric.gr0(x0 + hx, r)
        - rho(x0 - hx, r) * metric.gr0(x0 - hx, r))
        / (2.0 * hx);
    let hr = 1e-5 * (1.0 + r);
    let dr_rho_gr0 = (rho(x0, r + hr) * metric.gr0(x0, r + hr)
        - rho(x0, r - hr) * metric.gr0(x0, r - hr))
        / (2.0 * hr);
    let dr_rho_grr = (rho(x0, r + hr) * metric.grr(x0, r + hr)
        - rho(x0, r - hr) * metric.grr(x0, r - hr))
        / (2.0 * hr);
    let a11 = d0_rho_g00 + dr_rho_gr0;
    let a12 = d0_rho_gr0 + dr_rho_grr;
    let rg = rho(x0, r) * g00;
    ([m[0], m[1], m[2], m[3]], [-a11 / rg, -a12 / rg])
}

/// Boundary closure on both edges, by characteristic variables
/// z_pm = p + c_mp w.
fn apply_bcs(
    metric: &RadialMetric,
    pulse: &ProbePulse,
    a: f64,
    x0: f64,
    rs: &[f64],
    p: &mut [f64],
    w: &mut [f64],
) {
    let n = rs.len() - 1;
    // outer edge: Dirichlet fixes u_x0; the arriving outgoing variable is
    // extrapolated from the interior
    let cm_a = speed(metric, Ray::Ingoing, x0, a);
    let zp = |i: usize, p: &[f64], w: &[f64]| {
        p[i] + speed(metric, Ray::Ingoing, x0, rs[i]) * w[i]
    };
    let zp_b = 2.0 * zp(n - 1, p, w) - zp(n - 2, p, w);
    p[n] = pulse.derivative(x0);
    w[n] = (zp_b - p[n]) / cm_a;

    // inner edge: family by family — entering characteristics carry zero,
    // leaving ones are extrapolated
    let r0 = rs[0];
    let cm0 = speed(metric, Ray::Ingoing, x0, r0);
    let cp0 = speed(metric, Ray::Outgoing, x0, r0);
    let zmi = |i: usize, p: &[f64], w: &[f64]| {
        p[i] + speed(metric, Ray::Outgoing, x0, rs[i]) * w[i]
    };
    let zpi = |i: usize, p: &[f64], w: &[f64]| {
        p[i] + speed(metric, Ray::Ingoing, x0, rs[i]) * w[i]
    };
    // z+ rides at c+, z- rides at c-
    let z_plus = if cp0 > 0.0 {
        0.0
    } else {
        2.0 * zpi(1, p, w) - zpi(2, p, w)
    };
    let z_minus = if cm0 > 0.0 {
        0.0
    } else {
        2.0 * zmi(1, p, w) - zmi(2, p, w)
    };
    // invert z+ = p + c- w, z- = p + c+ w
    let denom = cm0 - cp0;
    w[0] = (z_plus - z_minus) / denom;
    p[0] = z_plus - cm0 * w[0];
}

// ---------------------------------------------------------------------------
// Isometry map
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct IsometryReport {
    /// max |sigma(x0, a) - (x0, a)| over boundary probes.
    pub boundary_defect: f64,
    /// max |u1(sigma(p)) - u(p)| over interior probes, u the ingoing pulse
    /// solution of each metric.
    pub pullback_defect: f64,
    /// (offset from the first horizon, |sigma_r - second horizon|) pairs at
    /// shrinking offsets.
    pub horizon_defects: Vec<(f64, f64)>,
}

/// The boundary-preserving map between the domains of two metrics with
/// matching DN data: forward characteristic coordinates of the first
/// composed with a Newton inverse of the second's.
pub struct IsometryMap<'a> {
    g: &'a RadialMetric,
    g1: &'a RadialMetric,
    a: f64,
}

impl<'a> IsometryMap<'a> {
    pub fn new(g: &'a RadialMetric, g1: &'a RadialMetric, a: f64) -> Self {
        IsometryMap { g, g1, a }
    }

    /// sigma(x0, r): solve y-coords of g1 = y-coords of g at the point.
    pub fn map(&self, x0: f64, r: f64) -> Result<(f64, f64)> {
        let target = char_point(self.g, self.a, x0, r)?.y();
        // Newton on the forward map of g1, seeded at the source point
        let mut x = (x0, r);
        for _ in 0..30 {
            let cp = char_point(self.g1, self.a, x.0, x.1)?;
            let y = cp.y();
            let (fx, fy) = (y.0 - target.0, y.1 - target.1);
            // the floor is set by the characteristic-integration accuracy
            if fx.abs() + fy.abs() < 1e-9 * (1.0 + target.0.abs() + target.1.abs()) {
                return Ok(x);
            }
            let j00 = 0.5 * (cp.phi1_x0 - cp.phi2_x0);
            let j01 = 0.5 * (cp.phi1_r - cp.phi2_r);
            let j10 = 0.5 * (cp.phi1_x0 + cp.phi2_x0);
            let j11 = 0.5 * (cp.phi1_r + cp.phi2_r);
            let det = j00 * j11 - j01 * j10;
            if det.abs() < 1e-14 {
                return Err(Error::DegenerateCoordinates(
                    "singular Jacobian in the coordinate inverse".into(),
                ));
            }
            let dx0 = (fx * j11 - fy * j01) / det;
            let dr = (fy * j00 - fx * j10) / det;
            // keep the iterate inside the cylinder
            x = (x.0 - dx0, (x.1 - dr).clamp(1e-6, self.a));
        }
        Err(Error::Numerical("coordinate inverse did not converge".into()))
    }

    /// Defect report over a probe grid. `horizons` optionally provides the
    /// two horizon radii for the horizon-to-horizon check.
    pub fn defects(
        &self,
        x0_range: (f64, f64),
        r_min: f64,
        n: usize,
        pulse: &ProbePulse,
        horizons: Option<(f64, f64)>,
    ) -> Result<IsometryReport> {
        let n = n.max(3);
        let mut boundary_defect = 0.0f64;
        let mut pullback_defect = 0.0f64;
        for i in 0..n {
            let x0 = x0_range.0 + (x0_range.1 - x0_range.0) * i as f64 / (n - 1) as f64;
            // boundary fixed point
            let s = self.map(x0, self.a * (1.0 - 1e-12))?;
            boundary_defect = boundary_defect
                .max((s.0 - x0).abs() + (s.1 - self.a).abs());
            // interior pullback of the ingoing solution
            for j in 1..n {
                let r = r_min + (self.a - r_min) * j as f64 / n as f64;
                let s = self.map(x0, r)?;
                let u = pulse.value(char_point(self.g, self.a, x0, r)?.phi1 - self.a);
                let u1 = pulse.value(char_point(self.g1, self.a, s.0, s.1)?.phi1 - self.a);
                pullback_defect = pullback_defect.max((u1 - u).abs());
            }
        }
        let mut horizon_defects = Vec::new();
        if let Some((rh, rh1)) = horizons {
            for &delta in &[0.2, 0.1, 0.05] {
                let s = self.map(0.5 * (x0_range.0 + x0_range.1), rh + delta)?;
                horizon_defects.push((delta, (s.1 - rh1).abs()));
            }
        }
        Ok(IsometryReport {
            boundary_defect,
            pullback_defect,
            horizon_defects,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TimeProfile;
    use std::sync::Arc;

    fn acoustic(a: f64) -> RadialMetric {
        RadialMetric::acoustic(TimeProfile::constant(a))
    }

    #[test]
    fn minkowski_char_coords_closed_form() {
        let m = RadialMetric::minkowski();
        let a = 5.0;
        for &(x0, r) in &[(0.0, 3.0), (1.5, 4.2), (-2.0, 0.5)] {
            let p = char_point(&m, a, x0, r).unwrap();
            assert!((p.phi1 - (x0 + r)).abs() < 1e-9, "phi1 {}", p.phi1);
            assert!((p.phi2 - (r - x0)).abs() < 1e-9, "phi2 {}", p.phi2);
            let (y0, y1) = p.y();
            assert!((y0 - x0).abs() < 1e-9);
            assert!((y1 - r).abs() < 1e-9);
            assert!((p.jacobian() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn boundary_identity_is_exact() {
        let m = acoustic(-1.0);
        let a = 5.0;
        for &x0 in &[-3.0, 0.0, 7.0] {
            let p = char_point(&m, a, x0, a).unwrap();
            assert_eq!(p.phi1, x0 + a);
            assert_eq!(p.phi2, -x0 + a);
            let (y0, y1) = p.y();
            assert_eq!(y0, x0);
            assert_eq!(y1, a);
        }
    }

    #[test]
    fn black_hole_coords_are_null_on_mesh() {
        let m = acoustic(-1.0);
        let c = build_char_coords(&m, 5.0, (-2.0, 2.0), 1.3, 9, 9).unwrap();
        assert!(c.nullity_residual < 1e-7, "residual {}", c.nullity_residual);
        assert!(c.jacobian_min > 1e-3);
    }

    #[test]
    fn dalembert_constant_on_characteristics() {
        let f = ProbePulse::new(0.0, 0.5).unwrap();
        let a = 5.0;
        let v1 = dalembert_solve(&f, a, 1.0, 4.0);
        let v2 = dalembert_solve(&f, a, 2.0, 3.0);
        assert_eq!(v1, v2);
        assert_eq!(dalembert_solve(&f, a, 0.0, a), f.value(0.0));
    }

    #[test]
    fn characteristic_dn_is_f_prime() {
        // the boundary trace of the ingoing solution reproduces f' for any
        // metric under the two-dimensional weight; check two metrics
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let a = 5.0;
        let times: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
        for m in [RadialMetric::minkowski(), acoustic(-1.0)] {
            let tr = dn_characteristic(&m, &f, a, &times, 1e-3).unwrap();
            for (i, &t) in times.iter().enumerate() {
                let want = f.derivative(t);
                assert!(
                    (tr.lambda[i] - want).abs() < 5e-5,
                    "t={t}: {} vs {want}",
                    tr.lambda[i]
                );
            }
        }
    }

    #[test]
    fn characteristic_dn_causality_is_exact() {
        let f = ProbePulse::new(0.0, 0.5).unwrap();
        let m = acoustic(-1.0);
        let times: Vec<f64> = (0..10).map(|i| f.support().0 - 1.0 - i as f64).collect();
        let tr = dn_characteristic(&m, &f, 5.0, &times, 1e-3).unwrap();
        for &l in &tr.lambda {
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn direct_dn_matches_f_prime_minkowski() {
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let m = RadialMetric::minkowski();
        let rep = dn_direct(&m, &f, 5.0, 6.0, &DirectOpts::default()).unwrap();
        let mut err = 0.0f64;
        for (i, &t) in rep.trace.x0.iter().enumerate() {
            err = err.max((rep.trace.lambda[i] - f.derivative(t)).abs());
        }
        assert!(err < 2e-3, "max error {err}");
    }

    #[test]
    fn direct_dn_second_order_convergence() {
        // under the flat two-dimensional weight the scheme reproduces the
        // Minkowski trace exactly (the characteristic variables decouple
        // bit-for-bit), so the order is measured with the r^2 weight where
        // the exact trace is f' - f/a
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let m = RadialMetric::minkowski();
        let a = 5.0;
        let mut errs = Vec::new();
        for &cells in &[64usize, 128, 256] {
            let rep = dn_direct(
                &m,
                &f,
                a,
                6.0,
                &DirectOpts {
                    cells,
                    area_power: 2.0,
                    ..Default::default()
                },
            )
            .unwrap();
            let mut err = 0.0f64;
            for (i, &t) in rep.trace.x0.iter().enumerate() {
                err = err.max((rep.trace.lambda[i] - (f.derivative(t) - f.value(t) / a)).abs());
            }
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(
            order1 > 1.5 && order2 > 1.5,
            "orders {order1:.2}, {order2:.2} from {errs:?}"
        );
    }

    #[test]
    fn direct_matches_characteristic_for_black_hole() {
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let m = acoustic(-1.0);
        let rep = dn_direct(
            &m,
            &f,
            5.0,
            6.0,
            &DirectOpts {
                cells: 256,
                ..Default::default()
            },
        )
        .unwrap();
        let times: Vec<f64> = (0..=40).map(|i| -4.0 + 0.25 * i as f64).collect();
        let ch = dn_characteristic(&m, &f, 5.0, &times, 1e-3).unwrap();
        let mut diff = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            if let Some(l) = rep.trace.lambda_at(t) {
                diff = diff.max((l - ch.lambda[i]).abs());
            }
        }
        assert!(diff < 5e-3, "cross-method diff {diff}");
    }

    #[test]
    fn white_hole_interior_stays_zero() {
        // b1 > 0: the ingoing signal stalls at the white-hole boundary and
        // the interior r < R- never sees it
        // the signal piles up against the stalled characteristic, so the
        // discrete leak is set by grid diffusion: small, and shrinking
        // under refinement
        let f = ProbePulse::new(0.0, 0.5).unwrap();
        let m = acoustic(1.0);
        let mut leaks = Vec::new();
        for &cells in &[100usize, 400] {
            let rep = dn_direct(
                &m,
                &f,
                5.0,
                8.0,
                &DirectOpts {
                    cells,
                    watch_below: Some(0.9),
                    ..Default::default()
                },
            )
            .unwrap();
            leaks.push(rep.max_state_watched);
        }
        assert!(leaks[1] < 0.5 * leaks[0], "leaks {leaks:?}");
        assert!(leaks[1] < 0.05, "leaks {leaks:?}");
    }

    #[test]
    fn direct_dn_is_linear() {
        let m = acoustic(-1.0);
        let f1 = ProbePulse::new(0.0, 0.6).unwrap();
        let f2 = ProbePulse::new(0.5, 0.8).unwrap();
        // alpha f1 with alpha = 2 via doubling is implicit in linear schemes;
        // verify additivity through superposed runs is not possible with a
        // single-pulse API, so check scaling through the trace itself:
        // lambda depends linearly on f because the scheme is linear with
        // zero initial data. Probe: time-shift invariance for stationary
        // metrics instead.
        let r1 = dn_direct(&m, &f1, 5.0, 6.0, &DirectOpts::default()).unwrap();
        let shifted = ProbePulse::new(1.0, 0.6).unwrap();
        let r2 = dn_direct(&m, &shifted, 5.0, 7.0, &DirectOpts::default()).unwrap();
        let mut diff = 0.0f64;
        for t in [-1.0f64, -0.5, 0.0, 0.5, 1.0] {
            let a = r1.trace.lambda_at(t).unwrap();
            let b = r2.trace.lambda_at(t + 1.0).unwrap();
            diff = diff.max((a - b).abs());
        }
        assert!(diff < 1e-4, "shift defect {diff}");
        let _ = f2;
    }

    #[test]
    fn minkowski_three_dimensional_weight_oracle() {
        // with the r^2 volume weight the ingoing solution is (a/r) f(...),
        // whose trace is f' - f/a
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let m = RadialMetric::minkowski();
        let a = 5.0;
        let rep = dn_direct(
            &m,
            &f,
            a,
            6.0,
            &DirectOpts {
                cells: 256,
                area_power: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        let mut err = 0.0f64;
        for (i, &t) in rep.trace.x0.iter().enumerate() {
            let want = f.derivative(t) - f.value(t) / a;
            err = err.max((rep.trace.lambda[i] - want).abs());
        }
        assert!(err < 2e-3, "max error {err}");
    }

    #[test]
    fn identity_isometry() {
        let m = acoustic(-1.0);
        let f = ProbePulse::new(0.0, 0.5).unwrap();
        let iso = IsometryMap::new(&m, &m, 5.0);
        let rep = iso.defects((-1.0, 1.0), 1.5, 5, &f, Some((1.0, 1.0))).unwrap();
        assert!(rep.boundary_defect < 1e-8, "{rep:?}");
        assert!(rep.pullback_defect < 1e-8, "{rep:?}");
        // probes at offset delta from one horizon land within O(delta) of
        // the other, shrinking with the offset
        for (delta, d) in &rep.horizon_defects {
            assert!(*d <= 1.5 * delta, "{rep:?}");
        }
        let ds: Vec<f64> = rep.horizon_defects.iter().map(|p| p.1).collect();
        assert!(ds[2] < ds[0], "{rep:?}");
    }

    #[test]
    fn diffeomorphic_pullback_isometry() {
        // g1 is Minkowski written in the stretched coordinate
        // r = psi(r') with psi(r') = r' + 0.2 r' (a - r')/a; then
        // g1^{r'r'} = g^{rr}(psi) / psi'^2 and sigma should be
        // (x0, psi^{-1}(r)) -- checked through the defect report
        let a = 5.0;
        let psi = move |rp: f64| rp + 0.2 * rp * (a - rp) / a;
        let dpsi = move |rp: f64| 1.0 + 0.2 * (a - 2.0 * rp) / a;
        let g = RadialMetric::minkowski();
        let g1 = RadialMetric::custom(
            Arc::new(|_, _| 1.0),
            Arc::new(|_, _| 0.0),
            Arc::new(move |_x0, rp| -1.0 / (dpsi(rp) * dpsi(rp))),
            TimeProfile::constant(0.0),
        );
        let f = ProbePulse::new(0.0, 0.5).unwrap();
        let iso = IsometryMap::new(&g, &g1, a);
        let rep = iso.defects((-1.0, 1.0), 1.0, 5, &f, None).unwrap();
        assert!(rep.boundary_defect < 1e-7, "{rep:?}");
        assert!(rep.pullback_defect < 1e-6, "{rep:?}");
        // spot-check the known diffeomorphism: sigma(x0, psi(2)) = (x0, 2)
        let s = iso.map(0.3, psi(2.0)).unwrap();
        assert!((s.0 - 0.3).abs() < 1e-7, "{s:?}");
        assert!((s.1 - 2.0).abs() < 1e-7, "{s:?}");
    }

    #[test]
    fn deeper_flows_have_distinguishable_dn_under_physical_weight() {
        // under the two-dimensional weight every black-hole flow returns
        // exactly f'; the r^2 weight breaks the degeneracy
        let f = ProbePulse::new(0.0, 0.6).unwrap();
        let opts = DirectOpts {
            cells: 192,
            area_power: 2.0,
            ..Default::default()
        };
        let r1 = dn_direct(&acoustic(-1.0), &f, 5.0, 6.0, &opts).unwrap();
        let r2 = dn_direct(&acoustic(-1.5), &f, 5.0, 6.0, &opts).unwrap();
        let mut diff = 0.0f64;
        for t in [-1.0f64, 0.0, 1.0, 2.0] {
            let a = r1.trace.lambda_at(t).unwrap();
            let b = r2.trace.lambda_at(t).unwrap();
            diff = diff.max((a - b).abs());
        }
        assert!(diff > 1e-3, "traces indistinguishable: {diff}");
    }
}
