//! Adaptive Dormand-Prince 5(4) integrator with event location.
//!
//! Small fixed-purpose integrator: dense enough for event refinement via
//! cubic Hermite interpolation, supports backward integration by negating
//! the independent variable internally.

use crate::error::{Error, Result};

pub const DEFAULT_ATOL: f64 = 1e-10;
pub const DEFAULT_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct OdeOpts {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts {
            atol: DEFAULT_ATOL,
            rtol: DEFAULT_RTOL,
            h_init: 1e-4,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Reached the end of the requested interval.
    EndOfInterval,
    /// An event function crossed zero; index stored.
    Event(usize),
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    /// Independent variable at accepted steps (monotone in the direction of
    /// integration).
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub stop: StopReason,
}

impl OdeSolution {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.t.last().unwrap(), self.y.last().unwrap())
    }
}

/// Event: integration stops when the function crosses zero in the given
/// direction (-1 falling, +1 rising, 0 either).
pub struct Event<'a> {
    pub f: &'a dyn Fn(f64, &[f64]) -> f64,
    pub direction: i8,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrate dy/dt = f(t, y) from t0 to t_end (either direction).
///
/// `samples`, if given, must be monotone from t0 toward t_end; the solution
/// is additionally interpolated onto those points (they are appended in
/// order to the output arrays interleaved with accepted steps).
pub fn integrate(
    f: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    events: &[Event<'_>],
    samples: Option<&[f64]>,
    opts: &OdeOpts,
) -> Result<OdeSolution> {
    if t0 == t_end {
        return Ok(OdeSolution {
            t: vec![t0],
            y: vec![y0.to_vec()],
            stop: StopReason::EndOfInterval,
        });
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs()) * dir;

    let mut out_t = vec![t0];
    let mut out_y = vec![y.clone()];
    let mut ev_prev: Vec<f64> = events.iter().map(|e| (e.f)(t, &y)).collect();
    let mut sample_idx = 0usize;

    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        if (t_end - t) * dir <= 0.0 {
            return Ok(OdeSolution {
                t: out_t,
                y: out_y,
                stop: StopReason::EndOfInterval,
            });
        }
        if ((t + h) - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(Error::StepSizeCollapse { x0: t, r: y[0] });
        }

        // stage evaluations
        let mut yt = vec![0.0; n];
        for i in 0..n {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + 0.2 * h, &yt);
        for i in 0..n {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + 0.3 * h, &yt);
        for i in 0..n {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + 0.8 * h, &yt);
        for i in 0..n {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + 8.0 / 9.0 * h, &yt);
        for i in 0..n {
            yt[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + h, &yt);
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(t + h, &y_new);

        // error estimate against the embedded 4th-order solution
        let mut err = 0.0f64;
        for i in 0..n {
            let y4 = y[i]
                + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let e = (y_new[i] - y4) / sc;
            err += e * e;
        }
        err = (err / n as f64).sqrt();

        if err > 1.0 {
            // reject; shrink
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
            continue;
        }

        let t_new = t + h;

        // events on [t, t_new]; Hermite refinement
        let mut hit: Option<(usize, f64, Vec<f64>)> = None;
        for (ei, ev) in events.iter().enumerate() {
            let g0 = ev_prev[ei];
            let g1 = (ev.f)(t_new, &y_new);
            let crossing = match ev.direction {
                1 => g0 < 0.0 && g1 >= 0.0,
                -1 => g0 > 0.0 && g1 <= 0.0,
                _ => g0 * g1 < 0.0 || (g0 != 0.0 && g1 == 0.0),
            };
            if crossing {
                let (te, ye) = refine_event(ev, t, &y, &k1, t_new, &y_new, &k7, h);
                let better = match &hit {
                    Some((_, tb, _)) => (te - *tb) * dir < 0.0,
                    None => true,
                };
                if better {
                    hit = Some((ei, te, ye));
                }
            }
            ev_prev[ei] = g1;
        }

        // requested sample points inside the accepted step
        if let Some(sm) = samples {
            let t_stop = hit.as_ref().map(|(_, te, _)| *te).unwrap_or(t_new);
            while sample_idx < sm.len() && (sm[sample_idx] - t_stop) * dir <= 0.0 {
                let ts = sm[sample_idx];
                if (ts - t) * dir > 0.0 {
                    let ys = hermite(t, &y, &k1, t_new, &y_new, &k7, h, ts);
                    out_t.push(ts);
                    out_y.push(ys);
                }
                sample_idx += 1;
            }
        }

        if let Some((ei, te, ye)) = hit {
            out_t.push(te);
            out_y.push(ye);
            return Ok(OdeSolution {
                t: out_t,
                y: out_y,
                stop: StopReason::Event(ei),
            });
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        out_t.push(t);
        out_y.push(y.clone());

        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).clamp(-opts.h_max, opts.h_max);
        if h == 0.0 {
            h = 1e-15 * dir;
        }
    }
}

/// Cubic Hermite interpolation of the state inside one accepted step.
#[allow(clippy::too_many_arguments)]
fn hermite(
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t1: f64,
    y1: &[f64],
    f1: &[f64],
    h: f64,
    ts: f64,
) -> Vec<f64> {
    let s = (ts - t0) / (t1 - t0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
        .collect()
}

/// Bisection on the Hermite interpolant to locate the event time.
#[allow(clippy::too_many_arguments)]
fn refine_event(
    ev: &Event<'_>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t1: f64,
    y1: &[f64],
    f1: &[f64],
    h: f64,
) -> (f64, Vec<f64>) {
    let mut lo = t0;
    let mut hi = t1;
    let g_lo = (ev.f)(t0, y0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let ym = hermite(t0, y0, f0, t1, y1, f1, h, mid);
        let gm = (ev.f)(mid, &ym);
        if gm == 0.0 {
            return (mid, ym);
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < 1e-14 * (1.0 + t0.abs().max(t1.abs())) {
            break;
        }
    }
    let te = 0.5 * (lo + hi);
    let ye = hermite(t0, y0, f0, t1, y1, f1, h, te);
    (te, ye)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64]| vec![-y[0]];
        let sol = integrate(&f, 0.0, &[1.0], 5.0, &[], None, &OdeOpts::default()).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let f = |_t: f64, y: &[f64]| vec![y[1], -y[0]];
        let sol = integrate(&f, 0.0, &[1.0, 0.0], 20.0, &[], None, &OdeOpts::default()).unwrap();
        let (_, y) = sol.last();
        let e = y[0] * y[0] + y[1] * y[1];
        assert!((e - 1.0).abs() < 1e-6);
        assert!((y[0] - (20.0f64).cos()).abs() < 1e-6);
    }

    #[test]
    fn backward_integration() {
        let f = |_t: f64, y: &[f64]| vec![y[0]];
        let sol = integrate(&f, 0.0, &[1.0], -3.0, &[], None, &OdeOpts::default()).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, -3.0);
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn event_location() {
        // y' = 1, event at y = 2.5 starting from y = 0
        let f = |_t: f64, _y: &[f64]| vec![1.0];
        let g = |_t: f64, y: &[f64]| y[0] - 2.5;
        let ev = Event {
            f: &g,
            direction: 1,
        };
        let sol = integrate(&f, 0.0, &[0.0], 10.0, &[ev], None, &OdeOpts::default()).unwrap();
        assert_eq!(sol.stop, StopReason::Event(0));
        let (t, _) = sol.last();
        assert!((t - 2.5).abs() < 1e-10);
    }

    #[test]
    fn event_on_nonlinear_trajectory() {
        // y = sin t crosses 0 falling at t = pi
        let f = |t: f64, _y: &[f64]| vec![t.cos()];
        let g = |_t: f64, y: &[f64]| y[0];
        let ev = Event {
            f: &g,
            direction: -1,
        };
        let sol = integrate(&f, 0.5, &[0.5f64.sin()], 10.0, &[ev], None, &OdeOpts::default())
            .unwrap();
        assert_eq!(sol.stop, StopReason::Event(0));
        let (t, _) = sol.last();
        assert!((t - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn sample_grid_interpolation() {
        let f = |_t: f64, y: &[f64]| vec![-y[0]];
        let grid: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let sol = integrate(&f, 0.0, &[1.0], 3.0, &[], Some(&grid), &OdeOpts::default()).unwrap();
        for &g in &grid {
            let i = sol
                .t
                .iter()
                .position(|&t| (t - g).abs() < 1e-12)
                .unwrap_or_else(|| panic!("missing sample at {g}"));
            assert!((sol.y[i][0] - (-g).exp()).abs() < 1e-7);
        }
    }
}
