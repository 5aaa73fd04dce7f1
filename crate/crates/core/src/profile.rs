//! Scalar time profiles A(x0) with derivative access and limits at infinity.

use crate::error::{Error, Result};

/// A C^1 function of the time variable with finite limits at both infinities.
///
/// All flow profiles used by the metric families are expressed through this
/// type so that downstream code can query values, derivatives and asymptotic
/// limits uniformly.
#[derive(Clone, Debug)]
pub enum TimeProfile {
    /// A(x0) = value.
    Constant(f64),
    /// A(x0) = base + amplitude * tanh((x0 - center) / width), width > 0.
    TanhRamp {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// A(x0) = base + amplitude / (1 + ((x0 - center) / width)^2), width > 0.
    RationalBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Clamped cubic spline through sorted (x0, value) pairs, constant outside
    /// the table with zero end slopes so the splice stays C^1.
    Tabulated(CubicTable),
}

impl TimeProfile {
    pub fn constant(value: f64) -> Self {
        TimeProfile::Constant(value)
    }

    pub fn tanh_ramp(base: f64, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidArgument("tanh-ramp width must be > 0".into()));
        }
        Ok(TimeProfile::TanhRamp {
            base,
            amplitude,
            center,
            width,
        })
    }

    pub fn rational_bump(base: f64, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidArgument(
                "rational-bump width must be > 0".into(),
            ));
        }
        Ok(TimeProfile::RationalBump {
            base,
            amplitude,
            center,
            width,
        })
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        Ok(TimeProfile::Tabulated(CubicTable::new(points)?))
    }

    pub fn value(&self, x0: f64) -> f64 {
        match self {
            TimeProfile::Constant(v) => *v,
            TimeProfile::TanhRamp {
                base,
                amplitude,
                center,
                width,
            } => base + amplitude * ((x0 - center) / width).tanh(),
            TimeProfile::RationalBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let u = (x0 - center) / width;
                base + amplitude / (1.0 + u * u)
            }
            TimeProfile::Tabulated(t) => t.value(x0),
        }
    }

    pub fn derivative(&self, x0: f64) -> f64 {
        match self {
            TimeProfile::Constant(_) => 0.0,
            TimeProfile::TanhRamp {
                amplitude, center, width, ..
            } => {
                let u = (x0 - center) / width;
                let c = u.cosh();
                amplitude / (width * c * c)
            }
            TimeProfile::RationalBump {
                amplitude, center, width, ..
            } => {
                let u = (x0 - center) / width;
                let d = 1.0 + u * u;
                -2.0 * amplitude * u / (width * d * d)
            }
            TimeProfile::Tabulated(t) => t.derivative(x0),
        }
    }

    /// Limit as x0 -> -inf.
    pub fn limit_neg_inf(&self) -> f64 {
        match self {
            TimeProfile::Constant(v) => *v,
            TimeProfile::TanhRamp { base, amplitude, .. } => base - amplitude,
            TimeProfile::RationalBump { base, .. } => *base,
            TimeProfile::Tabulated(t) => t.first_value(),
        }
    }

    /// Limit as x0 -> +inf.
    pub fn limit_pos_inf(&self) -> f64 {
        match self {
            TimeProfile::Constant(v) => *v,
            TimeProfile::TanhRamp { base, amplitude, .. } => base + amplitude,
            TimeProfile::RationalBump { base, .. } => *base,
            TimeProfile::Tabulated(t) => t.last_value(),
        }
    }
}

/// Clamped cubic spline table (zero first derivative at both ends).
#[derive(Clone, Debug)]
pub struct CubicTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    y2: Vec<f64>,
}

impl CubicTable {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated profile needs at least 2 points".into(),
            ));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut ys = Vec::with_capacity(points.len());
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidArgument("non-finite table entry".into()));
            }
            if let Some(&last) = xs.last() {
                if x <= last {
                    return Err(Error::InvalidArgument(
                        "table abscissae must be strictly increasing".into(),
                    ));
                }
            }
            xs.push(x);
            ys.push(y);
        }
        let y2 = Self::solve_second_derivatives(&xs, &ys);
        Ok(CubicTable { xs, ys, y2 })
    }

    /// Tridiagonal solve for the spline second derivatives with clamped
    /// (zero-slope) boundary conditions.
    fn solve_second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let n = xs.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];

        // Clamped start: y'(x_0) = 0.
        y2[0] = -0.5;
        u[0] = (3.0 / (xs[1] - xs[0])) * ((ys[1] - ys[0]) / (xs[1] - xs[0]));

        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let du = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * du / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }

        // Clamped end: y'(x_{n-1}) = 0.
        let qn = 0.5;
        let un = (3.0 / (xs[n - 1] - xs[n - 2]))
            * (-(ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]));
        y2[n - 1] = (un - qn * u[n - 2]) / (qn * y2[n - 2] + 1.0);
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        y2
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite"))
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.y2[i + 1] - (3.0 * a * a - 1.0) * self.y2[i]) * h / 6.0
    }

    pub fn first_value(&self) -> f64 {
        self.ys[0]
    }

    pub fn last_value(&self) -> f64 {
        *self.ys.last().unwrap()
    }
}
