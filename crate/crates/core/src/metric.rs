//! Metric families: acoustic flows, general radial metrics and the
//! stationary 2D polar form, plus a sampled validity checker.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::profile::TimeProfile;

/// Scalar field of (x0, r).
pub type Field2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Radially symmetric acoustic flow v = A(x0)/r r^ + B/r theta^.
///
/// The angular component is carried along for completeness; it does not enter
/// the radial characteristic data.
#[derive(Clone)]
pub struct AcousticFlow {
    pub radial: TimeProfile,
    pub angular: Option<f64>,
}

impl AcousticFlow {
    pub fn new(radial: TimeProfile) -> Self {
        AcousticFlow {
            radial,
            angular: None,
        }
    }

    pub fn with_angular(radial: TimeProfile, angular: f64) -> Self {
        AcousticFlow {
            radial,
            angular: Some(angular),
        }
    }
}

/// The inverse-metric triple g^\{00\}, g^\{r0\}, g^\{rr\} as functions of (x0, r),
/// together with the near-origin coefficient b1(x0).
#[derive(Clone)]
pub struct RadialMetric {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    /// g00 = 1, gr0 = A/r, grr = A^2/r^2 - 1.
    Acoustic { profile: TimeProfile },
    Custom {
        g00: Field2,
        gr0: Field2,
        grr: Field2,
        b1: TimeProfile,
    },
}

impl fmt::Debug for RadialMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Acoustic { .. } => write!(f, "RadialMetric::Acoustic"),
            Repr::Custom { .. } => write!(f, "RadialMetric::Custom"),
        }
    }
}

impl RadialMetric {
    /// Minkowski triple (1, 0, -1).
    pub fn minkowski() -> Self {
        RadialMetric::acoustic(TimeProfile::constant(0.0))
    }

    pub fn acoustic(profile: TimeProfile) -> Self {
        RadialMetric {
            repr: Repr::Acoustic { profile },
        }
    }

    pub fn custom(g00: Field2, gr0: Field2, grr: Field2, b1: TimeProfile) -> Self {
        RadialMetric {
            repr: Repr::Custom { g00, gr0, grr, b1 },
        }
    }

    pub fn g00(&self, x0: f64, r: f64) -> f64 {
        match &self.repr {
            Repr::Acoustic { .. } => 1.0,
            Repr::Custom { g00, .. } => g00(x0, r),
        }
    }

    pub fn gr0(&self, x0: f64, r: f64) -> f64 {
        match &self.repr {
            Repr::Acoustic { profile } => profile.value(x0) / r,
            Repr::Custom { gr0, .. } => gr0(x0, r),
        }
    }

    pub fn grr(&self, x0: f64, r: f64) -> f64 {
        match &self.repr {
            Repr::Acoustic { profile } => {
                let a = profile.value(x0);
                a * a / (r * r) - 1.0
            }
            Repr::Custom { grr, .. } => grr(x0, r),
        }
    }

    /// Characteristic discriminant (g^\{r0\})^2 - g^\{00\} g^\{rr\}; must stay > 0.
    pub fn q(&self, x0: f64, r: f64) -> f64 {
        match &self.repr {
            // exactly 1 for acoustic metrics, avoid cancellation
            Repr::Acoustic { .. } => 1.0,
            Repr::Custom { .. } => {
                let gr0 = self.gr0(x0, r);
                gr0 * gr0 - self.g00(x0, r) * self.grr(x0, r)
            }
        }
    }

    /// Near-origin coefficient: gr0 ~ b1(x0)/r as r -> 0.
    pub fn b1(&self, x0: f64) -> f64 {
        match &self.repr {
            Repr::Acoustic { profile } => profile.value(x0),
            Repr::Custom { b1, .. } => b1.value(x0),
        }
    }

    /// The underlying flow profile when the metric is acoustic.
    pub fn acoustic_profile(&self) -> Option<&TimeProfile> {
        match &self.repr {
            Repr::Acoustic { profile } => Some(profile),
            Repr::Custom { .. } => None,
        }
    }

    pub fn b1_profile(&self) -> &TimeProfile {
        match &self.repr {
            Repr::Acoustic { profile } => profile,
            Repr::Custom { b1, .. } => b1,
        }
    }

    pub fn is_acoustic(&self) -> bool {
        matches!(self.repr, Repr::Acoustic { .. })
    }
}

/// Acoustic flow -> radial metric triple.
///
/// Only the radial component of the flow enters; the angular part drops out
/// of the radial characteristic equation.
pub fn acoustic_to_radial(flow: &AcousticFlow) -> RadialMetric {
    RadialMetric::acoustic(flow.radial.clone())
}

/// Bounded window in the (x0, r) half-plane, r > 0.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub x0_min: f64,
    pub x0_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Window {
    pub fn new(x0_min: f64, x0_max: f64, r_min: f64, r_max: f64) -> Result<Self> {
        if !(x0_min < x0_max && r_min < r_max) {
            return Err(Error::InvalidArgument("empty window".into()));
        }
        Ok(Window {
            x0_min,
            x0_max,
            r_min,
            r_max,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Positivity,
    Hyperbolicity,
    FarFieldAsymptotics,
    NearOriginStructure,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x0: f64,
    pub r: f64,
    /// How far past the constraint the sample sits (positive = violation size).
    pub margin: f64,
    pub detail: String,
}

/// Result of sampling the metric invariants over a window.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Observed infimum of g00 over the window.
    pub min_g00: f64,
    /// Observed infimum of the discriminant over the window.
    pub min_q: f64,
    pub grid: (usize, usize),
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ValidateOpts {
    /// Grid resolution (x0 x r). Refinements that double the interval count
    /// reuse every coarse sample point.
    pub grid: (usize, usize),
    /// Far-field check window is [r_far, 10 r_far].
    pub r_far: f64,
    /// Growth factor above which a ratio bound counts as violated.
    pub growth_factor: f64,
}

impl Default for ValidateOpts {
    fn default() -> Self {
        ValidateOpts {
            grid: (200, 200),
            r_far: 50.0,
            growth_factor: 3.0,
        }
    }
}

/// Sample the four radial-metric invariants over a window.
///
/// Positivity of g00 and of the discriminant are checked pointwise on the
/// grid. The O(1/r) far-field decay and the near-origin structure are
/// asymptotic statements; they are checked as growth-ratio bounds on a
/// declared far-field band and on a pair of small radii.
pub fn validate(metric: &RadialMetric, window: &Window, opts: &ValidateOpts) -> Result<ValidationReport> {
    if window.r_min <= 0.0 {
        return Err(Error::InvalidArgument(
            "validation window must not touch r = 0; near-origin checks use the asymptotic form"
                .into(),
        ));
    }
    let (nx, nr) = opts.grid;
    let mut violations = Vec::new();
    let mut min_g00 = f64::INFINITY;
    let mut min_q = f64::INFINITY;

    for i in 0..=nx {
        let x0 = window.x0_min + (window.x0_max - window.x0_min) * i as f64 / nx as f64;
        for j in 0..=nr {
            let r = window.r_min + (window.r_max - window.r_min) * j as f64 / nr as f64;
            let g00 = metric.g00(x0, r);
            let q = metric.q(x0, r);
            min_g00 = min_g00.min(g00);
            min_q = min_q.min(q);
            if g00 <= 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::Positivity,
                    x0,
                    r,
                    margin: -g00,
                    detail: format!("g00 = {g00} <= 0"),
                });
            }
            if q <= 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::Hyperbolicity,
                    x0,
                    r,
                    margin: -q,
                    detail: format!("(gr0)^2 - g00*grr = {q} <= 0"),
                });
            }
        }
    }

    // Far field: r*|g00-1|, r*|gr0|, r*|grr+1| must not grow across
    // [r_far, 10 r_far].
    let x0_probe: Vec<f64> = (0..=8)
        .map(|i| window.x0_min + (window.x0_max - window.x0_min) * i as f64 / 8.0)
        .collect();
    let far_ratio = |r: f64| -> [f64; 3] {
        let mut m = [0.0f64; 3];
        for &x0 in &x0_probe {
            m[0] = m[0].max(r * (metric.g00(x0, r) - 1.0).abs());
            m[1] = m[1].max(r * metric.gr0(x0, r).abs());
            m[2] = m[2].max(r * (metric.grr(x0, r) + 1.0).abs());
        }
        m
    };
    let near = far_ratio(opts.r_far);
    let far = far_ratio(10.0 * opts.r_far);
    let names = ["g00 - 1", "gr0", "grr + 1"];
    for k in 0..3 {
        if far[k] > opts.growth_factor * near[k] + 1e-9 {
            violations.push(Violation {
                kind: ViolationKind::FarFieldAsymptotics,
                x0: window.x0_min,
                r: 10.0 * opts.r_far,
                margin: far[k] - opts.growth_factor * near[k],
                detail: format!(
                    "r*|{}| grows from {:.3e} at r={} to {:.3e} at r={}",
                    names[k],
                    near[k],
                    opts.r_far,
                    far[k],
                    10.0 * opts.r_far
                ),
            });
        }
    }

    // Near origin: gr0*r - b1 = O(r^3), g00 - 1 = O(r^3), grr - b1^2/r^2 <= -C0.
    let r_small = [1e-2, 5e-3];
    for &x0 in &x0_probe {
        let b1 = metric.b1(x0);
        let ratio = |r: f64| -> [f64; 2] {
            [
                (metric.gr0(x0, r) * r - b1).abs() / (r * r * r),
                (metric.g00(x0, r) - 1.0).abs() / (r * r * r),
            ]
        };
        let u1 = ratio(r_small[0]);
        let u2 = ratio(r_small[1]);
        let names = ["gr0*r - b1", "g00 - 1"];
        for k in 0..2 {
            if u2[k] > opts.growth_factor * u1[k] + 1e-9 {
                violations.push(Violation {
                    kind: ViolationKind::NearOriginStructure,
                    x0,
                    r: r_small[1],
                    margin: u2[k] - opts.growth_factor * u1[k],
                    detail: format!("|{}|/r^3 grows as r -> 0", names[k]),
                });
            }
        }
        for &r in &r_small {
            let g2rr = metric.grr(x0, r) - b1 * b1 / (r * r);
            if g2rr >= 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::NearOriginStructure,
                    x0,
                    r,
                    margin: g2rr,
                    detail: format!("grr - b1^2/r^2 = {g2rr} not strictly negative"),
                });
            }
        }
    }

    Ok(ValidationReport {
        violations,
        min_g00,
        min_q,
        grid: (nx, nr),
    })
}

/// Components of the stationary 2D inverse metric in polar form. The angular
/// slots pair with xi_theta / r, i.e. an orthonormal angular frame.
#[derive(Clone, Copy, Debug)]
pub struct PolarComps {
    pub g00: f64,
    pub gr0: f64,
    pub gt0: f64,
    pub grr: f64,
    pub grt: f64,
    pub gtt: f64,
}

/// Stationary 2D metric in polar coordinates with an acoustic-type
/// singularity at the origin.
#[derive(Clone)]
pub struct PolarMetric2D {
    repr: PolarRepr,
}

type PolarField = Arc<dyn Fn(f64, f64) -> PolarComps + Send + Sync>;
type ThetaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PolarRepr {
    /// Constant-coefficient acoustic flow v = A/r r^ + B/r theta^.
    AcousticConst { a: f64, b: f64 },
    Custom {
        comps: PolarField,
        b1: ThetaFn,
        b2: ThetaFn,
    },
}

impl fmt::Debug for PolarMetric2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            PolarRepr::AcousticConst { a, b } => {
                write!(f, "PolarMetric2D::AcousticConst(A={a}, B={b})")
            }
            PolarRepr::Custom { .. } => write!(f, "PolarMetric2D::Custom"),
        }
    }
}

impl PolarMetric2D {
    pub fn acoustic_const(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 {
            return Err(Error::InvalidArgument(
                "acoustic polar metric requires A != 0 (b1 must not vanish)".into(),
            ));
        }
        Ok(PolarMetric2D {
            repr: PolarRepr::AcousticConst { a, b },
        })
    }

    pub fn custom(comps: PolarField, b1: ThetaFn, b2: ThetaFn) -> Self {
        PolarMetric2D {
            repr: PolarRepr::Custom { comps, b1, b2 },
        }
    }

    pub fn comps(&self, r: f64, theta: f64) -> PolarComps {
        match &self.repr {
            PolarRepr::AcousticConst { a, b } => {
                let r2 = r * r;
                PolarComps {
                    g00: 1.0,
                    gr0: a / r,
                    gt0: b / r,
                    grr: a * a / r2 - 1.0,
                    grt: a * b / r2,
                    gtt: b * b / r2 - 1.0,
                }
            }
            PolarRepr::Custom { comps, .. } => comps(r, theta),
        }
    }

    pub fn d_comps_dr(&self, r: f64, theta: f64) -> PolarComps {
        match &self.repr {
            PolarRepr::AcousticConst { a, b } => {
                let r2 = r * r;
                let r3 = r2 * r;
                PolarComps {
                    g00: 0.0,
                    gr0: -a / r2,
                    gt0: -b / r2,
                    grr: -2.0 * a * a / r3,
                    grt: -2.0 * a * b / r3,
                    gtt: -2.0 * b * b / r3,
                }
            }
            PolarRepr::Custom { comps, .. } => {
                let h = 1e-6 * (1.0 + r.abs());
                let p = comps(r + h, theta);
                let m = comps(r - h, theta);
                diff_comps(&p, &m, 2.0 * h)
            }
        }
    }

    pub fn d_comps_dtheta(&self, r: f64, theta: f64) -> PolarComps {
        match &self.repr {
            PolarRepr::AcousticConst { .. } => PolarComps {
                g00: 0.0,
                gr0: 0.0,
                gt0: 0.0,
                grr: 0.0,
                grt: 0.0,
                gtt: 0.0,
            },
            PolarRepr::Custom { comps, .. } => {
                let h = 1e-6;
                let p = comps(r, theta + h);
                let m = comps(r, theta - h);
                diff_comps(&p, &m, 2.0 * h)
            }
        }
    }

    pub fn b1(&self, theta: f64) -> f64 {
        match &self.repr {
            PolarRepr::AcousticConst { a, .. } => *a,
            PolarRepr::Custom { b1, .. } => b1(theta),
        }
    }

    pub fn b2(&self, theta: f64) -> f64 {
        match &self.repr {
            PolarRepr::AcousticConst { b, .. } => *b,
            PolarRepr::Custom { b2, .. } => b2(theta),
        }
    }

    /// Spatial discriminant Delta = grr*gtt - grt^2 (orthonormal frame);
    /// negative inside the ergoregion, zero on the ergosphere.
    pub fn delta(&self, r: f64, theta: f64) -> f64 {
        match &self.repr {
            // 1 - (A^2+B^2)/r^2 exactly
            PolarRepr::AcousticConst { a, b } => 1.0 - (a * a + b * b) / (r * r),
            PolarRepr::Custom { .. } => {
                let c = self.comps(r, theta);
                c.grr * c.gtt - c.grt * c.grt
            }
        }
    }
}

fn diff_comps(p: &PolarComps, m: &PolarComps, d: f64) -> PolarComps {
    PolarComps {
        g00: (p.g00 - m.g00) / d,
        gr0: (p.gr0 - m.gr0) / d,
        gt0: (p.gt0 - m.gt0) / d,
        grr: (p.grr - m.grr) / d,
        grt: (p.grt - m.grt) / d,
        gtt: (p.gtt - m.gtt) / d,
    }
}

/// Polar form of the constant acoustic flow; checks A != 0.
pub fn acoustic_to_polar2d(a: f64, b: f64) -> Result<PolarMetric2D> {
    PolarMetric2D::acoustic_const(a, b)
}

/// Full inverse-metric sample at a single point, used by the cone-pairing
/// check. Index 0 is the time slot.
#[derive(Clone, Debug)]
pub struct MetricSample {
    pub n: usize,
    /// (n+1)^2 entries, row-major.
    pub inv: Vec<f64>,
}

impl MetricSample {
    pub fn minkowski(n: usize) -> Self {
        let d = n + 1;
        let mut inv = vec![0.0; d * d];
        inv[0] = 1.0;
        for j in 1..d {
            inv[j * d + j] = -1.0;
        }
        MetricSample { n, inv }
    }

    /// Acoustic sample g00 = 1, g^\{j0\} = v_j, g^\{jk\} = -delta + v_j v_k.
    pub fn acoustic(v: &[f64]) -> Self {
        let n = v.len();
        let d = n + 1;
        let mut inv = vec![0.0; d * d];
        inv[0] = 1.0;
        for j in 1..d {
            inv[j] = v[j - 1];
            inv[j * d] = v[j - 1];
            for k in 1..d {
                inv[j * d + k] = v[j - 1] * v[k - 1] - if j == k { 1.0 } else { 0.0 };
            }
        }
        MetricSample { n, inv }
    }

    pub fn custom(n: usize, inv: Vec<f64>) -> Result<Self> {
        if inv.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidArgument("inverse metric size mismatch".into()));
        }
        Ok(MetricSample { n, inv })
    }

    pub fn g00(&self) -> f64 {
        self.inv[0]
    }

    /// Quadratic form of the inverse metric on a covector.
    pub fn inv_form(&self, xi: &[f64]) -> f64 {
        let d = self.n + 1;
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                s += self.inv[j * d + k] * xi[j] * xi[k];
            }
        }
        s
    }

    /// Covariant metric (inverse of `inv`) by Gauss-Jordan elimination.
    pub fn cov(&self) -> Result<Vec<f64>> {
        let d = self.n + 1;
        let mut a = self.inv.clone();
        let mut b = vec![0.0; d * d];
        for i in 0..d {
            b[i * d + i] = 1.0;
        }
        for col in 0..d {
            let mut piv = col;
            for row in col + 1..d {
                if a[row * d + col].abs() > a[piv * d + col].abs() {
                    piv = row;
                }
            }
            if a[piv * d + col].abs() < 1e-14 {
                return Err(Error::InvalidMetric("inverse metric is singular".into()));
            }
            if piv != col {
                for k in 0..d {
                    a.swap(col * d + k, piv * d + k);
                    b.swap(col * d + k, piv * d + k);
                }
            }
            let p = a[col * d + col];
            for k in 0..d {
                a[col * d + k] /= p;
                b[col * d + k] /= p;
            }
            for row in 0..d {
                if row == col {
                    continue;
                }
                let f = a[row * d + col];
                if f != 0.0 {
                    for k in 0..d {
                        a[row * d + k] -= f * a[col * d + k];
                        b[row * d + k] -= f * b[col * d + k];
                    }
                }
            }
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acoustic(a: f64) -> RadialMetric {
        RadialMetric::acoustic(TimeProfile::constant(a))
    }

    #[test]
    fn acoustic_triple_values() {
        let m = acoustic(-1.0);
        assert!((m.gr0(0.0, 2.0) + 0.5).abs() < 1e-15);
        assert!((m.grr(0.0, 2.0) + 0.75).abs() < 1e-15);
        assert_eq!(m.g00(0.0, 2.0), 1.0);
    }

    #[test]
    fn zero_flow_is_minkowski() {
        let m = acoustic(0.0);
        for &(x0, r) in &[(0.0, 1.0), (-3.0, 7.5), (10.0, 0.1)] {
            assert_eq!(m.g00(x0, r), 1.0);
            assert_eq!(m.gr0(x0, r), 0.0);
            assert_eq!(m.grr(x0, r), -1.0);
        }
    }

    #[test]
    fn acoustic_discriminant_is_one() {
        let m = RadialMetric::acoustic(TimeProfile::tanh_ramp(-2.0, 0.5, 0.0, 1.0).unwrap());
        for &(x0, r) in &[(0.0, 0.3), (-5.0, 2.0), (8.0, 40.0)] {
            assert_eq!(m.q(x0, r), 1.0);
            let gr0 = m.gr0(x0, r);
            let explicit = gr0 * gr0 - m.g00(x0, r) * m.grr(x0, r);
            assert!((explicit - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn validate_passes_for_acoustic() {
        let m = acoustic(-1.0);
        let w = Window::new(-5.0, 5.0, 0.1, 10.0).unwrap();
        let rep = validate(&m, &w, &ValidateOpts::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!(rep.min_q >= 1.0 - 1e-12);
    }

    #[test]
    fn validate_rejects_window_touching_origin() {
        let m = acoustic(-1.0);
        let w = Window {
            x0_min: 0.0,
            x0_max: 1.0,
            r_min: 0.0,
            r_max: 1.0,
        };
        assert!(validate(&m, &w, &ValidateOpts::default()).is_err());
    }

    #[test]
    fn validate_flags_hyperbolicity_violation() {
        // grr = +1 breaks (gr0)^2 - g00 grr > 0 at gr0 = 0
        let m = RadialMetric::custom(
            Arc::new(|_, _| 1.0),
            Arc::new(|_, _| 0.0),
            Arc::new(|_, _| 1.0),
            TimeProfile::constant(0.0),
        );
        let w = Window::new(0.0, 1.0, 0.5, 2.0).unwrap();
        let rep = validate(&m, &w, &ValidateOpts::default()).unwrap();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Hyperbolicity));
    }

    #[test]
    fn validate_flags_unbounded_g00() {
        let m = RadialMetric::custom(
            Arc::new(|_, r| 1.0 + r),
            Arc::new(|_, _| 0.0),
            Arc::new(|_, _| -1.0),
            TimeProfile::constant(0.0),
        );
        let w = Window::new(0.0, 1.0, 0.5, 2.0).unwrap();
        let rep = validate(&m, &w, &ValidateOpts::default()).unwrap();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::FarFieldAsymptotics));
    }

    #[test]
    fn validate_is_monotone_under_nested_refinement() {
        let m = RadialMetric::custom(
            Arc::new(|_, _| 1.0),
            Arc::new(|_, _| 0.0),
            // hyperbolicity fails only on a thin band
            Arc::new(|_, r| if (r - 1.0).abs() < 0.02 { 1.0 } else { -1.0 }),
            TimeProfile::constant(0.0),
        );
        let w = Window::new(0.0, 1.0, 0.5, 2.0).unwrap();
        let coarse = validate(
            &m,
            &w,
            &ValidateOpts {
                grid: (50, 50),
                ..Default::default()
            },
        )
        .unwrap();
        if !coarse.passed() {
            let fine = validate(
                &m,
                &w,
                &ValidateOpts {
                    grid: (100, 100),
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(!fine.passed());
        }
    }

    #[test]
    fn polar_acoustic_delta_and_ergosphere_radius() {
        let m = acoustic_to_polar2d(-1.0, 1.0).unwrap();
        let re = (2.0f64).sqrt();
        assert!(m.delta(re, 0.3).abs() < 1e-15);
        assert!(m.delta(1.0, 0.0) < 0.0);
        let m2 = acoustic_to_polar2d(3.0, 4.0).unwrap();
        assert!(m2.delta(5.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_acoustic_b0_components() {
        let m = acoustic_to_polar2d(-1.0, 0.0).unwrap();
        let c = m.comps(2.0, 0.0);
        assert!((c.grr - (-1.0 + 0.25)).abs() < 1e-15);
        assert_eq!(c.grt, 0.0);
        assert!((c.gtt + 1.0 - 0.25 * 0.0).abs() < 1.0); // gtt = -1 at B=0
        assert!((c.gtt + 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_rejects_zero_radial_flow() {
        assert!(acoustic_to_polar2d(0.0, 1.0).is_err());
    }

    #[test]
    fn b1_round_trip() {
        let p = TimeProfile::tanh_ramp(-2.0, 0.5, 1.0, 2.0).unwrap();
        let m = acoustic_to_radial(&AcousticFlow::new(p.clone()));
        for i in 0..50 {
            let x0 = -10.0 + 0.4 * i as f64;
            assert!((m.b1(x0) - p.value(x0)).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_sample_inverse_round_trip() {
        let s = MetricSample::acoustic(&[-0.5, 0.25]);
        let cov = s.cov().unwrap();
        let d = s.n + 1;
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += s.inv[i * d + k] * cov[k * d + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12);
            }
        }
    }
}
