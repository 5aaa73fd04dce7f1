//! Numerical laboratory for analogue black and white holes.
//!
//! The crate builds radial and 2D polar metrics from flow profiles,
//! integrates their characteristic and null-geodesic flows, locates dynamic
//! horizons in three independent ways (shooting, contraction mapping,
//! trapped-surface classification), analyses stationary 2D rotating flows
//! (closed null orbits, ergospheres), and studies boundary data of waves
//! (characteristic coordinates, Dirichlet-to-Neumann traces).

pub mod characteristics;
pub mod error;
pub mod geodesics;
pub mod horizons;
pub mod metric;
pub mod ode;
pub mod profile;
pub mod stationary2d;
pub mod waves;

pub use error::{Error, Result};
pub use metric::{acoustic_to_polar2d, acoustic_to_radial, AcousticFlow, PolarMetric2D, RadialMetric, Window};
pub use profile::TimeProfile;
