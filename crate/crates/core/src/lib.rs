//! Selgrade decompositions of affine control systems.
//!
//! The affine system is lifted to a bilinear one on `R^(d+1)` and studied on
//! projective space through chain graphs over a cube-map grid. Recurrent
//! components of the graph approximate the Selgrade bundles; the one off the
//! equator is the central bundle, the ones on it lie at infinity.
//!
//! The numerical kernels are generic over [`Real`]; the graph engine runs in
//! `f64`.

pub mod error;
pub mod graph;
pub mod grid;
pub mod linalg;
pub mod morse;
pub mod oracle;
pub mod projective;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Matrix64 = linalg::Matrix<f64>;
pub type Vector64 = linalg::Vector<f64>;
pub type Spectrum64 = linalg::Spectrum<f64>;
pub type ControlBox64 = system::ControlBox<f64>;
pub type AffineSystem64 = system::AffineControlSystem<f64>;
pub type LiftedSystem64 = system::LiftedSystem<f64>;
pub type HomogeneousSystem64 = system::HomogeneousSystem<f64>;
pub type ProjectivePoint64 = projective::ProjectivePoint<f64>;
pub type LyapunovDecomposition64 = oracle::LyapunovDecomposition<f64>;
