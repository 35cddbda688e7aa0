//! Subspace direction-of-arrival estimation for coexisting circular and
//! non-circular sources on a uniform linear array.
//!
//! The crate provides:
//!
//! * [`array`] — ULA geometry, steering vectors and manifold matrices.
//! * [`signal`] — baseband symbol generation (BPSK / QPSK / UQPSK), noisy
//!   snapshot synthesis and analytic covariance oracles.
//! * [`covariance`] — sample conjugated / unconjugated / extended covariance
//!   estimates.
//! * [`estimators`] — the three-stage HRNC-MUSIC pipeline together with the
//!   MUSIC and NC-MUSIC baselines, pseudo-spectra and peak search.
//! * [`harness`] — scenario configuration, Monte Carlo sweeps, RMSE and
//!   resolution-probability metrics, CSV/JSON emission.

pub mod array;
pub mod covariance;
pub mod error;
pub mod estimators;
pub mod harness;
mod linalg;
pub mod signal;

pub use error::{DoaError, Result, Stage};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
