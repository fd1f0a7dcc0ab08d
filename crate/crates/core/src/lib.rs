//! Exact Fock-space simulation of a Kerr-nonlinear Sagnac fiber gyroscope and the
//! resolution bounds that go with it: error propagation, classical and quantum
//! Fisher information, noise-degraded bounds, and the two-parameter
//! (linear + nonlinear phase) Fisher matrix.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod noise;
pub mod probes;
pub mod sum;
pub mod sweep;

pub use error::{GyroError, Result};
