//! Reduced-rank adaptive signal processing.
//!
//! An `M`-dimensional observation `r` is compressed to `D` dimensions by a
//! transformation `S_D` and filtered by a reduced weight vector `w_D`, giving
//! the output `x = w_Dᴴ S_Dᴴ r`. The crate provides four families of designs
//! for `S_D` (principal components, Krylov/multistage Wiener, joint iterative
//! optimization and switched interpolation/decimation) on top of common
//! exponentially-weighted least-squares statistics, plus synthetic DS-CDMA
//! and array scenarios and a deterministic Monte Carlo harness.

pub mod dimred;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod sysmodels;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::ComplexMatrix;
