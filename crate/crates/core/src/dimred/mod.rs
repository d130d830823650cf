//! Dimensionality reduction: principal components, Krylov (multistage
//! Wiener), joint iterative optimization and switched
//! interpolation/decimation, plus model-order selection.

mod jidf;
mod jio;
mod mswf;
mod pc;

use std::fmt;

use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::numerics::{vector, ComplexMatrix};

pub use jidf::{
    build_decimation_bank, jidf_step, jidf_step_with, BankScheme, DecimationPattern, JidfConfig,
    JidfOutput, JidfState, DEFAULT_EXHAUSTIVE_CAP,
};
pub use jio::{jio_update, JioState, DEFAULT_WEIGHT_GUARD};
pub use mswf::{krylov_basis, mswf_subspace, KrylovBasis, KRYLOV_TRUNCATION};
pub use pc::{pc_from_eigen, pc_subspace};

/// Which family produced a transformation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pc,
    Mswf,
    Jio,
    Jidf,
    Identity,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Pc => "pc",
            Method::Mswf => "mswf",
            Method::Jio => "jio",
            Method::Jidf => "jidf",
            Method::Identity => "identity",
        };
        f.write_str(s)
    }
}

/// An `M×D` transformation matrix `S_D` with its method tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    s_d: ComplexMatrix,
    method: Method,
}

impl Subspace {
    pub fn new(s_d: ComplexMatrix, method: Method) -> Result<Self> {
        ensure!(
            s_d.cols() >= 1 && s_d.cols() <= s_d.rows(),
            "subspace rank {} must lie in 1..={}",
            s_d.cols(),
            s_d.rows()
        );
        ensure!(s_d.is_finite(), "subspace columns must be finite");
        Ok(Self { s_d, method })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            s_d: ComplexMatrix::identity(m),
            method: Method::Identity,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s_d
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.s_d
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Observation dimension `M`.
    pub fn dim(&self) -> usize {
        self.s_d.rows()
    }

    /// Model order `D`.
    pub fn rank(&self) -> usize {
        self.s_d.cols()
    }

    pub fn compression_ratio(&self) -> f64 {
        self.dim() as f64 / self.rank() as f64
    }
}

/// A transformation and reduced weights; the output is `x = w_Dᴴ S_Dᴴ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRankFilter {
    pub subspace: Subspace,
    pub w_d: Vec<Complex64>,
}

impl ReducedRankFilter {
    pub fn new(subspace: Subspace, w_d: Vec<Complex64>) -> Result<Self> {
        ensure!(
            w_d.len() == subspace.rank(),
            "reduced weights have length {} but the subspace has rank {}",
            w_d.len(),
            subspace.rank()
        );
        Ok(Self { subspace, w_d })
    }

    /// Equivalent full-rank filter `S_D w_D`.
    pub fn effective(&self) -> Vec<Complex64> {
        self.subspace.matrix().mul_vec(&self.w_d)
    }
}

/// Filter output `w_Dᴴ (S_Dᴴ r)`.
pub fn rr_output(filter: &ReducedRankFilter, r: &[Complex64]) -> Result<Complex64> {
    ensure!(
        r.len() == filter.subspace.dim(),
        "observation has length {} but the filter expects {}",
        r.len(),
        filter.subspace.dim()
    );
    let reduced = filter.subspace.matrix().adjoint_mul_vec(r);
    Ok(vector::dot(&filter.w_d, &reduced))
}

/// Criterion values within this relative distance of the minimum count as
/// ties, so round-off alone cannot pick a larger model.
pub const ORDER_TIE_RTOL: f64 = 1e-9;

/// `argmin_D f(D)` over the candidates, ties (within [`ORDER_TIE_RTOL`])
/// resolved toward the smallest `D`.
pub fn select_model_order(candidates: &[(usize, f64)]) -> Result<usize> {
    ensure!(
        !candidates.is_empty(),
        "model-order selection needs at least one candidate"
    );
    ensure!(
        candidates.iter().all(|(_, v)| v.is_finite()),
        "model-order criterion values must be finite"
    );
    let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let slack = ORDER_TIE_RTOL * min.abs();
    Ok(candidates
        .iter()
        .filter(|(_, v)| *v <= min + slack)
        .map(|c| c.0)
        .min()
        .expect("non-empty"))
}

/// Mean of `|e|²` over the last `window` a-priori errors.
pub fn trailing_error_power(errors: &[Complex64], window: usize) -> Result<f64> {
    ensure!(window >= 1, "error window must be >= 1");
    ensure!(!errors.is_empty(), "no a-priori errors recorded");
    let tail = &errors[errors.len().saturating_sub(window)..];
    Ok(tail.iter().map(|e| e.norm_sqr()).sum::<f64>() / tail.len() as f64)
}
