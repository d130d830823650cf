//! Exponentially-weighted second-order statistics and the closed-form
//! least-squares quantities built from them.

use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::numerics::{solve_hermitian, vector, ComplexMatrix, Solution};

/// Default `R̂[0] = δ₀·I`.
pub const DEFAULT_INIT_RIDGE: f64 = 1e-6;

/// Exponentially-weighted estimates `R̂`, `p̂` and `σ̂d²`.
///
/// After `n` updates with forgetting factor `λ`:
///
/// ```text
/// R̂[n]  = λⁿ R̂[0] + Σ λⁿ⁻ˡ r[l] r[l]ᴴ
/// p̂[n]  = Σ λⁿ⁻ˡ r[l] d*[l]
/// σ̂d²[n] = Σ λⁿ⁻ˡ |d[l]|²
/// ```
#[derive(Debug, Clone)]
pub struct ExpWindowStats {
    pub r_hat: ComplexMatrix,
    pub p_hat: Vec<Complex64>,
    pub sigma_d2: f64,
    pub lambda: f64,
    pub count: usize,
}

impl ExpWindowStats {
    /// Statistics of dimension `m` initialized to `R̂ = δ₀·I`, `p̂ = 0`.
    pub fn new(m: usize, lambda: f64, init_ridge: f64) -> Result<Self> {
        ensure!(m >= 1, "statistics dimension must be >= 1");
        ensure!(
            lambda > 0.0 && lambda <= 1.0,
            "forgetting factor must lie in (0, 1], got {lambda}"
        );
        ensure!(
            init_ridge >= 0.0,
            "initial ridge must be >= 0, got {init_ridge}"
        );
        Ok(Self {
            r_hat: ComplexMatrix::scaled_identity(m, init_ridge),
            p_hat: vec![Complex64::new(0.0, 0.0); m],
            sigma_d2: 0.0,
            lambda,
            count: 0,
        })
    }

    pub fn with_default_ridge(m: usize, lambda: f64) -> Result<Self> {
        Self::new(m, lambda, DEFAULT_INIT_RIDGE)
    }

    pub fn dim(&self) -> usize {
        self.p_hat.len()
    }

    /// `R̂ ← λR̂ + r rᴴ`, `p̂ ← λp̂ + r d*`, `σ̂d² ← λσ̂d² + |d|²`.
    pub fn update(&mut self, r: &[Complex64], d: Complex64) -> Result<()> {
        ensure!(
            r.len() == self.dim(),
            "observation has length {} but statistics are {}-dimensional",
            r.len(),
            self.dim()
        );
        self.r_hat.rank_one_update(self.lambda, r);
        let dc = d.conj();
        for (p, x) in self.p_hat.iter_mut().zip(r) {
            *p = *p * self.lambda + x * dc;
        }
        self.sigma_d2 = self.lambda * self.sigma_d2 + d.norm_sqr();
        self.count += 1;
        Ok(())
    }
}

/// Pure-transition form of [`ExpWindowStats::update`].
pub fn update_stats(
    mut stats: ExpWindowStats,
    r: &[Complex64],
    d: Complex64,
) -> Result<ExpWindowStats> {
    stats.update(r, d)?;
    Ok(stats)
}

fn check_transform(stats: &ExpWindowStats, s_d: &ComplexMatrix) -> Result<()> {
    ensure!(
        s_d.rows() == stats.dim(),
        "transformation has {} rows but statistics are {}-dimensional",
        s_d.rows(),
        stats.dim()
    );
    ensure!(
        s_d.cols() <= s_d.rows(),
        "transformation rank {} exceeds dimension {}",
        s_d.cols(),
        s_d.rows()
    );
    Ok(())
}

/// Reduced statistics `R̄ = S_Dᴴ R̂ S_D` and `p̄ = S_Dᴴ p̂`.
pub fn reduced_stats(
    stats: &ExpWindowStats,
    s_d: &ComplexMatrix,
) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    check_transform(stats, s_d)?;
    Ok((
        stats.r_hat.congruence(s_d),
        s_d.adjoint_mul_vec(&stats.p_hat),
    ))
}

/// Least-squares reduced weights `w_D = R̄⁻¹ p̄`.
pub fn wiener_reduced(r_bar: &ComplexMatrix, p_bar: &[Complex64]) -> Result<Solution> {
    solve_hermitian(r_bar, p_bar)
}

/// Sum of error squares `σ̂d² − p̄ᴴ R̄⁻¹ p̄` achieved by the best `w_D` for `S_D`.
pub fn ses(stats: &ExpWindowStats, s_d: &ComplexMatrix) -> Result<f64> {
    let (r_bar, p_bar) = reduced_stats(stats, s_d)?;
    let w = wiener_reduced(&r_bar, &p_bar)?;
    Ok(stats.sigma_d2 - vector::dot(&p_bar, &w.x).re)
}

/// Full-rank SES, `σ̂d² − p̂ᴴ R̂⁻¹ p̂`.
pub fn full_rank_ses(stats: &ExpWindowStats) -> Result<f64> {
    let w = solve_hermitian(&stats.r_hat, &stats.p_hat)?;
    Ok(stats.sigma_d2 - vector::dot(&stats.p_hat, &w.x).re)
}

/// Ensemble MMSE `σd² − pᴴ S_D (S_Dᴴ R S_D)⁻¹ S_Dᴴ p` for known `R`, `p`.
pub fn mmse_oracle(
    r: &ComplexMatrix,
    p: &[Complex64],
    s_d: &ComplexMatrix,
    sigma_d2: f64,
) -> Result<f64> {
    ensure!(
        r.rows() == p.len() && s_d.rows() == p.len(),
        "dimension mismatch: R is {}x{}, p has {}, S_D has {} rows",
        r.rows(),
        r.cols(),
        p.len(),
        s_d.rows()
    );
    let r_bar = r.congruence(s_d);
    let p_bar = s_d.adjoint_mul_vec(p);
    let w = solve_hermitian(&r_bar, &p_bar)?;
    Ok(sigma_d2 - vector::dot(&p_bar, &w.x).re)
}

/// Minimum-variance distortionless weights `R̄⁻¹ā / (āᴴ R̄⁻¹ ā)`.
pub fn mvdr_solve(r_bar: &ComplexMatrix, a_bar: &[Complex64]) -> Result<Solution> {
    ensure!(
        vector::norm_sqr(a_bar) > 0.0,
        "distortionless constraint is infeasible: projected steering vector is zero"
    );
    let g = solve_hermitian(r_bar, a_bar)?;
    let denom = vector::dot(a_bar, &g.x).re;
    ensure!(
        denom > 0.0 && denom.is_finite(),
        "MVDR normalization a^H R^-1 a is not positive ({denom})"
    );
    Ok(Solution {
        x: vector::scale(&g.x, Complex64::new(1.0 / denom, 0.0)),
        ridge: g.ridge,
    })
}
