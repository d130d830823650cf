use num_complex::Complex64;

use super::evd::check_hermitian;
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{ensure, Result};

/// Condition estimate above which the ridge is applied.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Ridge scale relative to the mean diagonal, `δ = RIDGE_SCALE·trace(A)/M`.
pub const RIDGE_SCALE: f64 = 1e-8;

/// Solution of `A x = b`, with the ridge that had to be added (if any).
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<Complex64>,
    pub ridge: Option<f64>,
}

impl Solution {
    pub fn regularized(&self) -> bool {
        self.ridge.is_some()
    }
}

/// Cholesky factor `A (+ δI) = L·Lᴴ` of a Hermitian matrix.
///
/// When `A` is not numerically positive definite, or the condition estimate
/// `(max Lᵢᵢ / min Lᵢᵢ)²` exceeds [`CONDITION_LIMIT`], the factorization is
/// redone on `A + δI` with `δ = 1e-8·trace(A)/M` (or `1e-8` for a zero trace).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<Complex64>,
    ridge: Option<f64>,
}

impl Cholesky {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        check_hermitian(a, "system matrix")?;
        Ok(Self::factor_unchecked(a))
    }

    /// Factors without the Hermitian precondition check; only the lower
    /// triangle of `a` is read.
    pub(crate) fn factor_unchecked(a: &ComplexMatrix) -> Self {
        let n = a.rows();
        if let Some(lower) = try_factor(a, 0.0) {
            if condition_estimate(&lower, n) <= CONDITION_LIMIT {
                return Self {
                    n,
                    lower,
                    ridge: None,
                };
            }
        }
        let mean_diag = a.trace().re / n as f64;
        let mut delta = if mean_diag > 0.0 {
            RIDGE_SCALE * mean_diag
        } else {
            RIDGE_SCALE
        };
        loop {
            if let Some(lower) = try_factor(a, delta) {
                return Self {
                    n,
                    lower,
                    ridge: Some(delta),
                };
            }
            // indefinite input; keep growing until it is dominated
            delta *= 10.0;
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ridge(&self) -> Option<f64> {
        self.ridge
    }

    /// Solves `L Lᴴ x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "right-hand side length mismatch");
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= l[i * n + k] * y[k];
            }
            y[i] = acc / l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= l[k * n + i].conj() * y[k];
            }
            y[i] = acc / l[i * n + i].re;
        }
        y
    }
}

fn try_factor(a: &ComplexMatrix, delta: f64) -> Option<Vec<Complex64>> {
    let n = a.rows();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut diag = a[(j, j)].re + delta;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = acc / ljj;
        }
    }
    Some(l)
}

fn condition_estimate(lower: &[Complex64], n: usize) -> f64 {
    let (lo, hi) = (0..n)
        .map(|i| lower[i * n + i].re)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
    (hi / lo).powi(2)
}

/// Solves `A x = b` for Hermitian positive (semi-)definite `A`.
pub fn solve_hermitian(a: &ComplexMatrix, b: &[Complex64]) -> Result<Solution> {
    ensure!(
        a.rows() == b.len(),
        "right-hand side has length {} but the matrix has {} rows",
        b.len(),
        a.rows()
    );
    let chol = Cholesky::factor(a)?;
    Ok(Solution {
        x: chol.solve(b),
        ridge: chol.ridge,
    })
}
