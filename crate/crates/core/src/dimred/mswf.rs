use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::estimators::ExpWindowStats;
use crate::numerics::{vector, ComplexMatrix};

use super::{Method, Subspace};

/// A new Krylov direction whose residual after projection falls below this
/// fraction of its norm ends the basis.
pub const KRYLOV_TRUNCATION: f64 = 1e-10;

/// Krylov basis `[q, Rq, …]` together with the rank actually achieved.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub subspace: Subspace,
    pub requested: usize,
}

impl KrylovBasis {
    /// `D_eff ≤ D`; smaller when the Krylov space became invariant.
    pub fn achieved(&self) -> usize {
        self.subspace.rank()
    }

    pub fn truncated(&self) -> bool {
        self.achieved() < self.requested
    }
}

/// Multistage Wiener basis spanning `K_D(R̂, p̂)` with `q = p̂/‖p̂‖`.
pub fn mswf_subspace(
    stats: &ExpWindowStats,
    d: usize,
    orthonormalize: bool,
) -> Result<KrylovBasis> {
    ensure!(
        vector::norm_sqr(&stats.p_hat) > 0.0,
        "MSWF needs a nonzero cross-correlation vector"
    );
    krylov_basis(&stats.r_hat, &stats.p_hat, d, orthonormalize)
}

/// Basis of `K_D(R, b)` started from `b/‖b‖`.
///
/// The orthonormal basis is built Arnoldi-style (each new direction is `R`
/// applied to the previous orthonormal column, then twice Gram–Schmidt
/// projected), which spans the same space as the raw powers. Without
/// orthonormalization the raw powers `Rᵏq` are returned, truncated at the
/// same rank.
pub fn krylov_basis(
    r: &ComplexMatrix,
    b: &[Complex64],
    d: usize,
    orthonormalize: bool,
) -> Result<KrylovBasis> {
    let m = b.len();
    ensure!(
        r.rows() == m && r.cols() == m,
        "Krylov operator is {}x{} but the start vector has length {m}",
        r.rows(),
        r.cols()
    );
    ensure!(d >= 1 && d <= m, "Krylov rank must lie in 1..={m}, got {d}");
    let bn = vector::norm(b);
    ensure!(
        bn > 0.0 && bn.is_finite(),
        "Krylov start vector must be nonzero and finite"
    );

    let q = vector::scale(b, Complex64::new(1.0 / bn, 0.0));
    let mut ortho = vec![q.clone()];
    let mut raw = vec![q];
    while ortho.len() < d {
        let mut next = r.mul_vec(ortho.last().expect("non-empty"));
        let before = vector::norm(&next);
        for _ in 0..2 {
            for o in &ortho {
                let h = vector::dot(o, &next);
                vector::axpy(-h, o, &mut next);
            }
        }
        let after = vector::norm(&next);
        if after.is_nan() || after <= KRYLOV_TRUNCATION * before {
            break;
        }
        ortho.push(vector::scale(&next, Complex64::new(1.0 / after, 0.0)));
        if !orthonormalize {
            raw.push(r.mul_vec(raw.last().expect("non-empty")));
        }
    }
    let columns = if orthonormalize { ortho } else { raw };
    Ok(KrylovBasis {
        subspace: Subspace::new(ComplexMatrix::from_columns(&columns)?, Method::Mswf)?,
        requested: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{full_rank_ses, ses};
    use crate::numerics::random::{random_hermitian_pd, random_vector};
    use crate::numerics::solve_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats(r: ComplexMatrix, p: Vec<Complex64>, sigma: f64) -> ExpWindowStats {
        let mut s = ExpWindowStats::new(p.len(), 1.0, 0.0).unwrap();
        s.r_hat = r;
        s.p_hat = p;
        s.sigma_d2 = sigma;
        s
    }

    #[test]
    fn rank_one_is_normalized_cross_correlation() {
        let p = vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        let s = stats(ComplexMatrix::identity(2), p.clone(), 1.0);
        let k = mswf_subspace(&s, 1, true).unwrap();
        let col = k.subspace.matrix().column(0);
        assert!(vector::max_abs_diff(&col, &vector::scale(&p, Complex64::new(0.2, 0.0))) < 1e-15);
    }

    #[test]
    fn identity_operator_collapses_to_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = stats(ComplexMatrix::identity(5), random_vector(&mut rng, 5), 1.0);
        for ortho in [true, false] {
            let k = mswf_subspace(&s, 3, ortho).unwrap();
            assert_eq!(k.achieved(), 1);
            assert!(k.truncated());
        }
    }

    #[test]
    fn zero_cross_correlation_is_rejected() {
        let s = stats(
            ComplexMatrix::identity(3),
            vec![Complex64::new(0.0, 0.0); 3],
            1.0,
        );
        assert!(mswf_subspace(&s, 2, true).is_err());
    }

    #[test]
    fn full_krylov_space_reaches_full_rank_ses() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let r = random_hermitian_pd(&mut rng, 8);
            let p = random_vector(&mut rng, 8);
            let w = solve_hermitian(&r, &p).unwrap().x;
            let sigma = vector::dot(&p, &w).re + 1.0;
            let s = stats(r, p, sigma);
            let full = full_rank_ses(&s).unwrap();
            let k = mswf_subspace(&s, 8, true).unwrap();
            assert_eq!(k.achieved(), 8);
            let kr = ses(&s, k.subspace.matrix()).unwrap();
            assert!((kr - full).abs() <= 1e-8 * full.abs());
        }
    }

    #[test]
    fn orthonormal_basis_spans_raw_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = random_hermitian_pd(&mut rng, 10);
        let p = random_vector(&mut rng, 10);
        let s = stats(r.clone(), p.clone(), 1.0);
        let k = mswf_subspace(&s, 5, true).unwrap();
        let basis = k.subspace.matrix();
        let g = basis.adjoint_matmul(basis);
        assert!(g.sub(&ComplexMatrix::identity(5)).max_abs() < 1e-12);
        let raw = mswf_subspace(&s, 5, false).unwrap();
        for col in raw.subspace.matrix().columns() {
            let coef = basis.adjoint_mul_vec(&col);
            let proj = basis.mul_vec(&coef);
            let res = vector::norm(&vector::sub(&col, &proj));
            assert!(res < 1e-8 * vector::norm(&col));
        }
    }
}
