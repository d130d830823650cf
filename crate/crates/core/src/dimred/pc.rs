use crate::error::{ensure, Result};
use crate::estimators::ExpWindowStats;
use crate::numerics::{hermitian_evd, HermitianEigen};

use super::{Method, Subspace};

/// The `D` dominant eigenvectors of `R̂`.
pub fn pc_subspace(stats: &ExpWindowStats, d: usize) -> Result<Subspace> {
    let eig = hermitian_evd(&stats.r_hat)?;
    pc_from_eigen(&eig, d)
}

/// PC basis from an already computed (descending) decomposition.
pub fn pc_from_eigen(eig: &HermitianEigen, d: usize) -> Result<Subspace> {
    let m = eig.eigenvalues.len();
    ensure!(d >= 1 && d <= m, "PC rank must lie in 1..={m}, got {d}");
    Subspace::new(eig.principal(d), Method::Pc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{full_rank_ses, mmse_oracle, ses};
    use crate::numerics::random::{random_hermitian_pd, random_vector};
    use crate::numerics::ComplexMatrix;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats_with(r: ComplexMatrix) -> ExpWindowStats {
        let m = r.rows();
        let mut s = ExpWindowStats::new(m, 1.0, 0.0).unwrap();
        s.r_hat = r;
        s
    }

    #[test]
    fn diagonal_covariance_selects_leading_axes() {
        let s = stats_with(ComplexMatrix::from_real_rows(&[
            &[3.0, 0.0, 0.0],
            &[0.0, 2.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]));
        let pc = pc_subspace(&s, 2).unwrap();
        assert_eq!(pc.method(), Method::Pc);
        assert_eq!(pc.matrix(), &ComplexMatrix::identity(3).leading_columns(2));
    }

    #[test]
    fn identity_covariance_uses_tie_break() {
        let s = stats_with(ComplexMatrix::identity(4));
        let pc = pc_subspace(&s, 2).unwrap();
        assert_eq!(pc.matrix(), &ComplexMatrix::identity(4).leading_columns(2));
    }

    #[test]
    fn rank_out_of_range() {
        let s = stats_with(ComplexMatrix::identity(3));
        assert!(pc_subspace(&s, 0).is_err());
        assert!(pc_subspace(&s, 4).is_err());
    }

    #[test]
    fn nested_pc_mmse_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = random_hermitian_pd(&mut rng, 6);
            let p = random_vector(&mut rng, 6);
            let s = stats_with(r.clone());
            let mut prev = f64::INFINITY;
            for d in 1..=6 {
                let pc = pc_subspace(&s, d).unwrap();
                let v = mmse_oracle(&r, &p, pc.matrix(), 10.0).unwrap();
                assert!(v <= prev + 1e-10 * prev.abs().max(1.0));
                prev = v;
            }
        }
    }

    #[test]
    fn orthonormal_columns_and_full_rank_ses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = ExpWindowStats::with_default_ridge(8, 0.99).unwrap();
        for _ in 0..40 {
            let r = random_vector(&mut rng, 8);
            s.update(&r, r[0] + Complex64::new(0.1, 0.0)).unwrap();
        }
        for d in 1..=8 {
            let pc = pc_subspace(&s, d).unwrap();
            let g = pc.matrix().adjoint_matmul(pc.matrix());
            assert!(g.sub(&ComplexMatrix::identity(d)).max_abs() < 1e-9);
        }
        let full = full_rank_ses(&s).unwrap();
        let pc = ses(&s, pc_subspace(&s, 8).unwrap().matrix()).unwrap();
        assert!((full - pc).abs() <= 1e-9 * full.abs().max(s.sigma_d2));
    }
}
