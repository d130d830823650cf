use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{ensure, Error, Result};

/// Hermitian check tolerance, scaled by `max(1, ‖A‖_max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;
const OFF_DIAGONAL_EPS: f64 = 1e-14;
/// Off-diagonal entries below this fraction of `‖A‖_F` are dropped.
const NEGLIGIBLE: f64 = 1e-17;

/// Eigen-decomposition `A = V·diag(λ)·Vᴴ` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Real eigenvalues, sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// The `d` dominant eigenvectors as an `M×d` matrix.
    pub fn principal(&self, d: usize) -> ComplexMatrix {
        self.eigenvectors.leading_columns(d)
    }

    /// `V·diag(λ)·Vᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let scaled = ComplexMatrix::from_fn(n, n, |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled.matmul(&v.adjoint())
    }
}

pub(crate) fn check_hermitian(a: &ComplexMatrix, what: &str) -> Result<()> {
    ensure!(
        a.is_square(),
        "{what} must be square, got {}x{}",
        a.rows(),
        a.cols()
    );
    let defect = a.hermitian_defect().unwrap_or(f64::INFINITY);
    let tol = HERMITIAN_TOL * a.max_abs().max(1.0);
    if defect.is_nan() || defect > tol {
        return Err(Error::pre(format!(
            "{what} is not Hermitian: max|A - A^H| = {defect:e} exceeds {tol:e}"
        )));
    }
    Ok(())
}

/// Cyclic complex Jacobi eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Equal eigenvalues keep the
/// ascending order of the diagonal positions they converged on, so an
/// already-diagonal input returns its own coordinate axes.
pub fn hermitian_evd(a: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a, "matrix")?;
    let mut work = a.clone();
    work.hermitianize();
    let mut vectors = ComplexMatrix::identity(a.rows());
    jacobi_in_place(&mut work, &mut vectors);
    Ok(sorted(work, vectors))
}

/// Eigen-decomposition of `A` seeded with a previous orthonormal eigenbasis.
///
/// Rotates into the given basis, diagonalizes `Vᴴ·A·V` with Jacobi sweeps and
/// maps the result back. When `A` has drifted only slightly since `basis` was
/// computed this converges in one or two sweeps.
pub fn hermitian_evd_seeded(a: &ComplexMatrix, basis: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a, "matrix")?;
    ensure!(
        basis.rows() == a.rows() && basis.cols() == a.cols(),
        "seed basis must be {}x{}",
        a.rows(),
        a.cols()
    );
    let mut work = a.congruence(basis);
    let mut vectors = basis.clone();
    jacobi_in_place(&mut work, &mut vectors);
    Ok(sorted(work, vectors))
}

pub(super) fn sorted(work: ComplexMatrix, vectors: ComplexMatrix) -> HermitianEigen {
    let n = work.rows();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep ascending index order
    order.sort_by(|&i, &j| work[(j, j)].re.total_cmp(&work[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| work[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            sum += a[(p, q)].norm_sqr();
        }
    }
    (2.0 * sum).sqrt()
}

/// Drives `a` to diagonal form, accumulating rotations into `v`.
fn jacobi_in_place(a: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    let n = a.rows();
    let scale = a.frobenius();
    if scale == 0.0 {
        return;
    }
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= OFF_DIAGONAL_EPS * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(a, v, p, q, scale);
            }
        }
    }
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, scale: f64) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag < NEGLIGIBLE * scale || mag <= f64::MIN_POSITIVE {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // Phase d makes the (p,q) entry real; a real rotation then annihilates it.
    let d = g.conj() / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = diag(1, d)·[[c, s], [-s, c]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -d * s;
    let u_qq = d * c;

    // Rows/columns other than p, q only see A·U; Hermitian symmetry gives the
    // mirrored row update for free.
    let n = a.cols();
    let data = a.data_mut();
    for (k, row) in data.chunks_exact_mut(n).enumerate() {
        if k == p || k == q {
            continue;
        }
        let x = row[p];
        let y = row[q];
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        data[p * n + k] = data[k * n + p].conj();
        data[q * n + k] = data[k * n + q].conj();
    }
    data[p * n + q] = Complex64::new(0.0, 0.0);
    data[q * n + p] = Complex64::new(0.0, 0.0);
    data[p * n + p] = Complex64::new(app - t * mag, 0.0);
    data[q * n + q] = Complex64::new(aqq + t * mag, 0.0);

    let vn = v.cols();
    for row in v.data_mut().chunks_exact_mut(vn) {
        let x = row[p];
        let y = row[q];
        row[p] = x * u_pp + y * u_qp;
        row[q] = x * u_pq + y * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::random_hermitian_pd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_defect(v: &ComplexMatrix) -> f64 {
        v.adjoint_matmul(v)
            .sub(&ComplexMatrix::identity(v.cols()))
            .max_abs()
    }

    fn residual(a: &ComplexMatrix, e: &HermitianEigen) -> f64 {
        let av = a.matmul(&e.eigenvectors);
        let n = a.rows();
        let vl = ComplexMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, c)] * e.eigenvalues[c]);
        av.sub(&vl).max_abs()
    }

    #[test]
    fn identity_keeps_coordinate_axes() {
        let e = hermitian_evd(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.eigenvectors, ComplexMatrix::identity(3));
    }

    #[test]
    fn two_by_two_symmetric_closed_form() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = hermitian_evd(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, h], [h, -h]];
        for (j, col) in expected.iter().enumerate() {
            let v = e.eigenvectors.column(j);
            // equal up to a unit-modulus phase: |<expected, v>| = 1
            let overlap: Complex64 = v.iter().zip(col.iter()).map(|(x, y)| x * *y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-14, "column {j}");
        }
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_hermitian_pd(&mut rng, 6);
            let e = hermitian_evd(&a).unwrap();
            let scale = a.max_abs();
            assert!(e.reconstruct().sub(&a).max_abs() <= 1e-10 * scale);
            assert!(residual(&a, &e) <= 1e-10 * scale);
            assert!(orthonormality_defect(&e.eigenvectors) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let trace = a.trace().re;
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - trace).abs() <= 1e-9 * trace.abs());
        }
    }

    #[test]
    fn seeded_matches_cold_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian_pd(&mut rng, 8);
        let cold = hermitian_evd(&a).unwrap();
        let mut b = a.clone();
        b.rank_one_update(0.99, &cold.eigenvectors.column(3));
        let warm = hermitian_evd_seeded(&b, &cold.eigenvectors).unwrap();
        let fresh = hermitian_evd(&b).unwrap();
        for (x, y) in warm.eigenvalues.iter().zip(&fresh.eigenvalues) {
            assert!((x - y).abs() < 1e-10 * b.max_abs());
        }
        assert!(residual(&b, &warm) <= 1e-10 * b.max_abs());
        assert!(orthonormality_defect(&warm.eigenvectors) <= 1e-10);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let rect = ComplexMatrix::zeros(2, 3);
        let err = hermitian_evd(&rect).unwrap_err().to_string();
        assert!(err.contains("square"), "{err}");
        let skew = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let err = hermitian_evd(&skew).unwrap_err().to_string();
        assert!(err.contains("Hermitian"), "{err}");
    }

    #[test]
    fn complex_hermitian_with_repeated_eigenvalues() {
        // diag(4, 1, 1) rotated by a fixed unitary
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = crate::numerics::random::random_unitary(&mut rng, 3);
        let d = ComplexMatrix::from_fn(3, 3, |r, c| {
            if r == c {
                Complex64::new([4.0, 1.0, 1.0][r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let a = q.matmul(&d).matmul(&q.adjoint());
        let e = hermitian_evd(&a).unwrap();
        assert!((e.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[2] - 1.0).abs() < 1e-12);
        assert!(residual(&a, &e) < 1e-12);
    }
}
