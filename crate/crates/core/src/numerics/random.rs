//! Seeded random instances for tests, the self-test command and benches.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;

/// Circularly-symmetric complex Gaussian sample with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0))
}

/// `G Gᴴ / n + 0.1 I` for a Gaussian `n×n` matrix `G`.
pub fn random_hermitian_pd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let mut a = g
        .matmul(&g.adjoint())
        .scale(Complex64::new(1.0 / n as f64, 0.0))
        .add(&ComplexMatrix::scaled_identity(n, 0.1));
    a.hermitianize();
    a
}

/// Orthonormal `rows×cols` matrix from Gram–Schmidt on Gaussian columns.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(cols <= rows);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = random_vector(rng, rows);
        for b in &basis {
            let proj = super::vector::dot(b, &v);
            super::vector::axpy(-proj, b, &mut v);
        }
        let n = super::vector::norm(&v);
        if n > 1e-8 {
            basis.push(super::vector::scale(&v, Complex64::new(1.0 / n, 0.0)));
        }
    }
    ComplexMatrix::from_columns(&basis).expect("non-empty basis")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_orthonormal(rng, n, n)
}
