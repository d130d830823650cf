//! Complex dense linear algebra: Hermitian eigen-decomposition, Hermitian
//! solves and Hankel windows.

mod evd;
mod matrix;
pub mod random;
mod solve;
mod tracker;
pub mod vector;

use num_complex::Complex64;

pub use evd::{hermitian_evd, hermitian_evd_seeded, HermitianEigen, HERMITIAN_TOL};
pub use matrix::ComplexMatrix;
pub use solve::{solve_hermitian, Cholesky, Solution, CONDITION_LIMIT, RIDGE_SCALE};
pub use tracker::EigenTracker;

use crate::error::{ensure, Result};

/// `M×I` Hankel matrix with entry `(m, k) = samples[m + k]`.
pub fn hankel_window(samples: &[Complex64], m: usize, i: usize) -> Result<ComplexMatrix> {
    ensure!(
        m >= 1 && i >= 1,
        "window dimensions must be >= 1, got M={m}, I={i}"
    );
    ensure!(
        samples.len() + 1 >= m + i,
        "Hankel window {m}x{i} needs {} samples, got {}",
        m + i - 1,
        samples.len()
    );
    Ok(ComplexMatrix::from_fn(m, i, |r, c| samples[r + c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hankel_three_by_two() {
        let s: Vec<_> = (0..4).map(|k| c(k as f64)).collect();
        let h = hankel_window(&s, 3, 2).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 2.0], &[2.0, 3.0]]);
        assert_eq!(h, expected);
    }

    #[test]
    fn hankel_single_column_and_zero_samples() {
        let s: Vec<_> = (0..5).map(|k| c(k as f64 + 1.0)).collect();
        let h = hankel_window(&s, 5, 1).unwrap();
        assert_eq!(h.column(0), s);
        let z = hankel_window(&[c(0.0); 6], 4, 3).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn hankel_rejects_short_input() {
        assert!(hankel_window(&[c(1.0); 3], 3, 2).is_err());
    }

    proptest! {
        #[test]
        fn hankel_rows_are_shifted_copies(
            re in proptest::collection::vec(-10.0f64..10.0, 12),
            m in 1usize..8,
            i in 1usize..5,
        ) {
            let s: Vec<_> = re.iter().map(|&x| Complex64::new(x, -x)).collect();
            let h = hankel_window(&s, m, i).unwrap();
            for r in 0..m.saturating_sub(1) {
                for k in 1..i {
                    prop_assert_eq!(h[(r, k)], h[(r + 1, k - 1)]);
                }
            }
        }
    }
}
