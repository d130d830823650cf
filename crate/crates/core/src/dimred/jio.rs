use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::estimators::{reduced_stats, wiener_reduced, ExpWindowStats};
use crate::numerics::{vector, Cholesky, ComplexMatrix};

use super::{Method, ReducedRankFilter, Subspace};

/// Columns whose reduced weight is smaller than this in magnitude are left
/// untouched by a sweep.
pub const DEFAULT_WEIGHT_GUARD: f64 = 1e-4;

/// Basis columns `s_d` and reduced weights `w_D` refined by alternating LS.
#[derive(Debug, Clone)]
pub struct JioState {
    basis: ComplexMatrix,
    w_d: Vec<Complex64>,
    iterations: usize,
    weight_guard: f64,
    guard_hits: u64,
}

impl JioState {
    /// `S_D = [I_D 0]ᵀ`, `w_D = e₁`.
    pub fn new(m: usize, d: usize, iterations: usize) -> Result<Self> {
        Self::with_guard(m, d, iterations, DEFAULT_WEIGHT_GUARD)
    }

    pub fn with_guard(m: usize, d: usize, iterations: usize, weight_guard: f64) -> Result<Self> {
        ensure!(d >= 1 && d <= m, "JIO rank must lie in 1..={m}, got {d}");
        ensure!(
            iterations >= 1,
            "JIO needs at least one iteration per update"
        );
        ensure!(weight_guard > 0.0, "JIO weight guard must be positive");
        let basis = ComplexMatrix::from_fn(m, d, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            basis,
            w_d: vector::unit(d, 0),
            iterations,
            weight_guard,
            guard_hits: 0,
        })
    }

    /// Starts from a caller-supplied basis and weights.
    pub fn from_parts(
        basis: ComplexMatrix,
        w_d: Vec<Complex64>,
        iterations: usize,
        weight_guard: f64,
    ) -> Result<Self> {
        ensure!(
            basis.cols() >= 1 && basis.cols() <= basis.rows(),
            "JIO basis must be M×D with 1 <= D <= M"
        );
        ensure!(
            w_d.len() == basis.cols(),
            "JIO weights must have one entry per basis column"
        );
        ensure!(
            iterations >= 1,
            "JIO needs at least one iteration per update"
        );
        ensure!(weight_guard > 0.0, "JIO weight guard must be positive");
        Ok(Self {
            basis,
            w_d,
            iterations,
            weight_guard,
            guard_hits: 0,
        })
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.w_d
    }

    pub fn rank(&self) -> usize {
        self.w_d.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Number of column updates skipped because `|w_d| < ε_w`.
    pub fn guard_hits(&self) -> u64 {
        self.guard_hits
    }

    pub fn filter(&self) -> Result<ReducedRankFilter> {
        ReducedRankFilter::new(
            Subspace::new(self.basis.clone(), Method::Jio)?,
            self.w_d.clone(),
        )
    }

    /// Effective filter `S_D w_D`.
    pub fn effective(&self) -> Vec<Complex64> {
        self.basis.mul_vec(&self.w_d)
    }

    /// Runs `T` sweeps of column updates followed by a weight refresh.
    ///
    /// Column `d` minimizes the windowed cost with everything else held:
    ///
    /// ```text
    /// s_d = R̂⁻¹ (w_d* p̂ − v_d) / |w_d|²,   v_d = w_d* R̂ Σ_{n≠d} s_n w_n
    /// ```
    pub fn update(&mut self, stats: &ExpWindowStats) -> Result<()> {
        let m = self.basis.rows();
        ensure!(
            stats.dim() == m,
            "statistics are {}-dimensional but the JIO basis has {m} rows",
            stats.dim()
        );
        let chol = Cholesky::factor(&stats.r_hat)?;
        let d_count = self.rank();
        let mut effective = self.effective();
        for _ in 0..self.iterations {
            for d in 0..d_count {
                let wd = self.w_d[d];
                let mag2 = wd.norm_sqr();
                if mag2 < self.weight_guard * self.weight_guard {
                    self.guard_hits += 1;
                    continue;
                }
                let s_old = self.basis.column(d);
                let mut others = effective.clone();
                vector::axpy(-wd, &s_old, &mut others);
                let v_d = vector::scale(&stats.r_hat.mul_vec(&others), wd.conj());
                let rhs: Vec<Complex64> = stats
                    .p_hat
                    .iter()
                    .zip(&v_d)
                    .map(|(p, v)| p * wd.conj() - v)
                    .collect();
                let s_new = vector::scale(&chol.solve(&rhs), Complex64::new(1.0 / mag2, 0.0));
                ensure!(
                    vector::is_finite(&s_new),
                    "JIO column {d} became non-finite"
                );
                effective = others;
                vector::axpy(wd, &s_new, &mut effective);
                self.basis.set_column(d, &s_new);
            }
            let (r_bar, p_bar) = reduced_stats(stats, &self.basis)?;
            self.w_d = wiener_reduced(&r_bar, &p_bar)?.x;
            effective = self.effective();
        }
        Ok(())
    }
}

/// Pure-transition form of [`JioState::update`].
pub fn jio_update(mut state: JioState, stats: &ExpWindowStats) -> Result<JioState> {
    state.update(stats)?;
    Ok(state)
}
