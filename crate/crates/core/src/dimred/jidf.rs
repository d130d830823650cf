//! Joint interpolation, switched decimation and reduced-rank filtering.
//!
//! The observation is first interpolated by a short filter `v` acting on the
//! Hankel window `ℜ_o`, then decimated to `D = M/L` samples by one of `B`
//! candidate patterns, then filtered by `w_D`:
//!
//! ```text
//! x_b = w_Dᴴ D_b ℜ_o v* = vᴴ u_b,   u_b = ℜ_oᵀ D_bᵀ w_D*
//! ```
//!
//! Each step picks the branch with the smallest instantaneous error and
//! refines `v` and `w_D` by alternating least squares on their own
//! exponentially weighted statistics.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure, Result};
use crate::estimators::{mvdr_solve, ExpWindowStats, DEFAULT_INIT_RIDGE};
use crate::numerics::{hankel_window, solve_hermitian, vector, ComplexMatrix};

use super::{Method, ReducedRankFilter, Subspace};

/// Largest bank the exhaustive scheme will enumerate.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 10_000;

/// Offsets `γ_j` of the single nonzero entry in each row of `D_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimationPattern {
    pub gammas: Vec<usize>,
}

impl DecimationPattern {
    /// `D_b x`: the entries of `x` at the pattern's offsets.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.gammas.iter().map(|&g| x[g]).collect()
    }

    /// The `D×M` 0/1 selection matrix.
    pub fn matrix(&self, m: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.gammas.len(), m);
        for (row, &g) in self.gammas.iter().enumerate() {
            out[(row, g)] = Complex64::new(1.0, 0.0);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankScheme {
    /// Pattern `b` uses `γ_j = (j−1)L + (b−1)`.
    Prestored,
    /// Each pattern draws `D` distinct sorted offsets uniformly.
    Random { seed: u64 },
    /// Every increasing `D`-subset of `0..M`.
    Exhaustive,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Builds a bank of decimation patterns for `D = M/L`. The exhaustive scheme
/// ignores `b` and enumerates all `C(M, D)` patterns up to
/// [`DEFAULT_EXHAUSTIVE_CAP`].
pub fn build_decimation_bank(
    m: usize,
    l: usize,
    b: usize,
    scheme: BankScheme,
) -> Result<Vec<DecimationPattern>> {
    build_decimation_bank_capped(m, l, b, scheme, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn build_decimation_bank_capped(
    m: usize,
    l: usize,
    b: usize,
    scheme: BankScheme,
    cap: usize,
) -> Result<Vec<DecimationPattern>> {
    ensure!(m >= 1 && l >= 1, "decimation needs M >= 1 and L >= 1");
    ensure!(
        m.is_multiple_of(l),
        "decimation factor L={l} does not divide M={m}"
    );
    let d = m / l;
    match scheme {
        BankScheme::Prestored => {
            ensure!(b >= 1, "bank needs at least one branch");
            ensure!(
                b <= l,
                "prestored bank supports at most L={l} branches, requested {b}"
            );
            Ok((0..b)
                .map(|branch| DecimationPattern {
                    gammas: (0..d).map(|j| j * l + branch).collect(),
                })
                .collect())
        }
        BankScheme::Random { seed } => {
            ensure!(b >= 1, "bank needs at least one branch");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..b)
                .map(|_| {
                    let mut gammas = sample(&mut rng, m, d).into_vec();
                    gammas.sort_unstable();
                    DecimationPattern { gammas }
                })
                .collect())
        }
        BankScheme::Exhaustive => {
            let count = binomial(m, d);
            ensure!(
                count.is_some_and(|c| c <= cap),
                "exhaustive bank C({m},{d}) exceeds the cap of {cap} patterns"
            );
            let mut out = Vec::with_capacity(count.unwrap_or(0));
            let mut idx: Vec<usize> = (0..d).collect();
            loop {
                out.push(DecimationPattern {
                    gammas: idx.clone(),
                });
                // next combination in lexicographic order
                let mut pos = d;
                while pos > 0 && idx[pos - 1] == m - d + pos - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                idx[pos - 1] += 1;
                for k in pos..d {
                    idx[k] = idx[k - 1] + 1;
                }
            }
            Ok(out)
        }
    }
}

/// Hyperparameters of a JIDF filter.
#[derive(Debug, Clone, PartialEq)]
pub struct JidfConfig {
    /// Observation dimension `M`.
    pub m: usize,
    /// Reduced rank `D`; must divide `M`.
    pub rank: usize,
    /// Interpolator length `I`.
    pub interp: usize,
    /// Branch count `B` (ignored by the exhaustive scheme).
    pub branches: usize,
    /// Alternating iterations `T` per time step.
    pub iterations: usize,
    pub scheme: BankScheme,
    pub lambda: f64,
    pub init_ridge: f64,
}

impl JidfConfig {
    /// `I = 3`, prestored bank with `B = L`, `T = 2`.
    pub fn new(m: usize, rank: usize, lambda: f64) -> Self {
        let branches = if rank >= 1 && m.is_multiple_of(rank) {
            m / rank
        } else {
            1
        };
        Self {
            m,
            rank,
            interp: 3,
            branches,
            iterations: 2,
            scheme: BankScheme::Prestored,
            lambda,
            init_ridge: DEFAULT_INIT_RIDGE,
        }
    }

    pub fn decimation_factor(&self) -> usize {
        self.m / self.rank
    }
}

/// Result of one JIDF time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JidfOutput {
    /// Output of the filter in use before the step (previous branch).
    pub prior: Complex64,
    /// Output of the newly selected branch before adaptation.
    pub selected: Complex64,
    /// `vᴴu` after adaptation.
    pub x: Complex64,
    /// A-priori error of the selected branch.
    pub e: Complex64,
    /// Desired value used for adaptation.
    pub desired: Complex64,
    /// Selected branch, zero-based.
    pub branch: usize,
}

/// Interpolator, decimation bank, reduced filter and their statistics.
#[derive(Debug, Clone)]
pub struct JidfState {
    cfg: JidfConfig,
    v: Vec<Complex64>,
    bank: Vec<DecimationPattern>,
    w_d: Vec<Complex64>,
    stats_u: ExpWindowStats,
    stats_d: ExpWindowStats,
    last_branch: Option<usize>,
    branch_counts: Vec<u64>,
    branch_errors: Vec<f64>,
}

impl JidfState {
    /// `v = e₁`, `w_D = e₁`, statistics at `δ₀·I`.
    pub fn new(cfg: JidfConfig) -> Result<Self> {
        ensure!(cfg.m >= 1, "JIDF dimension must be >= 1");
        ensure!(
            cfg.rank >= 1 && cfg.rank <= cfg.m && cfg.m.is_multiple_of(cfg.rank),
            "JIDF rank D={} must divide M={}",
            cfg.rank,
            cfg.m
        );
        ensure!(cfg.interp >= 1, "interpolator length must be >= 1");
        ensure!(
            cfg.iterations >= 1,
            "JIDF needs at least one iteration per step"
        );
        let bank = build_decimation_bank(cfg.m, cfg.decimation_factor(), cfg.branches, cfg.scheme)?;
        Self::with_bank(cfg, bank)
    }

    pub fn with_bank(cfg: JidfConfig, bank: Vec<DecimationPattern>) -> Result<Self> {
        ensure!(
            !bank.is_empty(),
            "decimation bank must hold at least one pattern"
        );
        for p in &bank {
            ensure!(
                p.gammas.len() == cfg.rank && p.gammas.iter().all(|&g| g < cfg.m),
                "decimation pattern {:?} is not a valid {}-of-{} selection",
                p.gammas,
                cfg.rank,
                cfg.m
            );
        }
        let stats_u = ExpWindowStats::new(cfg.interp, cfg.lambda, cfg.init_ridge)?;
        let stats_d = ExpWindowStats::new(cfg.rank, cfg.lambda, cfg.init_ridge)?;
        Ok(Self {
            v: vector::unit(cfg.interp, 0),
            w_d: vector::unit(cfg.rank, 0),
            branch_counts: vec![0; bank.len()],
            branch_errors: vec![0.0; bank.len()],
            bank,
            stats_u,
            stats_d,
            last_branch: None,
            cfg,
        })
    }

    pub fn config(&self) -> &JidfConfig {
        &self.cfg
    }

    pub fn interpolator(&self) -> &[Complex64] {
        &self.v
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.w_d
    }

    pub fn bank(&self) -> &[DecimationPattern] {
        &self.bank
    }

    pub fn last_branch(&self) -> Option<usize> {
        self.last_branch
    }

    /// How many times each branch has been selected.
    pub fn branch_counts(&self) -> &[u64] {
        &self.branch_counts
    }

    /// `|e_b|²` (or the MVDR branch metric) for every branch at the last step.
    pub fn branch_errors(&self) -> &[f64] {
        &self.branch_errors
    }

    pub fn window_len(&self) -> usize {
        self.cfg.m + self.cfg.interp - 1
    }

    /// Window built from `r` followed by `I − 1` zeros.
    pub fn padded_window(&self, r: &[Complex64]) -> Vec<Complex64> {
        let mut w = r.to_vec();
        w.resize(r.len() + self.cfg.interp - 1, Complex64::new(0.0, 0.0));
        w
    }

    /// `S_D` of branch `b`: column `j` holds `v` starting at row `γ_j`,
    /// clipped at the last row.
    pub fn transformation(&self, branch: usize) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.cfg.m, self.cfg.rank);
        for (j, &g) in self.bank[branch].gammas.iter().enumerate() {
            for (k, vk) in self.v.iter().enumerate() {
                if g + k < self.cfg.m {
                    s[(g + k, j)] = *vk;
                }
            }
        }
        s
    }

    /// Filter of the most recently selected branch (branch 0 before any step).
    pub fn filter(&self) -> Result<ReducedRankFilter> {
        let b = self.last_branch.unwrap_or(0);
        ReducedRankFilter::new(
            Subspace::new(self.transformation(b), Method::Jidf)?,
            self.w_d.clone(),
        )
    }

    fn check_window(&self, window: &[Complex64]) -> Result<()> {
        ensure!(
            window.len() >= self.window_len(),
            "JIDF window holds {} samples but M+I-1 = {} are needed",
            window.len(),
            self.window_len()
        );
        Ok(())
    }

    /// `ℜ_o v*`, the interpolated observation.
    fn interpolate(&self, hankel: &ComplexMatrix) -> Vec<Complex64> {
        hankel.mul_vec(&vector::conj(&self.v))
    }

    /// `ℜ_oᵀ D_bᵀ w_D*`.
    fn interp_regressor(&self, hankel: &ComplexMatrix, branch: usize) -> Vec<Complex64> {
        let mut u = vec![Complex64::new(0.0, 0.0); self.cfg.interp];
        for (&g, w) in self.bank[branch].gammas.iter().zip(&self.w_d) {
            let wc = w.conj();
            for (k, uk) in u.iter_mut().enumerate() {
                *uk += hankel[(g, k)] * wc;
            }
        }
        u
    }

    fn record_branch(&mut self, best: usize, metrics: Vec<f64>) {
        self.branch_errors = metrics;
        self.branch_counts[best] += 1;
        self.last_branch = Some(best);
    }

    /// One least-squares step. `desired` maps the output of the filter in
    /// use (the previously selected branch, branch 0 at the start) to the
    /// target: a constant during training, a decision in decision-directed
    /// mode. Every branch is then scored against that one target.
    pub fn step_with(
        &mut self,
        window: &[Complex64],
        desired: impl Fn(Complex64) -> Complex64,
    ) -> Result<JidfOutput> {
        self.check_window(window)?;
        let hankel = hankel_window(window, self.cfg.m, self.cfg.interp)?;
        let interpolated = self.interpolate(&hankel);

        let outputs: Vec<Complex64> = self
            .bank
            .iter()
            .map(|pattern| vector::dot(&self.w_d, &pattern.apply(&interpolated)))
            .collect();
        let prior = outputs[self.last_branch.unwrap_or(0)];
        let d = desired(prior);
        let mut best = 0;
        let mut best_err = f64::INFINITY;
        let mut metrics = Vec::with_capacity(self.bank.len());
        for (b, x_b) in outputs.iter().enumerate() {
            let err = (d - x_b).norm_sqr();
            metrics.push(err);
            if err < best_err {
                best = b;
                best_err = err;
            }
        }
        ensure!(best_err.is_finite(), "JIDF branch errors are not finite");
        self.record_branch(best, metrics);
        let selected = outputs[best];

        let base_u = self.stats_u.clone();
        let base_d = self.stats_d.clone();
        let mut r_d = self.bank[best].apply(&interpolated);
        self.stats_u
            .update(&self.interp_regressor(&hankel, best), d)?;
        self.stats_d.update(&r_d, d)?;

        for _ in 0..self.cfg.iterations {
            if self.cfg.interp > 1 {
                self.v = solve_hermitian(&self.stats_u.r_hat, &self.stats_u.p_hat)?.x;
                r_d = self.bank[best].apply(&self.interpolate(&hankel));
                self.stats_d = base_d.clone();
                self.stats_d.update(&r_d, d)?;
            }
            self.w_d = solve_hermitian(&self.stats_d.r_hat, &self.stats_d.p_hat)?.x;
            let u = self.interp_regressor(&hankel, best);
            self.stats_u = base_u.clone();
            self.stats_u.update(&u, d)?;
        }
        ensure!(
            vector::is_finite(&self.v) && vector::is_finite(&self.w_d),
            "JIDF parameters became non-finite"
        );
        let x = vector::dot(&self.w_d, &r_d);
        Ok(JidfOutput {
            prior,
            selected,
            x,
            e: d - selected,
            desired: d,
            branch: best,
        })
    }

    /// One minimum-variance step under the distortionless constraint
    /// `w_Dᴴ D_b ℜ(a) v* = 1` toward `steering` (`M` entries, zero-padded
    /// like the observation). Branches are ranked by output power relative
    /// to their constraint response.
    pub fn step_mvdr(
        &mut self,
        window: &[Complex64],
        steering: &[Complex64],
    ) -> Result<JidfOutput> {
        self.check_window(window)?;
        ensure!(
            steering.len() == self.cfg.m,
            "steering vector has length {} but M = {}",
            steering.len(),
            self.cfg.m
        );
        let hankel = hankel_window(window, self.cfg.m, self.cfg.interp)?;
        let a_hankel = hankel_window(&self.padded_window(steering), self.cfg.m, self.cfg.interp)?;
        let interpolated = self.interpolate(&hankel);
        let a_interp = self.interpolate(&a_hankel);

        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        let mut metrics = Vec::with_capacity(self.bank.len());
        let mut selected = Complex64::new(0.0, 0.0);
        let in_use = self.last_branch.unwrap_or(0);
        let mut prior = selected;
        for (b, pattern) in self.bank.iter().enumerate() {
            let x_b = vector::dot(&self.w_d, &pattern.apply(&interpolated));
            let c_b = vector::dot(&self.w_d, &pattern.apply(&a_interp)).norm_sqr();
            let metric = if c_b > 0.0 {
                x_b.norm_sqr() / c_b
            } else {
                f64::INFINITY
            };
            metrics.push(metric);
            if b == in_use {
                prior = x_b;
            }
            if metric < best_metric {
                best = b;
                best_metric = metric;
                selected = x_b;
            }
        }
        self.record_branch(best, metrics);
        let zero = Complex64::new(0.0, 0.0);

        let base_u = self.stats_u.clone();
        let base_d = self.stats_d.clone();
        let mut r_d = self.bank[best].apply(&interpolated);
        self.stats_u
            .update(&self.interp_regressor(&hankel, best), zero)?;
        self.stats_d.update(&r_d, zero)?;

        for _ in 0..self.cfg.iterations {
            if self.cfg.interp > 1 {
                let a_u = self.interp_regressor(&a_hankel, best);
                self.v = mvdr_solve(&self.stats_u.r_hat, &a_u)?.x;
                r_d = self.bank[best].apply(&self.interpolate(&hankel));
                self.stats_d = base_d.clone();
                self.stats_d.update(&r_d, zero)?;
            }
            let a_bar = self.bank[best].apply(&self.interpolate(&a_hankel));
            self.w_d = mvdr_solve(&self.stats_d.r_hat, &a_bar)?.x;
            let u = self.interp_regressor(&hankel, best);
            self.stats_u = base_u.clone();
            self.stats_u.update(&u, zero)?;
        }
        ensure!(
            vector::is_finite(&self.v) && vector::is_finite(&self.w_d),
            "JIDF parameters became non-finite"
        );
        let x = vector::dot(&self.w_d, &r_d);
        Ok(JidfOutput {
            prior,
            selected,
            x,
            e: -selected,
            desired: zero,
            branch: best,
        })
    }
}

/// One least-squares step with a known desired value `d`.
pub fn jidf_step(state: &mut JidfState, window: &[Complex64], d: Complex64) -> Result<JidfOutput> {
    state.step_with(window, |_| d)
}

/// One least-squares step with a branch-dependent desired value.
pub fn jidf_step_with(
    state: &mut JidfState,
    window: &[Complex64],
    desired: impl Fn(Complex64) -> Complex64,
) -> Result<JidfOutput> {
    state.step_with(window, desired)
}
