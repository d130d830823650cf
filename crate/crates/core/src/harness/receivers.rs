//! Adaptive receivers driven one observation at a time.

use std::fmt;

use num_complex::Complex64;

use crate::dimred::{
    krylov_basis, BankScheme, JidfConfig, JidfState, JioState, DEFAULT_WEIGHT_GUARD,
};
use crate::error::{ensure, Result};
use crate::estimators::{mvdr_solve, reduced_stats, wiener_reduced, ExpWindowStats};
use crate::numerics::{solve_hermitian, vector, ComplexMatrix, EigenTracker};
use crate::sysmodels::qpsk_decision;

/// Algorithm families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    /// Full-rank least squares (or full-rank MVDR).
    Full,
    Pc,
    Mswf,
    Jio,
    Jidf,
    /// Full-rank Wiener filter from the true covariance (BER) or the
    /// known-covariance MVDR beamformer (SINR).
    Mmse,
    /// Matched filter on the desired user's signature.
    Mf,
}

impl AlgoKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "full" => Self::Full,
            "pc" => Self::Pc,
            "mswf" => Self::Mswf,
            "jio" => Self::Jio,
            "jidf" => Self::Jidf,
            "mmse" | "mvdr-opt" => Self::Mmse,
            "mf" => Self::Mf,
            _ => return None,
        })
    }

    pub fn needs_rank(self) -> bool {
        matches!(self, Self::Pc | Self::Mswf | Self::Jio | Self::Jidf)
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Pc => "pc",
            Self::Mswf => "mswf",
            Self::Jio => "jio",
            Self::Jidf => "jidf",
            Self::Mmse => "mmse",
            Self::Mf => "mf",
        })
    }
}

/// One configured algorithm column.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub kind: AlgoKind,
    /// Model order `D` for the reduced-rank families.
    pub rank: usize,
    /// `T` for JIO and JIDF.
    pub iterations: usize,
    /// Interpolator length `I` for JIDF.
    pub interp: usize,
    /// JIDF branch count; `None` means `B = L`.
    pub branches: Option<usize>,
    pub bank: BankScheme,
    /// Gram–Schmidt the Krylov basis.
    pub orthonormalize: bool,
}

impl AlgorithmSpec {
    pub fn new(label: impl Into<String>, kind: AlgoKind) -> Self {
        Self {
            label: label.into(),
            kind,
            rank: 4,
            iterations: match kind {
                AlgoKind::Jio => 3,
                _ => 2,
            },
            interp: 3,
            branches: None,
            bank: BankScheme::Prestored,
            orthonormalize: true,
        }
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }

    fn jidf_config(&self, m: usize, lambda: f64) -> JidfConfig {
        let mut cfg = JidfConfig::new(m, self.rank, lambda);
        cfg.interp = self.interp;
        cfg.iterations = self.iterations;
        cfg.scheme = self.bank;
        if let Some(b) = self.branches {
            cfg.branches = b;
        }
        cfg
    }
}

/// Known quantities the oracle receivers may use.
#[derive(Debug, Clone)]
pub struct Oracle {
    /// True covariance `R` (or `R_s + R_I` per segment for beamforming).
    pub covariance: ComplexMatrix,
    /// `E[r d*]` or the steering vector of the signal of interest.
    pub target: Vec<Complex64>,
}

#[derive(Debug, Clone)]
enum Core {
    Full,
    Pc { tracker: EigenTracker },
    Mswf,
    Jio { state: JioState },
    Jidf { state: Box<JidfState> },
    Fixed,
}

/// Least-squares receiver: adapts on `(r, d)` pairs, with `d` the training
/// symbol or its own QPSK decision.
#[derive(Debug, Clone)]
pub struct Receiver {
    spec: AlgorithmSpec,
    stats: ExpWindowStats,
    core: Core,
    /// Effective full-rank filter `f = S_D w_D`, used for a-priori outputs.
    filter: Vec<Complex64>,
}

fn unit_filter(m: usize) -> Vec<Complex64> {
    vector::unit(m, 0)
}

impl Receiver {
    pub fn new(
        spec: &AlgorithmSpec,
        m: usize,
        lambda: f64,
        oracle: Option<&Oracle>,
    ) -> Result<Self> {
        if spec.kind.needs_rank() {
            ensure!(
                spec.rank >= 1 && spec.rank <= m,
                "algorithm `{}` has rank {} outside 1..={m}",
                spec.label,
                spec.rank
            );
        }
        let stats = ExpWindowStats::with_default_ridge(m, lambda)?;
        let (core, filter) = match spec.kind {
            AlgoKind::Full => (Core::Full, unit_filter(m)),
            AlgoKind::Pc => (
                Core::Pc {
                    tracker: EigenTracker::scaled_identity(m, stats.r_hat[(0, 0)].re),
                },
                unit_filter(m),
            ),
            AlgoKind::Mswf => (Core::Mswf, unit_filter(m)),
            AlgoKind::Jio => (
                Core::Jio {
                    state: JioState::with_guard(
                        m,
                        spec.rank,
                        spec.iterations,
                        DEFAULT_WEIGHT_GUARD,
                    )?,
                },
                unit_filter(m),
            ),
            AlgoKind::Jidf => (
                Core::Jidf {
                    state: Box::new(JidfState::new(spec.jidf_config(m, lambda))?),
                },
                unit_filter(m),
            ),
            AlgoKind::Mmse => {
                let o = oracle_for(spec, oracle, m)?;
                (Core::Fixed, solve_hermitian(&o.covariance, &o.target)?.x)
            }
            AlgoKind::Mf => {
                let o = oracle_for(spec, oracle, m)?;
                (Core::Fixed, o.target.clone())
            }
        };
        Ok(Self {
            spec: spec.clone(),
            stats,
            core,
            filter,
        })
    }

    pub fn spec(&self) -> &AlgorithmSpec {
        &self.spec
    }

    /// Current effective filter.
    pub fn filter(&self) -> &[Complex64] {
        &self.filter
    }

    /// Processes one observation and returns the a-priori output. With
    /// `training = None` the receiver adapts on its own decision.
    pub fn step(&mut self, r: &[Complex64], training: Option<Complex64>) -> Result<Complex64> {
        ensure!(
            r.len() == self.stats.dim(),
            "observation has length {} but receiver `{}` expects {}",
            r.len(),
            self.spec.label,
            self.stats.dim()
        );
        if let Core::Jidf { state } = &mut self.core {
            let window = state.padded_window(r);
            let out = match training {
                Some(d) => state.step_with(&window, |_| d)?,
                None => state.step_with(&window, qpsk_decision)?,
            };
            self.filter = state.filter()?.effective();
            return Ok(out.prior);
        }
        let x = vector::dot(&self.filter, r);
        if matches!(self.core, Core::Fixed) {
            return Ok(x);
        }
        let d = training.unwrap_or_else(|| qpsk_decision(x));
        self.stats.update(r, d)?;
        let m = self.stats.dim();
        let rank = self.spec.rank;
        self.filter = match &mut self.core {
            Core::Full => solve_hermitian(&self.stats.r_hat, &self.stats.p_hat)?.x,
            Core::Pc { tracker } => {
                tracker.update(self.stats.lambda, r)?;
                reduced_filter(&self.stats, &tracker.principal(rank))?
            }
            Core::Mswf => {
                if vector::norm_sqr(&self.stats.p_hat) > 0.0 {
                    let basis = krylov_basis(
                        &self.stats.r_hat,
                        &self.stats.p_hat,
                        rank,
                        self.spec.orthonormalize,
                    )?;
                    reduced_filter(&self.stats, basis.subspace.matrix())?
                } else {
                    unit_filter(m)
                }
            }
            Core::Jio { state } => {
                state.update(&self.stats)?;
                state.effective()
            }
            Core::Jidf { .. } | Core::Fixed => unreachable!("handled above"),
        };
        Ok(x)
    }
}

fn oracle_for<'a>(
    spec: &AlgorithmSpec,
    oracle: Option<&'a Oracle>,
    m: usize,
) -> Result<&'a Oracle> {
    let o = oracle.ok_or_else(|| {
        crate::Error::Precondition(format!(
            "algorithm `{}` needs the true channel, which this scenario does not provide",
            spec.label
        ))
    })?;
    ensure!(
        o.target.len() == m && o.covariance.rows() == m,
        "oracle dimensions do not match M={m}"
    );
    Ok(o)
}

fn reduced_filter(stats: &ExpWindowStats, s_d: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let (r_bar, p_bar) = reduced_stats(stats, s_d)?;
    let w = wiener_reduced(&r_bar, &p_bar)?.x;
    Ok(s_d.mul_vec(&w))
}

/// Minimum-variance beamformer adapting on snapshots under a unit-gain
/// constraint toward a steering vector.
#[derive(Debug, Clone)]
pub struct Beamformer {
    spec: AlgorithmSpec,
    stats: ExpWindowStats,
    core: Core,
    steering: Vec<Complex64>,
    filter: Vec<Complex64>,
}

impl Beamformer {
    pub fn new(spec: &AlgorithmSpec, steering: &[Complex64], lambda: f64) -> Result<Self> {
        let m = steering.len();
        if spec.kind.needs_rank() {
            ensure!(
                spec.rank >= 1 && spec.rank <= m,
                "algorithm `{}` has rank {} outside 1..={m}",
                spec.label,
                spec.rank
            );
        }
        let stats = ExpWindowStats::with_default_ridge(m, lambda)?;
        let core = match spec.kind {
            AlgoKind::Full => Core::Full,
            AlgoKind::Pc => Core::Pc {
                tracker: EigenTracker::scaled_identity(m, stats.r_hat[(0, 0)].re),
            },
            AlgoKind::Mswf => Core::Mswf,
            AlgoKind::Jio => Core::Jio {
                state: JioState::with_guard(m, spec.rank, spec.iterations, DEFAULT_WEIGHT_GUARD)?,
            },
            AlgoKind::Jidf => Core::Jidf {
                state: Box::new(JidfState::new(spec.jidf_config(m, lambda))?),
            },
            AlgoKind::Mmse | AlgoKind::Mf => Core::Fixed,
        };
        let filter = vector::scale(steering, Complex64::new(1.0 / m as f64, 0.0));
        Ok(Self {
            spec: spec.clone(),
            stats,
            core,
            steering: steering.to_vec(),
            filter,
        })
    }

    pub fn spec(&self) -> &AlgorithmSpec {
        &self.spec
    }

    pub fn filter(&self) -> &[Complex64] {
        &self.filter
    }

    /// Sets the fixed filter of the oracle beamformer from a known covariance.
    pub fn set_known_covariance(&mut self, r: &ComplexMatrix) -> Result<()> {
        ensure!(
            matches!(self.core, Core::Fixed),
            "only the known-covariance beamformer accepts a covariance"
        );
        self.filter = mvdr_solve(r, &self.steering)?.x;
        Ok(())
    }

    /// Absorbs one snapshot and refreshes the filter; returns the a-priori output.
    pub fn step(&mut self, r: &[Complex64]) -> Result<Complex64> {
        let m = self.steering.len();
        ensure!(
            r.len() == m,
            "snapshot has length {} but the array has {m}",
            r.len()
        );
        let x = vector::dot(&self.filter, r);
        if let Core::Jidf { state } = &mut self.core {
            let window = state.padded_window(r);
            state.step_mvdr(&window, &self.steering)?;
            self.filter = state.filter()?.effective();
            return Ok(x);
        }
        if matches!(self.core, Core::Fixed) {
            return Ok(x);
        }
        let zero = Complex64::new(0.0, 0.0);
        self.stats.update(r, zero)?;
        let rank = self.spec.rank;
        self.filter = match &mut self.core {
            Core::Full => mvdr_solve(&self.stats.r_hat, &self.steering)?.x,
            Core::Pc { tracker } => {
                tracker.update(self.stats.lambda, r)?;
                mvdr_filter(&self.stats.r_hat, &tracker.principal(rank), &self.steering)?
            }
            Core::Mswf => {
                let basis = krylov_basis(&self.stats.r_hat, &self.steering, rank, true)?;
                mvdr_filter(&self.stats.r_hat, basis.subspace.matrix(), &self.steering)?
            }
            Core::Jio { state } => {
                // constrained variant: the steering vector takes the role of p̂
                let mut constrained = self.stats.clone();
                constrained.p_hat = self.steering.clone();
                state.update(&constrained)?;
                let f = state.effective();
                let gain = vector::dot(&f, &self.steering);
                ensure!(
                    gain.norm() > 0.0,
                    "JIO beamformer lost the signal of interest"
                );
                vector::scale(&f, Complex64::new(1.0, 0.0) / gain.conj())
            }
            Core::Jidf { .. } | Core::Fixed => unreachable!("handled above"),
        };
        Ok(x)
    }
}

fn mvdr_filter(
    r: &ComplexMatrix,
    s_d: &ComplexMatrix,
    steering: &[Complex64],
) -> Result<Vec<Complex64>> {
    let a_bar = s_d.adjoint_mul_vec(steering);
    let w = mvdr_solve(&r.congruence(s_d), &a_bar)?.x;
    Ok(s_d.mul_vec(&w))
}
