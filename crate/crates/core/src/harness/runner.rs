use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dimred::{select_model_order, trailing_error_power};
use crate::error::{ensure, Error, Result};
use crate::sysmodels::{
    bit_errors, gen_cdma_burst_with_rng, gen_ula_snapshots_with_rng, optimum_sinr, qpsk_decision,
    sinr_of, CdmaScenario, UlaScenario,
};

use super::config::{ExperimentConfig, Scenario, Sweep};
use super::metrics::{Metric, MetricSeries};
use super::receivers::{AlgoKind, AlgorithmSpec, Beamformer, Oracle, Receiver};

/// Label of the analytic optimum column added to SINR series.
pub const BOUND_LABEL: &str = "bound";

/// Random stream of Monte Carlo run `run`: the master seed selects the key
/// and the run index the stream, so a run's draws do not depend on how runs
/// are scheduled across workers.
pub fn run_rng(master_seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run as u64);
    rng
}

fn pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| Error::pre(format!("cannot start the worker pool: {e}")))
}

/// Runs `job` for every run index on the configured pool and returns the
/// results in run order.
fn for_each_run<T: Send>(
    cfg: &ExperimentConfig,
    job: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let pool = pool(cfg)?;
    let results: Vec<Result<T>> =
        pool.install(|| (0..cfg.runs).into_par_iter().map(&job).collect());
    results.into_iter().collect()
}

fn cdma_scenario(cfg: &ExperimentConfig) -> Result<&CdmaScenario> {
    match &cfg.scenario {
        Scenario::Cdma(s) => Ok(s),
        Scenario::Ula(_) => Err(Error::config(
            "scenario.kind",
            "this experiment needs a cdma scenario",
        )),
    }
}

fn ula_scenario(cfg: &ExperimentConfig) -> Result<&UlaScenario> {
    match &cfg.scenario {
        Scenario::Ula(s) => Ok(s),
        Scenario::Cdma(_) => Err(Error::config(
            "scenario.kind",
            "this experiment needs a ula scenario",
        )),
    }
}

/// Bit errors per algorithm and symbol of one run; symbols inside the
/// training period count as zero.
fn ber_run(cfg: &ExperimentConfig, scenario: &CdmaScenario, run: usize) -> Result<Vec<Vec<u8>>> {
    let mut rng = run_rng(cfg.seed, run);
    let (burst, truth) = gen_cdma_burst_with_rng(scenario, cfg.symbols, &mut rng)?;
    let oracle = Oracle {
        covariance: truth.covariance(),
        target: truth.cross_correlation(),
    };
    let m = scenario.dim();
    let mut receivers = cfg
        .algorithms
        .iter()
        .map(|a| {
            if a.kind == AlgoKind::Mf {
                let mf = Oracle {
                    covariance: oracle.covariance.clone(),
                    target: truth.signatures[0].current.clone(),
                };
                Receiver::new(a, m, cfg.lambda, Some(&mf))
            } else {
                Receiver::new(a, m, cfg.lambda, Some(&oracle))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut errors = vec![vec![0u8; cfg.symbols]; receivers.len()];
    for (i, (r, &d)) in burst.observations.iter().zip(&burst.desired).enumerate() {
        let training = (i < cfg.training).then_some(d);
        for (rx, errs) in receivers.iter_mut().zip(errors.iter_mut()) {
            let x = rx.step(r, training)?;
            if i >= cfg.training {
                errs[i] = bit_errors(qpsk_decision(x), d) as u8;
            }
        }
    }
    Ok(errors)
}

/// Sums per-symbol errors over runs, in run order.
fn accumulate(per_run: Vec<Vec<Vec<u8>>>, algos: usize, symbols: usize) -> Vec<Vec<u64>> {
    let mut total = vec![vec![0u64; symbols]; algos];
    for run in per_run {
        for (acc, errs) in total.iter_mut().zip(run) {
            for (a, e) in acc.iter_mut().zip(errs) {
                *a += u64::from(e);
            }
        }
    }
    total
}

fn mean_ber(errors: &[u64], range: std::ops::Range<usize>, runs: usize) -> Option<f64> {
    if range.is_empty() {
        return None;
    }
    let bits = 2 * runs * range.len();
    let count: u64 = errors[range].iter().sum();
    Some(count as f64 / bits as f64)
}

/// BER learning curves or BER against a swept scenario parameter, for the
/// desired user and only over decision-directed symbols.
///
/// With [`Sweep::Symbols`] the axis holds the symbol count at the end of each
/// bin of `cfg.bin` symbols after training; otherwise each axis point is the
/// mean BER over symbols `eval_start..P`. Points without any evaluated symbol
/// are `None`.
pub fn run_ber_experiment(cfg: &ExperimentConfig) -> Result<MetricSeries> {
    cfg.validate()?;
    let base = cdma_scenario(cfg)?;
    let n_alg = cfg.algorithms.len();
    let p = cfg.symbols;
    let labels: Vec<&str> = cfg.algorithms.iter().map(|a| a.label.as_str()).collect();
    match &cfg.sweep {
        Sweep::Symbols => {
            let totals = accumulate(for_each_run(cfg, |run| ber_run(cfg, base, run))?, n_alg, p);
            let mut axis = Vec::new();
            let mut ranges = Vec::new();
            let mut start = cfg.training;
            while start < p {
                let end = (start + cfg.bin).min(p);
                axis.push(end as f64);
                ranges.push(start..end);
                start = end;
            }
            if ranges.is_empty() {
                axis.push(p as f64);
                ranges.push(p..p);
            }
            let mut series = MetricSeries::new("symbols", axis, Metric::Ber, cfg.runs);
            for (label, errs) in labels.iter().zip(&totals) {
                let values = ranges
                    .iter()
                    .map(|r| mean_ber(errs, r.clone(), cfg.runs))
                    .collect();
                series.push_column(*label, values)?;
            }
            Ok(series)
        }
        Sweep::Snr(points) => {
            let scenarios: Vec<CdmaScenario> = points
                .iter()
                .map(|&snr| CdmaScenario {
                    ebn0_db: snr,
                    ..base.clone()
                })
                .collect();
            swept_ber(cfg, "ebn0_db", points.clone(), &scenarios, &labels)
        }
        Sweep::Users(points) => {
            let scenarios: Vec<CdmaScenario> = points
                .iter()
                .map(|&k| CdmaScenario {
                    users: k,
                    ..base.clone()
                })
                .collect();
            let axis = points.iter().map(|&k| k as f64).collect();
            swept_ber(cfg, "users", axis, &scenarios, &labels)
        }
    }
}

fn swept_ber(
    cfg: &ExperimentConfig,
    axis_label: &str,
    axis: Vec<f64>,
    scenarios: &[CdmaScenario],
    labels: &[&str],
) -> Result<MetricSeries> {
    for s in scenarios {
        s.validate()
            .map_err(|e| Error::config("run.sweep", e.to_string()))?;
    }
    let mut columns = vec![Vec::with_capacity(axis.len()); labels.len()];
    let window = cfg.eval_start()..cfg.symbols;
    for s in scenarios {
        let totals = accumulate(
            for_each_run(cfg, |run| ber_run(cfg, s, run))?,
            labels.len(),
            cfg.symbols,
        );
        for (col, errs) in columns.iter_mut().zip(&totals) {
            col.push(mean_ber(errs, window.clone(), cfg.runs));
        }
    }
    let mut series = MetricSeries::new(axis_label, axis, Metric::Ber, cfg.runs);
    for (label, col) in labels.iter().zip(columns) {
        series.push_column(*label, col)?;
    }
    Ok(series)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear SINR per algorithm and snapshot of one run, evaluated after the
/// snapshot has been absorbed, against the covariances of its segment.
fn sinr_run(cfg: &ExperimentConfig, scenario: &UlaScenario, run: usize) -> Result<Vec<Vec<f64>>> {
    let mut rng = run_rng(cfg.seed, run);
    let (burst, segments) = gen_ula_snapshots_with_rng(scenario, cfg.symbols, &mut rng)?;
    let steering = &segments[0].soi_steering;
    let mut formers = cfg
        .algorithms
        .iter()
        .map(|a| Beamformer::new(a, steering, cfg.lambda))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![vec![0.0; cfg.symbols]; formers.len()];
    for seg in &segments {
        let known = seg.r_s.add(&seg.r_i);
        for bf in formers.iter_mut() {
            if bf.spec().kind == AlgoKind::Mmse {
                bf.set_known_covariance(&known)?;
            }
        }
        for i in seg.start..seg.end {
            for (bf, col) in formers.iter_mut().zip(out.iter_mut()) {
                bf.step(&burst.observations[i])?;
                col[i] = sinr_of(bf.filter(), &seg.r_s, &seg.r_i)?;
            }
        }
    }
    Ok(out)
}

/// Mean SINR (dB of the run-averaged linear SINR) against the snapshot
/// index, plus a [`BOUND_LABEL`] column holding the optimum SINR of the
/// active segment.
pub fn run_sinr_experiment(cfg: &ExperimentConfig) -> Result<MetricSeries> {
    cfg.validate()?;
    let scenario = ula_scenario(cfg)?;
    let per_run = for_each_run(cfg, |run| sinr_run(cfg, scenario, run))?;
    let p = cfg.symbols;
    let mut sums = vec![vec![0.0; p]; cfg.algorithms.len()];
    for run in &per_run {
        for (acc, col) in sums.iter_mut().zip(run) {
            for (a, v) in acc.iter_mut().zip(col) {
                *a += v;
            }
        }
    }
    let axis = (1..=p).map(|i| i as f64).collect();
    let mut series = MetricSeries::new("snapshots", axis, Metric::SinrDb, cfg.runs);
    for (spec, acc) in cfg.algorithms.iter().zip(sums) {
        let values = acc
            .into_iter()
            .map(|s| Some(db(s / cfg.runs as f64)))
            .collect();
        series.push_column(spec.label.as_str(), values)?;
    }
    let mut bound = vec![None; p];
    for seg in scenario.segments(p)? {
        let value = db(optimum_sinr(seg.soi_power, &seg.soi_steering, &seg.r_i)?);
        for b in &mut bound[seg.start..seg.end] {
            *b = Some(value);
        }
    }
    series.push_column(BOUND_LABEL, bound)?;
    Ok(series)
}

/// Outcome of a model-order sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSweep {
    /// Criterion against `D`, one column per reduced-rank algorithm.
    pub series: MetricSeries,
    /// Selected order per algorithm label.
    pub selected: Vec<(String, usize)>,
}

/// Trailing a-priori squared error `|d − x|²` over the last
/// `cfg.order_window` symbols of each run, averaged over runs, for every
/// candidate order of every reduced-rank algorithm; orders the algorithm
/// cannot take are left empty.
pub fn run_order_sweep(cfg: &ExperimentConfig) -> Result<OrderSweep> {
    cfg.validate()?;
    let scenario = cdma_scenario(cfg)?;
    let m = scenario.dim();
    ensure!(!cfg.orders.is_empty(), "order sweep needs candidate orders");
    ensure!(
        cfg.order_window >= 1 && cfg.order_window <= cfg.symbols,
        "order window {} must lie in 1..={}",
        cfg.order_window,
        cfg.symbols
    );
    let algos: Vec<&AlgorithmSpec> = cfg
        .algorithms
        .iter()
        .filter(|a| a.kind.needs_rank())
        .collect();
    ensure!(
        !algos.is_empty(),
        "order sweep needs at least one reduced-rank algorithm"
    );
    let valid = |a: &AlgorithmSpec, d: usize| {
        d >= 1 && d <= m && (a.kind != AlgoKind::Jidf || m.is_multiple_of(d))
    };
    let per_run = for_each_run(cfg, |run| {
        let mut rng = run_rng(cfg.seed, run);
        let (burst, _) = gen_cdma_burst_with_rng(scenario, cfg.symbols, &mut rng)?;
        let mut out = vec![vec![None; cfg.orders.len()]; algos.len()];
        for (ai, a) in algos.iter().enumerate() {
            for (oi, &d) in cfg.orders.iter().enumerate() {
                if !valid(a, d) {
                    continue;
                }
                let spec = (*a).clone().with_rank(d);
                let mut rx = Receiver::new(&spec, m, cfg.lambda, None)?;
                let mut errors = Vec::with_capacity(cfg.symbols);
                for (i, (r, &sym)) in burst.observations.iter().zip(&burst.desired).enumerate() {
                    let x = rx.step(r, (i < cfg.training).then_some(sym))?;
                    errors.push(sym - x);
                }
                out[ai][oi] = Some(trailing_error_power(&errors, cfg.order_window)?);
            }
        }
        Ok(out)
    })?;
    let axis = cfg.orders.iter().map(|&d| d as f64).collect();
    let mut series = MetricSeries::new("rank", axis, Metric::Criterion, cfg.runs);
    let mut selected = Vec::new();
    for (ai, a) in algos.iter().enumerate() {
        let values: Vec<Option<f64>> = (0..cfg.orders.len())
            .map(|oi| {
                let mut sum = 0.0;
                for run in &per_run {
                    sum += run[ai][oi]?;
                }
                Some(sum / cfg.runs as f64)
            })
            .collect();
        let candidates: Vec<(usize, f64)> = cfg
            .orders
            .iter()
            .zip(&values)
            .filter_map(|(&d, v)| v.map(|v| (d, v)))
            .collect();
        if !candidates.is_empty() {
            selected.push((a.label.clone(), select_model_order(&candidates)?));
        }
        series.push_column(a.label.as_str(), values)?;
    }
    Ok(OrderSweep { series, selected })
}
