//! Deterministic Monte Carlo experiments over the CDMA and array scenarios.

mod config;
mod metrics;
mod receivers;
mod runner;
mod selftest;

pub use config::{load_config, parse_config, ExperimentConfig, Scenario, Sweep};
pub use metrics::{export_csv, parse_csv, CsvTable, Metric, MetricSeries, NO_DATA};
pub use receivers::{AlgoKind, AlgorithmSpec, Beamformer, Oracle, Receiver};
pub use runner::{
    run_ber_experiment, run_order_sweep, run_rng, run_sinr_experiment, OrderSweep, BOUND_LABEL,
};
pub use selftest::{run_selftest, SuiteReport};
