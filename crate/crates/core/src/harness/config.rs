//! Plain-text experiment descriptions.
//!
//! ```text
//! [scenario]
//! kind = cdma
//! users = 8
//!
//! [algorithms]
//! full = full
//! jidf = jidf d=4 interp=3 iters=2 bank=prestored
//!
//! [run]
//! symbols = 1500
//! training = 250
//! runs = 100
//! sweep = snr 0,4,8,12
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! checked; an unknown or malformed one is reported by its dotted name.

use std::collections::BTreeSet;
use std::path::Path;

use crate::dimred::BankScheme;
use crate::error::{Error, Result};
use crate::sysmodels::{from_broadside, CdmaScenario, ChangeEvent, Source, UlaScenario};

use super::receivers::{AlgoKind, AlgorithmSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Cdma(CdmaScenario),
    Ula(UlaScenario),
}

/// Axis swept by a BER experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Sweep {
    /// BER against the symbol index.
    #[default]
    Symbols,
    /// `E_b/N₀` values in dB.
    Snr(Vec<f64>),
    /// Numbers of users.
    Users(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Record size `P` (symbols or snapshots).
    pub symbols: usize,
    pub training: usize,
    pub runs: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Worker threads; `None` uses one per available core.
    pub workers: Option<usize>,
    pub sweep: Sweep,
    /// Symbols per point of a BER-vs-symbols curve.
    pub bin: usize,
    /// First symbol counted by swept BER points; defaults to `training`.
    pub eval_from: Option<usize>,
    /// Candidate model orders for an order sweep.
    pub orders: Vec<usize>,
    /// Trailing window of the order-selection criterion.
    pub order_window: usize,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, algorithms: Vec<AlgorithmSpec>) -> Self {
        Self {
            scenario,
            algorithms,
            symbols: 1500,
            training: 250,
            runs: 100,
            lambda: 0.998,
            seed: 1,
            workers: None,
            sweep: Sweep::Symbols,
            bin: 50,
            eval_from: None,
            orders: (1..=8).collect(),
            order_window: 200,
        }
    }

    /// Dimension `M` of the observations.
    pub fn dim(&self) -> usize {
        match &self.scenario {
            Scenario::Cdma(s) => s.dim(),
            Scenario::Ula(s) => s.sensors,
        }
    }

    pub fn eval_start(&self) -> usize {
        self.eval_from.unwrap_or(self.training)
    }

    /// Checks everything that can be checked before any run starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(key, msg));
        if self.runs == 0 {
            return bad("run.runs", "must be at least 1".into());
        }
        // beamforming runs have no training phase
        let cdma = matches!(self.scenario, Scenario::Cdma(_));
        if cdma && self.training > self.symbols {
            return bad(
                "run.training",
                format!("{} exceeds the record size {}", self.training, self.symbols),
            );
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad("run.lambda", format!("{} is outside (0, 1]", self.lambda));
        }
        if self.bin == 0 {
            return bad("run.bin", "must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("run.workers", "must be at least 1".into());
        }
        if cdma && self.eval_start() > self.symbols {
            return bad("run.eval_from", "lies beyond the record".into());
        }
        let mut seen = BTreeSet::new();
        for a in &self.algorithms {
            if !seen.insert(a.label.as_str()) {
                return bad(&format!("algorithms.{}", a.label), "duplicate label".into());
            }
        }
        let m = self.dim();
        match &self.scenario {
            Scenario::Cdma(s) => {
                s.validate()
                    .map_err(|e| Error::config("scenario", e.to_string()))?;
                if let Sweep::Users(list) = &self.sweep {
                    if list.contains(&0) {
                        return bad("run.sweep", "user counts must be positive".into());
                    }
                }
            }
            Scenario::Ula(s) => {
                s.segments(self.symbols)
                    .map_err(|e| Error::config("scenario", e.to_string()))?;
                if self.sweep != Sweep::Symbols {
                    return bad(
                        "run.sweep",
                        "array scenarios only run against snapshots".into(),
                    );
                }
            }
        }
        for a in &self.algorithms {
            let key = format!("algorithms.{}", a.label);
            if a.kind.needs_rank() && (a.rank == 0 || a.rank > m) {
                return bad(&key, format!("rank {} outside 1..={m}", a.rank));
            }
            if a.kind == AlgoKind::Jidf {
                if a.interp == 0 {
                    return bad(&key, "interp must be at least 1".into());
                }
                if !m.is_multiple_of(a.rank) {
                    return bad(&key, format!("rank {} does not divide M={m}", a.rank));
                }
            }
            if matches!(a.kind, AlgoKind::Jio | AlgoKind::Jidf) && a.iterations == 0 {
                return bad(&key, "iters must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[derive(Default)]
struct Raw {
    scenario: Vec<(String, String)>,
    algorithms: Vec<(String, String)>,
    run: Vec<(String, String)>,
}

fn split_sections(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    let mut section: Option<&str> = None;
    let mut seen = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !matches!(name, "scenario" | "algorithms" | "run") {
                return Err(Error::config(name, "unknown section"));
            }
            section = Some(match name {
                "scenario" => "scenario",
                "algorithms" => "algorithms",
                _ => "run",
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", n + 1), "expected `key = value`"))?;
        let key = key.trim().to_owned();
        let value = value.trim().to_owned();
        let sec =
            section.ok_or_else(|| Error::config(&key, "key appears before any section header"))?;
        let dotted = format!("{sec}.{key}");
        if !seen.insert(dotted.clone()) {
            return Err(Error::config(dotted, "duplicate key"));
        }
        let list = match sec {
            "scenario" => &mut raw.scenario,
            "algorithms" => &mut raw.algorithms,
            _ => &mut raw.run,
        };
        list.push((key, value));
    }
    Ok(raw)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// `bearing:power_db` pairs, bearings measured from broadside.
fn emitters(key: &str, value: &str) -> Result<Vec<Source>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (b, p) = item.split_once(':').unwrap_or((item, "0"));
            Ok(Source::interferer(
                from_broadside(num(key, b.trim())?),
                num(key, p.trim())?,
            ))
        })
        .collect()
}

fn parse_cdma(entries: &[(String, String)]) -> Result<CdmaScenario> {
    let mut s = CdmaScenario::default();
    for (key, value) in entries {
        let dotted = format!("scenario.{key}");
        let k = dotted.as_str();
        match key.as_str() {
            "kind" => {}
            "users" => s.users = num(k, value)?,
            "spreading" => s.spreading = num(k, value)?,
            "paths" => s.max_paths = num(k, value)?,
            "antennas" => s.antennas = num(k, value)?,
            "path_powers_db" => s.path_powers_db = list(k, value)?,
            "path_spacing" => {
                let v: Vec<usize> = list(k, value)?;
                if v.len() != 2 {
                    return Err(Error::config(k, "expected `min,max`"));
                }
                s.path_spacing = (v[0], v[1]);
            }
            "ebn0_db" => s.ebn0_db = num(k, value)?,
            "power_spread_db" => s.power_spread_db = num(k, value)?,
            _ => return Err(Error::config(k, "unknown key")),
        }
    }
    Ok(s)
}

fn parse_ula(entries: &[(String, String)]) -> Result<UlaScenario> {
    let mut sensors = 32usize;
    let mut snr_db = 10.0;
    let mut preset = false;
    let mut soi: Option<(f64, f64)> = None;
    let mut interferers: Option<Vec<Source>> = None;
    let mut change_at: Option<usize> = None;
    let mut change_add = Vec::new();
    let mut change_remove: Vec<f64> = Vec::new();
    for (key, value) in entries {
        let dotted = format!("scenario.{key}");
        let k = dotted.as_str();
        match key.as_str() {
            "kind" => {}
            "sensors" => sensors = num(k, value)?,
            "snr_db" => snr_db = num(k, value)?,
            "preset" => {
                preset = match value.as_str() {
                    "change" => true,
                    "none" => false,
                    _ => return Err(Error::config(k, "expected `change` or `none`")),
                }
            }
            "soi" => {
                let s = emitters(k, value)?;
                if s.len() != 1 {
                    return Err(Error::config(k, "expected one `bearing:power_db`"));
                }
                soi = Some((s[0].doa_deg, s[0].power_db));
            }
            "interferers" => interferers = Some(emitters(k, value)?),
            "change_at" => change_at = Some(num(k, value)?),
            "change_add" => change_add = emitters(k, value)?,
            "change_remove" => {
                change_remove = list::<f64>(k, value)?
                    .into_iter()
                    .map(from_broadside)
                    .collect()
            }
            _ => return Err(Error::config(k, "unknown key")),
        }
    }
    let mut s = if preset {
        UlaScenario::interference_change(sensors, snr_db, 0)
    } else {
        UlaScenario {
            sensors,
            sources: vec![Source {
                doa_deg: 90.0,
                power_db: 0.0,
                soi: true,
            }],
            noise_variance: 10f64.powf(-snr_db / 10.0),
            events: Vec::new(),
            seed: 0,
        }
    };
    if let Some((doa, power)) = soi {
        s.sources.retain(|x| !x.soi);
        s.sources.insert(
            0,
            Source {
                doa_deg: doa,
                power_db: power,
                soi: true,
            },
        );
    }
    if let Some(list) = interferers {
        s.sources.retain(|x| x.soi);
        s.sources.extend(list);
    }
    if let Some(at) = change_at {
        s.events = vec![ChangeEvent {
            at,
            add: change_add,
            remove_doas_deg: change_remove,
        }];
    } else if !change_add.is_empty() || !change_remove.is_empty() {
        return Err(Error::config(
            "scenario.change_at",
            "required by change_add/change_remove",
        ));
    }
    Ok(s)
}

fn parse_algorithm(label: &str, value: &str) -> Result<AlgorithmSpec> {
    let key = format!("algorithms.{label}");
    if label.is_empty() || label.contains(',') {
        return Err(Error::config(
            &key,
            "labels must be non-empty and comma-free",
        ));
    }
    let mut words = value.split_whitespace();
    let kind_word = words
        .next()
        .ok_or_else(|| Error::config(&key, "missing algorithm kind"))?;
    let kind = AlgoKind::parse(kind_word)
        .ok_or_else(|| Error::config(&key, format!("unknown algorithm `{kind_word}`")))?;
    let mut spec = AlgorithmSpec::new(label, kind);
    if kind == AlgoKind::Pc {
        spec.rank = 8;
    }
    for word in words {
        let (p, v) = word
            .split_once('=')
            .ok_or_else(|| Error::config(&key, format!("expected `name=value`, found `{word}`")))?;
        let pkey = format!("{key}.{p}");
        match p {
            "d" => spec.rank = num(&pkey, v)?,
            "iters" => spec.iterations = num(&pkey, v)?,
            "interp" => spec.interp = num(&pkey, v)?,
            "branches" => spec.branches = Some(num(&pkey, v)?),
            "bank" => {
                spec.bank = match v.split_once(':') {
                    None if v == "prestored" => BankScheme::Prestored,
                    None if v == "exhaustive" => BankScheme::Exhaustive,
                    None if v == "random" => BankScheme::Random { seed: 0 },
                    Some(("random", seed)) => BankScheme::Random {
                        seed: num(&pkey, seed)?,
                    },
                    _ => return Err(Error::config(pkey, format!("unknown bank `{v}`"))),
                }
            }
            "ortho" => {
                spec.orthonormalize = match v {
                    "on" => true,
                    "off" => false,
                    _ => return Err(Error::config(pkey, "expected `on` or `off`")),
                }
            }
            _ => return Err(Error::config(pkey, "unknown parameter")),
        }
    }
    Ok(spec)
}

/// Parses config text and validates the result.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw = split_sections(text)?;
    let kind = raw
        .scenario
        .iter()
        .find(|(k, _)| k == "kind")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::config("scenario.kind", "missing (expected `cdma` or `ula`)"))?;
    let scenario = match kind {
        "cdma" => Scenario::Cdma(parse_cdma(&raw.scenario)?),
        "ula" => Scenario::Ula(parse_ula(&raw.scenario)?),
        other => {
            return Err(Error::config(
                "scenario.kind",
                format!("unknown kind `{other}`"),
            ))
        }
    };
    let algorithms = raw
        .algorithms
        .iter()
        .map(|(l, v)| parse_algorithm(l, v))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(scenario, algorithms);
    for (key, value) in &raw.run {
        let dotted = format!("run.{key}");
        let k = dotted.as_str();
        match key.as_str() {
            "symbols" | "snapshots" => cfg.symbols = num(k, value)?,
            "training" => cfg.training = num(k, value)?,
            "runs" => cfg.runs = num(k, value)?,
            "lambda" => cfg.lambda = num(k, value)?,
            "seed" => cfg.seed = num(k, value)?,
            "workers" => cfg.workers = Some(num(k, value)?),
            "bin" => cfg.bin = num(k, value)?,
            "eval_from" => cfg.eval_from = Some(num(k, value)?),
            "orders" => cfg.orders = list(k, value)?,
            "order_window" => cfg.order_window = num(k, value)?,
            "sweep" => {
                let (axis, values) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
                cfg.sweep = match axis {
                    "none" | "symbols" => Sweep::Symbols,
                    "snr" => Sweep::Snr(list(k, values)?),
                    "users" => Sweep::Users(list(k, values)?),
                    _ => return Err(Error::config(k, format!("unknown sweep axis `{axis}`"))),
                };
                if matches!(&cfg.sweep, Sweep::Snr(v) if v.is_empty())
                    || matches!(&cfg.sweep, Sweep::Users(v) if v.is_empty())
                {
                    return Err(Error::config(k, "sweep needs at least one value"));
                }
            }
            _ => return Err(Error::config(k, "unknown key")),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
