//! Quick invariant checks over every module, runnable from a release build.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dimred::{
    build_decimation_bank, jidf_step, krylov_basis, pc_subspace, BankScheme, JidfConfig, JidfState,
    JioState,
};
use crate::estimators::{full_rank_ses, ses, ExpWindowStats};
use crate::numerics::random::{random_hermitian_pd, random_vector};
use crate::numerics::{hankel_window, hermitian_evd, solve_hermitian, vector, ComplexMatrix};
use crate::sysmodels::{
    gen_cdma_burst, mvdr_reduced, qpsk_decision, random_qpsk, sinr_of, steering_vector,
    CdmaScenario,
};

use super::config::{ExperimentConfig, Scenario};
use super::metrics::{parse_csv, Metric, MetricSeries};
use super::receivers::{AlgoKind, AlgorithmSpec};
use super::runner::run_ber_experiment;

type Check = fn(&mut ChaCha8Rng) -> std::result::Result<(), String>;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    /// `(check, reason)` for every failure.
    pub failures: Vec<(&'static str, String)>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_stats(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ExpWindowStats {
    let mut s = ExpWindowStats::with_default_ridge(m, 0.99).expect("valid");
    let h = random_vector(rng, m);
    for _ in 0..n {
        let d = random_qpsk(rng);
        let mut r = random_vector(rng, m);
        vector::axpy(d, &h, &mut r);
        s.update(&r, d).expect("valid");
    }
    s
}

fn numerics_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("solve residual", |rng| {
            for _ in 0..200 {
                let m = rng.gen_range(2..=16);
                let a = random_hermitian_pd(rng, m);
                let b = random_vector(rng, m);
                let x = solve_hermitian(&a, &b).map_err(|e| e.to_string())?.x;
                let res = vector::norm(&vector::sub(&a.mul_vec(&x), &b));
                let bound = 1e-9 * (a.max_abs() * vector::norm(&x) + vector::norm(&b));
                check(res <= bound, || format!("residual {res:e} > {bound:e}"))?;
            }
            Ok(())
        }),
        ("evd trace and reconstruction", |rng| {
            for _ in 0..20 {
                let a = random_hermitian_pd(rng, 6);
                let e = hermitian_evd(&a).map_err(|e| e.to_string())?;
                let sum: f64 = e.eigenvalues.iter().sum();
                let tr = a.trace().re;
                check((sum - tr).abs() <= 1e-9 * tr.abs(), || {
                    format!("trace {sum} vs {tr}")
                })?;
                let err = e.reconstruct().sub(&a).max_abs();
                check(err <= 1e-10 * a.max_abs(), || {
                    format!("reconstruction {err:e}")
                })?;
                check(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]), || {
                    "eigenvalues not descending".into()
                })?;
            }
            Ok(())
        }),
        ("hankel shift", |rng| {
            let s = random_vector(rng, 10);
            let h = hankel_window(&s, 7, 4).map_err(|e| e.to_string())?;
            for m in 0..6 {
                for k in 0..3 {
                    check(h[(m, k + 1)] == h[(m + 1, k)], || {
                        format!("entry ({m},{k})")
                    })?;
                }
            }
            Ok(())
        }),
    ]
}

fn estimators_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("trace accumulation", |rng| {
            let mut s = ExpWindowStats::new(5, 1.0, 0.0).map_err(|e| e.to_string())?;
            let mut energy = 0.0;
            for _ in 0..50 {
                let r = random_vector(rng, 5);
                energy += vector::norm_sqr(&r);
                s.update(&r, Complex64::new(1.0, 0.0))
                    .map_err(|e| e.to_string())?;
            }
            let tr = s.r_hat.trace().re;
            check((tr - energy).abs() <= 1e-9 * energy, || {
                format!("{tr} vs {energy}")
            })
        }),
        ("SES span invariance", |rng| {
            let s = random_stats(rng, 6, 40);
            let a = crate::numerics::random::random_matrix(rng, 6, 3);
            let t = crate::numerics::random::random_matrix(rng, 3, 3);
            let x = ses(&s, &a).map_err(|e| e.to_string())?;
            let y = ses(&s, &a.matmul(&t)).map_err(|e| e.to_string())?;
            check((x - y).abs() <= 1e-8 * x.abs().max(1e-12), || {
                format!("{x} vs {y}")
            })
        }),
    ]
}

fn dimred_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("PC SES monotone", |rng| {
            let s = random_stats(rng, 8, 60);
            let mut prev = f64::INFINITY;
            for d in 1..=8 {
                let basis = pc_subspace(&s, d).map_err(|e| e.to_string())?;
                let v = ses(&s, basis.matrix()).map_err(|e| e.to_string())?;
                check(v <= prev * (1.0 + 1e-9) + 1e-12, || {
                    format!("D={d}: {v} > {prev}")
                })?;
                prev = v;
            }
            let full = full_rank_ses(&s).map_err(|e| e.to_string())?;
            check((prev - full).abs() <= 1e-9 * full.abs(), || {
                format!("{prev} vs {full}")
            })
        }),
        ("Krylov span", |rng| {
            let s = random_stats(rng, 8, 60);
            let b = krylov_basis(&s.r_hat, &s.p_hat, 8, true).map_err(|e| e.to_string())?;
            let v = ses(&s, b.subspace.matrix()).map_err(|e| e.to_string())?;
            let full = full_rank_ses(&s).map_err(|e| e.to_string())?;
            check((v - full).abs() <= 1e-8 * full.abs(), || {
                format!("{v} vs {full}")
            })
        }),
        ("JIO reaches Wiener", |rng| {
            let s = random_stats(rng, 8, 60);
            let mut st = JioState::new(8, 8, 3).map_err(|e| e.to_string())?;
            st.update(&s).map_err(|e| e.to_string())?;
            let w = solve_hermitian(&s.r_hat, &s.p_hat)
                .map_err(|e| e.to_string())?
                .x;
            let err = vector::norm(&vector::sub(&st.effective(), &w)) / vector::norm(&w);
            check(err <= 1e-6, || format!("relative error {err:e}"))
        }),
        ("JIDF exact argmin", |rng| {
            let mut cfg = JidfConfig::new(4, 2, 0.99);
            cfg.scheme = BankScheme::Exhaustive;
            let mut st = JidfState::new(cfg).map_err(|e| e.to_string())?;
            for _ in 0..500 {
                let r = random_vector(rng, 4);
                let d = random_qpsk(rng);
                let w = st.padded_window(&r);
                let out = jidf_step(&mut st, &w, d).map_err(|e| e.to_string())?;
                let best = st.branch_errors()[out.branch];
                check(st.branch_errors().iter().all(|&e| best <= e), || {
                    "selected branch is not the minimum".into()
                })?;
            }
            Ok(())
        }),
        ("prestored bank", |_| {
            let bank =
                build_decimation_bank(8, 2, 2, BankScheme::Prestored).map_err(|e| e.to_string())?;
            check(
                bank[0].gammas == [0, 2, 4, 6] && bank[1].gammas == [1, 3, 5, 7],
                || format!("{bank:?}"),
            )
        }),
    ]
}

fn sysmodels_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("steering modulus", |rng| {
            let a = steering_vector(rng.gen_range(1.0..179.0), 12).map_err(|e| e.to_string())?;
            check(a.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12), || {
                "entry off the unit circle".into()
            })
        }),
        ("SINR scale invariance", |rng| {
            let rs = random_hermitian_pd(rng, 4);
            let ri = random_hermitian_pd(rng, 4);
            let f = random_vector(rng, 4);
            let a = sinr_of(&f, &rs, &ri).map_err(|e| e.to_string())?;
            let g = vector::scale(&f, Complex64::new(-2.5, 0.75));
            let b = sinr_of(&g, &rs, &ri).map_err(|e| e.to_string())?;
            check((a - b).abs() <= 1e-12 * a, || format!("{a} vs {b}"))
        }),
        ("MVDR constraint", |rng| {
            let r = random_hermitian_pd(rng, 6);
            let a = steering_vector(70.0, 6).map_err(|e| e.to_string())?;
            let s = ComplexMatrix::identity(6);
            let w = mvdr_reduced(&s, &r, &a).map_err(|e| e.to_string())?;
            let g = vector::dot(&w, &a);
            check((g - 1.0).norm() <= 1e-10, || format!("response {g}"))
        }),
        ("QPSK loopback", |rng| {
            for _ in 0..100 {
                let s = random_qpsk(rng);
                check(qpsk_decision(s) == s, || format!("{s}"))?;
            }
            Ok(())
        }),
        ("CDMA reproducible", |rng| {
            let s = CdmaScenario {
                users: 3,
                seed: rng.gen(),
                ..CdmaScenario::default()
            };
            let a = gen_cdma_burst(&s, 20).map_err(|e| e.to_string())?;
            let b = gen_cdma_burst(&s, 20).map_err(|e| e.to_string())?;
            check(a == b, || "bursts differ".into())
        }),
    ]
}

fn harness_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("CSV round trip", |rng| {
            let mut s = MetricSeries::new("i", vec![1.0, 2.0, 3.0], Metric::Ber, 1);
            s.push_column("a", (0..3).map(|_| Some(rng.gen::<f64>())).collect())
                .map_err(|e| e.to_string())?;
            let t = parse_csv(&s.to_csv()).map_err(|e| e.to_string())?;
            check(
                t.values
                    .iter()
                    .zip(&s.columns[0].1)
                    .all(|(r, v)| r[0] == *v),
                || "values changed".into(),
            )
        }),
        ("worker-count determinism", |_| {
            let scenario = CdmaScenario {
                users: 3,
                ebn0_db: 6.0,
                ..CdmaScenario::default()
            };
            let mut cfg = ExperimentConfig::new(
                Scenario::Cdma(scenario),
                vec![
                    AlgorithmSpec::new("full", AlgoKind::Full),
                    AlgorithmSpec::new("mswf", AlgoKind::Mswf),
                ],
            );
            cfg.symbols = 120;
            cfg.training = 60;
            cfg.runs = 4;
            cfg.bin = 20;
            cfg.workers = Some(1);
            let a = run_ber_experiment(&cfg)
                .map_err(|e| e.to_string())?
                .to_csv();
            cfg.workers = Some(3);
            let b = run_ber_experiment(&cfg)
                .map_err(|e| e.to_string())?
                .to_csv();
            check(a == b, || "CSV depends on the worker count".into())
        }),
    ]
}

/// Runs every suite with a fixed seed.
pub fn run_selftest(seed: u64) -> Vec<SuiteReport> {
    let suites: [(&'static str, Vec<(&'static str, Check)>); 5] = [
        ("numerics", numerics_suite()),
        ("estimators", estimators_suite()),
        ("dimred", dimred_suite()),
        ("sysmodels", sysmodels_suite()),
        ("harness", harness_suite()),
    ];
    suites
        .into_iter()
        .map(|(name, checks)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut report = SuiteReport {
                name,
                passed: 0,
                failures: Vec::new(),
            };
            for (label, f) in checks {
                match f(&mut rng) {
                    Ok(()) => report.passed += 1,
                    Err(msg) => report.failures.push((label, msg)),
                }
            }
            report
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for seed in [0, 1] {
            for r in run_selftest(seed) {
                assert!(r.ok(), "{}: {:?}", r.name, r.failures);
                assert!(r.passed >= 2);
            }
        }
    }
}
