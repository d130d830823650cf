use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrdsp_core::dimred::{krylov_basis, JidfConfig, JidfState, JioState};
use rrdsp_core::estimators::ExpWindowStats;
use rrdsp_core::numerics::random::{random_hermitian_pd, random_vector};
use rrdsp_core::numerics::{hermitian_evd, solve_hermitian, EigenTracker};

const DIMS: [usize; 3] = [16, 32, 64];

fn stats(m: usize, rng: &mut ChaCha8Rng) -> ExpWindowStats {
    let mut s = ExpWindowStats::with_default_ridge(m, 0.998).unwrap();
    for _ in 0..4 * m {
        let r = random_vector(rng, m);
        s.update(&r, r[0]).unwrap();
    }
    s
}

fn dense(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = c.benchmark_group("dense");
    for m in DIMS {
        let a = random_hermitian_pd(&mut rng, m);
        let b = random_vector(&mut rng, m);
        g.bench_with_input(BenchmarkId::new("evd", m), &a, |bch, a| {
            bch.iter(|| hermitian_evd(black_box(a)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("solve", m), &a, |bch, a| {
            bch.iter(|| solve_hermitian(black_box(a), black_box(&b)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("krylov_d4", m), &a, |bch, a| {
            bch.iter(|| krylov_basis(black_box(a), black_box(&b), 4, true).unwrap())
        });
    }
    g.finish();
}

fn recursive(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut g = c.benchmark_group("per_sample");
    for m in DIMS {
        let r = random_vector(&mut rng, m);
        let mut tracker = EigenTracker::scaled_identity(m, 1e-6);
        g.bench_function(BenchmarkId::new("tracker_update", m), |bch| {
            bch.iter(|| tracker.update(0.998, black_box(&r)).unwrap())
        });

        let st = stats(m, &mut rng);
        let mut jio = JioState::new(m, 4, 3).unwrap();
        g.bench_function(BenchmarkId::new("jio_update_d4", m), |bch| {
            bch.iter(|| jio.update(black_box(&st)).unwrap())
        });

        let mut jidf = JidfState::new(JidfConfig::new(m, m / 4, 0.998)).unwrap();
        let window = random_vector(&mut rng, jidf.window_len());
        let d = window[0];
        g.bench_function(BenchmarkId::new("jidf_step_l4", m), |bch| {
            bch.iter(|| jidf.step_with(black_box(&window), |_| d).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dense, recursive);
criterion_main!(benches);
