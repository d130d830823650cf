use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrdsp_core::dimred::{pc_subspace, select_model_order};
use rrdsp_core::estimators::{ses, ExpWindowStats};
use rrdsp_core::numerics::random::{complex_gaussian, random_vector};
use rrdsp_core::numerics::vector;
use rrdsp_core::Complex64;

/// Observations confined to a 3-dimensional subspace of C^8 and a desired
/// signal that is a noisy linear function of the three latent sources: the
/// SES over nested principal-component bases stops improving at D = 3.
#[test]
fn ses_criterion_saturates_at_the_signal_rank() {
    let m = 8;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let mixing: Vec<Vec<Complex64>> = (0..3).map(|_| random_vector(&mut rng, m)).collect();
        let taps = random_vector(&mut rng, 3);
        let mut stats = ExpWindowStats::with_default_ridge(m, 0.998).unwrap();
        for _ in 0..400 {
            let s = random_vector(&mut rng, 3);
            let mut r = vec![Complex64::new(0.0, 0.0); m];
            for (a, sk) in mixing.iter().zip(&s) {
                vector::axpy(*sk, a, &mut r);
            }
            let d = vector::dot(&taps, &s) + complex_gaussian(&mut rng, 0.01);
            stats.update(&r, d).unwrap();
        }
        let candidates: Vec<(usize, f64)> = (1..=m)
            .map(|d| {
                (
                    d,
                    ses(&stats, pc_subspace(&stats, d).unwrap().matrix()).unwrap(),
                )
            })
            .collect();
        let chosen = select_model_order(&candidates).unwrap();
        assert!(
            (2..=4).contains(&chosen),
            "trial {trial}: selected D={chosen} from {candidates:?}"
        );
    }
}
