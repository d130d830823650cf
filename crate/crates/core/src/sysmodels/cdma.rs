use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure, Result};
use crate::numerics::random::complex_gaussian;
use crate::numerics::{vector, ComplexMatrix};

use super::{random_qpsk, Burst};

/// Synchronous DS-CDMA uplink received on a `J`-element array.
///
/// Each symbol window spans `N + L_p − 1` chips per antenna, so a user's
/// channel-convolved code for the current symbol fits entirely inside it,
/// the previous symbol leaks into its first `L_p − 1` chips and the next
/// symbol into its last `L_p − 1` chips.
#[derive(Debug, Clone, PartialEq)]
pub struct CdmaScenario {
    /// Number of users `K`; user 0 is the desired user.
    pub users: usize,
    /// Spreading gain `N`.
    pub spreading: usize,
    /// Maximum channel length `L_p` in chips.
    pub max_paths: usize,
    /// Array elements `J`.
    pub antennas: usize,
    /// Relative path powers in dB; the first path has zero delay.
    pub path_powers_db: Vec<f64>,
    /// Delay increments between consecutive paths are uniform in this
    /// inclusive chip range.
    pub path_spacing: (usize, usize),
    /// `E_b/N₀` of the desired user in dB.
    pub ebn0_db: f64,
    /// Standard deviation in dB of the interferers' log-normal powers.
    pub power_spread_db: f64,
    pub seed: u64,
}

impl Default for CdmaScenario {
    fn default() -> Self {
        Self {
            users: 8,
            spreading: 16,
            max_paths: 9,
            antennas: 2,
            path_powers_db: vec![0.0, -3.0, -6.0],
            path_spacing: (1, 2),
            ebn0_db: 15.0,
            power_spread_db: 1.5,
            seed: 0,
        }
    }
}

impl CdmaScenario {
    /// Chips per antenna in one observation window.
    pub fn window(&self) -> usize {
        self.spreading + self.max_paths - 1
    }

    /// Observation dimension `M = J (N + L_p − 1)`.
    pub fn dim(&self) -> usize {
        self.antennas * self.window()
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.users >= 1, "scenario needs at least one user");
        ensure!(self.spreading >= 1, "spreading gain must be >= 1");
        ensure!(self.antennas >= 1, "array needs at least one element");
        ensure!(
            self.max_paths >= 1 && self.max_paths < self.spreading.max(2),
            "channel length L_p={} must satisfy 1 <= L_p < N={}",
            self.max_paths,
            self.spreading
        );
        ensure!(
            !self.path_powers_db.is_empty(),
            "channel needs at least one path"
        );
        ensure!(
            self.path_spacing.0 <= self.path_spacing.1,
            "path spacing range is empty"
        );
        let span = (self.path_powers_db.len() - 1) * self.path_spacing.1;
        ensure!(
            span < self.max_paths,
            "{} paths with spacing up to {} chips exceed the channel length L_p={}",
            self.path_powers_db.len(),
            self.path_spacing.1,
            self.max_paths
        );
        ensure!(self.ebn0_db.is_finite(), "E_b/N_0 must be finite");
        ensure!(self.power_spread_db >= 0.0, "power spread must be >= 0 dB");
        Ok(())
    }
}

/// Previous, current and next-symbol images of a user in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub previous: Vec<Complex64>,
    pub current: Vec<Complex64>,
    pub next: Vec<Complex64>,
}

/// Ground truth of a generated burst.
#[derive(Debug, Clone, PartialEq)]
pub struct CdmaTruth {
    /// Unit-norm `±1/√N` codes.
    pub codes: Vec<Vec<f64>>,
    /// `channels[k][j]` is the length-`L_p` channel of user `k` at antenna `j`.
    pub channels: Vec<Vec<Vec<Complex64>>>,
    pub amplitudes: Vec<f64>,
    pub signatures: Vec<Signature>,
    /// `symbols[k][i + 1]` is user `k`'s symbol in window `i`; the first and
    /// last entries only leak into the edge windows.
    pub symbols: Vec<Vec<Complex64>>,
    pub noise_variance: f64,
}

impl CdmaTruth {
    /// Ensemble covariance `Σ_k A_k²(p̄p̄ᴴ + ppᴴ + p̃p̃ᴴ) + σ²I` for unit-energy symbols.
    pub fn covariance(&self) -> ComplexMatrix {
        let m = self.signatures[0].current.len();
        let mut r = ComplexMatrix::scaled_identity(m, self.noise_variance);
        for (sig, a) in self.signatures.iter().zip(&self.amplitudes) {
            for v in [&sig.previous, &sig.current, &sig.next] {
                let scaled = vector::scale(v, Complex64::new(*a, 0.0));
                r.rank_one_update(1.0, &scaled);
            }
        }
        r
    }

    /// Cross-correlation `E[r d*] = A₁ p₁` with the desired user's symbol.
    pub fn cross_correlation(&self) -> Vec<Complex64> {
        vector::scale(
            &self.signatures[0].current,
            Complex64::new(self.amplitudes[0], 0.0),
        )
    }
}

fn draw_user<R: Rng + ?Sized>(s: &CdmaScenario, rng: &mut R) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = s.spreading;
    let chip = 1.0 / (n as f64).sqrt();
    let code: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<bool>() { chip } else { -chip })
        .collect();
    let mut delays = vec![0usize];
    for _ in 1..s.path_powers_db.len() {
        let step = rng.gen_range(s.path_spacing.0..=s.path_spacing.1);
        delays.push(delays.last().expect("non-empty") + step);
    }
    let channels = (0..s.antennas)
        .map(|_| {
            let mut h = vec![Complex64::new(0.0, 0.0); s.max_paths];
            for (&delay, p_db) in delays.iter().zip(&s.path_powers_db) {
                h[delay] += complex_gaussian(rng, 10f64.powf(p_db / 10.0));
            }
            let norm = vector::norm(&h);
            if norm > 0.0 {
                h = vector::scale(&h, Complex64::new(1.0 / norm, 0.0));
            }
            h
        })
        .collect();
    (code, channels)
}

fn signature(s: &CdmaScenario, code: &[f64], channels: &[Vec<Complex64>]) -> Signature {
    let n = s.spreading;
    let w = s.window();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Signature {
        previous: vec![zero; s.dim()],
        current: vec![zero; s.dim()],
        next: vec![zero; s.dim()],
    };
    for (j, h) in channels.iter().enumerate() {
        // full convolution has N + L_p − 1 = window chips
        let mut conv = vec![zero; w];
        for (a, c) in code.iter().enumerate() {
            for (l, g) in h.iter().enumerate() {
                conv[a + l] += g * *c;
            }
        }
        let base = j * w;
        for t in 0..w {
            out.current[base + t] = conv[t];
            if t + n < w {
                out.previous[base + t] = conv[t + n];
            }
            if t >= n {
                out.next[base + t] = conv[t - n];
            }
        }
    }
    out
}

/// Burst of `P` symbol windows for the scenario's own seed.
pub fn gen_cdma_burst(s: &CdmaScenario, p: usize) -> Result<(Burst, CdmaTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    gen_cdma_burst_with_rng(s, p, &mut rng)
}

/// Burst of `P` symbol windows drawing codes, channels, powers, symbols and
/// noise from `rng`, in that order.
pub fn gen_cdma_burst_with_rng<R: Rng + ?Sized>(
    s: &CdmaScenario,
    p: usize,
    rng: &mut R,
) -> Result<(Burst, CdmaTruth)> {
    s.validate()?;
    let mut codes = Vec::with_capacity(s.users);
    let mut channels = Vec::with_capacity(s.users);
    let mut signatures = Vec::with_capacity(s.users);
    for _ in 0..s.users {
        let (code, ch) = draw_user(s, rng);
        signatures.push(signature(s, &code, &ch));
        codes.push(code);
        channels.push(ch);
    }
    let spread = Normal::new(0.0, s.power_spread_db).expect("validated spread");
    let amplitudes: Vec<f64> = (0..s.users)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                10f64.powf(spread.sample(rng) / 20.0)
            }
        })
        .collect();
    let e_sym = amplitudes[0].powi(2) * vector::norm_sqr(&signatures[0].current);
    let noise_variance = e_sym / (2.0 * 10f64.powf(s.ebn0_db / 10.0));

    let symbols: Vec<Vec<Complex64>> = (0..s.users)
        .map(|_| (0..p + 2).map(|_| random_qpsk(rng)).collect())
        .collect();

    let m = s.dim();
    let mut observations = Vec::with_capacity(p);
    for i in 0..p {
        let mut r: Vec<Complex64> = (0..m)
            .map(|_| complex_gaussian(rng, noise_variance))
            .collect();
        for k in 0..s.users {
            let a = amplitudes[k];
            let sig = &signatures[k];
            let syms = &symbols[k];
            vector::axpy(syms[i] * a, &sig.previous, &mut r);
            vector::axpy(syms[i + 1] * a, &sig.current, &mut r);
            vector::axpy(syms[i + 2] * a, &sig.next, &mut r);
        }
        observations.push(r);
    }
    let desired = symbols[0][1..=p].to_vec();
    Ok((
        Burst {
            observations,
            desired,
        },
        CdmaTruth {
            codes,
            channels,
            amplitudes,
            signatures,
            symbols,
            noise_variance,
        },
    ))
}
