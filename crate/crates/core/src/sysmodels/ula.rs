use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure, Result};
use crate::numerics::random::complex_gaussian;
use crate::numerics::{vector, ComplexMatrix};

use super::{steering_vector, Burst};

/// A narrowband far-field emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    /// Direction in degrees from the array axis, in `(0, 180)`.
    pub doa_deg: f64,
    /// Symbol power in dB relative to unity.
    pub power_db: f64,
    /// Signal of interest flag; exactly one active source carries it.
    pub soi: bool,
}

impl Source {
    pub fn interferer(doa_deg: f64, power_db: f64) -> Self {
        Self {
            doa_deg,
            power_db,
            soi: false,
        }
    }

    pub fn power(&self) -> f64 {
        10f64.powf(self.power_db / 10.0)
    }
}

/// At snapshot `at`, sources are added and sources at the listed
/// directions leave.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeEvent {
    pub at: usize,
    pub add: Vec<Source>,
    pub remove_doas_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UlaScenario {
    /// Sensors `M`.
    pub sensors: usize,
    pub sources: Vec<Source>,
    pub noise_variance: f64,
    pub events: Vec<ChangeEvent>,
    pub seed: u64,
}

/// Stationary stretch `[start, end)` with its analytic covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub sources: Vec<Source>,
    /// `σ_s² a aᴴ` of the signal of interest.
    pub r_s: ComplexMatrix,
    /// Interferers plus `σ²I`.
    pub r_i: ComplexMatrix,
    /// Signal-of-interest power and steering vector.
    pub soi_power: f64,
    pub soi_steering: Vec<Complex64>,
}

/// Converts a bearing measured from broadside (`(−90°, 90°)`) to the
/// axis-referenced angle used by [`steering_vector`].
pub fn from_broadside(bearing_deg: f64) -> f64 {
    90.0 - bearing_deg
}

const SAME_DOA: f64 = 1e-9;

impl UlaScenario {
    /// Six equal-power users: the signal of interest at 15° and interferers
    /// at −60°, −30°, 0°, 45° and 60° (bearings from broadside). At snapshot
    /// 800 interferers at −45°, −15° and 30° enter 5 dB above the signal of
    /// interest and the one at 45° leaves.
    pub fn interference_change(sensors: usize, snr_db: f64, seed: u64) -> Self {
        let b = from_broadside;
        let mut sources = vec![Source {
            doa_deg: b(15.0),
            power_db: 0.0,
            soi: true,
        }];
        for bearing in [-60.0, -30.0, 0.0, 45.0, 60.0] {
            sources.push(Source::interferer(b(bearing), 0.0));
        }
        Self {
            sensors,
            sources,
            noise_variance: 10f64.powf(-snr_db / 10.0),
            events: vec![ChangeEvent {
                at: 800,
                add: [-45.0, -15.0, 30.0]
                    .iter()
                    .map(|&t| Source::interferer(b(t), 5.0))
                    .collect(),
                remove_doas_deg: vec![b(45.0)],
            }],
            seed,
        }
    }

    /// Source sets and boundaries for a record of `p` snapshots.
    pub fn segments(&self, p: usize) -> Result<Vec<Segment>> {
        ensure!(self.sensors >= 2, "array needs at least two sensors");
        ensure!(
            self.noise_variance > 0.0 && self.noise_variance.is_finite(),
            "noise variance must be positive"
        );
        let mut events = self.events.clone();
        events.sort_by_key(|e| e.at);
        let mut active = self.sources.clone();
        let mut start = 0;
        let mut out = Vec::new();
        let mut pending = events.into_iter().peekable();
        loop {
            let end = pending.peek().map_or(p, |e| e.at.min(p)).max(start);
            out.push(self.segment(start, end, &active)?);
            match pending.next() {
                Some(ev) if ev.at < p => {
                    for doa in &ev.remove_doas_deg {
                        let pos = active
                            .iter()
                            .position(|s| (s.doa_deg - doa).abs() < SAME_DOA);
                        ensure!(pos.is_some(), "no active source at {doa} degrees to remove");
                        active.remove(pos.expect("checked"));
                    }
                    active.extend(ev.add.iter().copied());
                    start = end;
                }
                _ => break,
            }
        }
        out.retain(|s| s.end > s.start || p == 0);
        Ok(out)
    }

    fn segment(&self, start: usize, end: usize, active: &[Source]) -> Result<Segment> {
        let m = self.sensors;
        ensure!(
            active.len() < m,
            "{} sources need more than {m} sensors",
            active.len()
        );
        ensure!(
            active.iter().filter(|s| s.soi).count() == 1,
            "exactly one active source must be the signal of interest"
        );
        let mut r_s = ComplexMatrix::zeros(m, m);
        let mut r_i = ComplexMatrix::scaled_identity(m, self.noise_variance);
        let mut soi_power = 0.0;
        let mut soi_steering = Vec::new();
        for s in active {
            ensure!(s.power_db.is_finite(), "source power must be finite");
            let a = steering_vector(s.doa_deg, m)?;
            let scaled = vector::scale(&a, Complex64::new(s.power().sqrt(), 0.0));
            if s.soi {
                r_s.rank_one_update(1.0, &scaled);
                soi_power = s.power();
                soi_steering = a;
            } else {
                r_i.rank_one_update(1.0, &scaled);
            }
        }
        Ok(Segment {
            start,
            end,
            sources: active.to_vec(),
            r_s,
            r_i,
            soi_power,
            soi_steering,
        })
    }
}

/// `P` snapshots for the scenario's own seed.
pub fn gen_ula_snapshots(s: &UlaScenario, p: usize) -> Result<(Burst, Vec<Segment>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    gen_ula_snapshots_with_rng(s, p, &mut rng)
}

/// Snapshots `r = A(θ)s + n` with complex Gaussian symbols; `desired` holds
/// the signal-of-interest symbols.
pub fn gen_ula_snapshots_with_rng<R: Rng + ?Sized>(
    s: &UlaScenario,
    p: usize,
    rng: &mut R,
) -> Result<(Burst, Vec<Segment>)> {
    let segments = s.segments(p)?;
    let m = s.sensors;
    let mut observations = Vec::with_capacity(p);
    let mut desired = Vec::with_capacity(p);
    for seg in &segments {
        let steering: Vec<(Vec<Complex64>, f64, bool)> = seg
            .sources
            .iter()
            .map(|src| {
                (
                    steering_vector(src.doa_deg, m).expect("validated"),
                    src.power(),
                    src.soi,
                )
            })
            .collect();
        for _ in seg.start..seg.end {
            let mut r: Vec<Complex64> = (0..m)
                .map(|_| complex_gaussian(rng, s.noise_variance))
                .collect();
            let mut d = Complex64::new(0.0, 0.0);
            for (a, power, soi) in &steering {
                let sym = complex_gaussian(rng, *power);
                vector::axpy(sym, a, &mut r);
                if *soi {
                    d = sym;
                }
            }
            observations.push(r);
            desired.push(d);
        }
    }
    Ok((
        Burst {
            observations,
            desired,
        },
        segments,
    ))
}
