//! Synthetic scenarios: a DS-CDMA space-time uplink and a uniform linear
//! array with moving interferers, plus the MVDR closed form, output SINR and
//! the QPSK slicer.

mod cdma;
mod ula;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::dimred::ReducedRankFilter;
use crate::error::{ensure, Result};
use crate::estimators::mvdr_solve;
use crate::numerics::{vector, ComplexMatrix};

pub use cdma::{gen_cdma_burst, gen_cdma_burst_with_rng, CdmaScenario, CdmaTruth, Signature};
pub use ula::{
    from_broadside, gen_ula_snapshots, gen_ula_snapshots_with_rng, ChangeEvent, Segment, Source,
    UlaScenario,
};

/// Observations `r[i]` and the desired symbols `d[i]` they carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    pub observations: Vec<Vec<Complex64>>,
    pub desired: Vec<Complex64>,
}

impl Burst {
    pub fn len(&self) -> usize {
        self.desired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desired.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observations.first().map_or(0, Vec::len)
    }
}

/// `a(θ)[m] = exp(−jπ m cos θ)` for half-wavelength spacing, `θ` in degrees
/// measured from the array axis.
pub fn steering_vector(theta_deg: f64, m: usize) -> Result<Vec<Complex64>> {
    ensure!(
        theta_deg > 0.0 && theta_deg < 180.0,
        "direction of arrival must lie in (0, 180) degrees, got {theta_deg}"
    );
    ensure!(m >= 1, "array needs at least one sensor");
    let phase = -PI * theta_deg.to_radians().cos();
    Ok((0..m)
        .map(|k| Complex64::from_polar(1.0, phase * k as f64))
        .collect())
}

/// Reduced MVDR weights for `S_D` under the covariance `r`:
/// `w_D = R̄⁻¹ā / (āᴴR̄⁻¹ā)` with `R̄ = S_DᴴRS_D`, `ā = S_Dᴴa`.
pub fn mvdr_reduced(
    s_d: &ComplexMatrix,
    r: &ComplexMatrix,
    steering: &[Complex64],
) -> Result<Vec<Complex64>> {
    ensure!(
        s_d.rows() == r.rows() && r.is_square() && steering.len() == r.rows(),
        "MVDR dimensions disagree: S_D {}x{}, R {}x{}, a {}",
        s_d.rows(),
        s_d.cols(),
        r.rows(),
        r.cols(),
        steering.len()
    );
    let a_bar = s_d.adjoint_mul_vec(steering);
    Ok(mvdr_solve(&r.congruence(s_d), &a_bar)?.x)
}

/// Output SINR of a reduced-rank filter.
pub fn sinr(filter: &ReducedRankFilter, r_s: &ComplexMatrix, r_i: &ComplexMatrix) -> Result<f64> {
    sinr_of(&filter.effective(), r_s, r_i)
}

/// `fᴴR_s f / fᴴR_I f` for an effective filter `f`.
pub fn sinr_of(f: &[Complex64], r_s: &ComplexMatrix, r_i: &ComplexMatrix) -> Result<f64> {
    ensure!(
        r_s.rows() == f.len() && r_i.rows() == f.len(),
        "SINR covariances do not match filter length {}",
        f.len()
    );
    let num = r_s.quadratic_form(f).max(0.0);
    let den = r_i.quadratic_form(f);
    ensure!(den > 0.0, "interference-plus-noise output power is zero");
    Ok(num / den)
}

/// Maximum achievable SINR `σ_s² aᴴR_I⁻¹a` for a rank-one signal covariance.
pub fn optimum_sinr(signal_power: f64, steering: &[Complex64], r_i: &ComplexMatrix) -> Result<f64> {
    let g = crate::numerics::solve_hermitian(r_i, steering)?;
    Ok(signal_power * vector::dot(steering, &g.x).re)
}

/// Nearest unit-energy QPSK point; zero components resolve to the positive axis.
pub fn qpsk_decision(x: Complex64) -> Complex64 {
    let re = if x.re >= 0.0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if x.im >= 0.0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    Complex64::new(re, im)
}

/// Gray bits of a QPSK point: (in-phase negative, quadrature negative).
pub fn qpsk_bits(symbol: Complex64) -> [bool; 2] {
    [symbol.re < 0.0, symbol.im < 0.0]
}

/// Number of differing Gray bits between two QPSK points.
pub fn bit_errors(decided: Complex64, sent: Complex64) -> u32 {
    let a = qpsk_bits(decided);
    let b = qpsk_bits(sent);
    (a[0] != b[0]) as u32 + (a[1] != b[1]) as u32
}

/// Uniform random unit-energy QPSK symbol.
pub fn random_qpsk<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re = if rng.gen::<bool>() {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if rng.gen::<bool>() {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    Complex64::new(re, im)
}
