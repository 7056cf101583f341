//! Seeded synthetic data in the shapes produced by the force-spectroscopy
//! experiment. Every generator is deterministic given its RNG.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use super::avib::StarkDataPoint;
use super::line::line_profile;
use super::rabi::{coherent_signal, RabiSample, RabiTrace, TraceMeta};
use crate::constants::{PLANCK, SPEED_OF_LIGHT, TWO_PI};
use crate::motion::{odf_displacement, OdfConfig, SidebandParams};
use crate::stark::{ac_stark_shift, angular_weight, LaserField, LineCatalog, RoVibronicState, TransitionLine, R11_HALF};
use crate::{Error, Result};

/// Measured line center of R11(1/2), Hz.
pub const SPECTROSCOPY_LINE_CENTER: f64 = 380.7011e12;
/// Target |ΔE/h| for synthetic points; intensities are chosen to hit it.
pub const SYNTHETIC_SHIFT_TARGET: f64 = 8.0e3;

/// Twenty red detunings from the R11(1/2) line, Hz, spread over the
/// force-spectroscopy window.
pub fn force_spectrum_detunings() -> Vec<f64> {
    [
        -3.0, -4.0, -5.0, -6.0, -7.0, -8.0, -9.0, -10.0, -12.0, -14.0, -16.0, -18.0, -20.0, -23.0, -26.0, -29.0,
        -32.0, -35.0, -38.0, -40.0,
    ]
    .iter()
    .map(|g| g * 1e9)
    .collect()
}

/// The bundled N₂⁺ catalog with R11(1/2) moved to the measured center.
pub fn spectroscopy_catalog() -> LineCatalog {
    let base = LineCatalog::n2_plus();
    let lines = base
        .lines
        .iter()
        .map(|l| {
            let mut l = l.clone();
            if l.branch == R11_HALF {
                l.frequency = SPECTROSCOPY_LINE_CENTER;
            }
            l
        })
        .collect();
    LineCatalog::new(base.name.clone(), base.source_note.clone(), lines).expect("moved catalog stays valid")
}

/// Near-resonance amplitude C with |ΔE/(h·I)| ≈ C/|f−f₀| for one line.
pub fn line_amplitude(line: &TransitionLine, state: &RoVibronicState) -> Result<f64> {
    let w0 = TWO_PI * line.frequency;
    Ok(3.0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT * line.s_rot * line.a_vib * angular_weight(line, state)?
        / (4.0 * PLANCK * w0 * w0 * w0))
}

fn relative_noise<R: Rng>(rel_sigma: f64, rng: Option<&mut R>) -> Result<f64> {
    match rng {
        None => Ok(1.0),
        Some(rng) => {
            let n = Normal::new(1.0, rel_sigma).map_err(|e| Error::domain(e.to_string()))?;
            Ok(n.sample(rng))
        }
    }
}

fn intensity_for(per_intensity: f64) -> f64 {
    SYNTHETIC_SHIFT_TARGET / per_intensity.abs()
}

/// Points on the pure profile −C/|f−f₀| at `f0 + detuning`. Noise, when an
/// RNG is given, is Gaussian with relative width `rel_sigma`; the reported
/// sigma is always `rel_sigma` of the noiseless value.
pub fn synthetic_line_points<R: Rng>(
    f0: f64,
    amplitude_c: f64,
    detunings: &[f64],
    rel_sigma: f64,
    mut rng: Option<&mut R>,
) -> Result<Vec<StarkDataPoint>> {
    detunings
        .iter()
        .map(|&d| {
            let f = f0 + d;
            let y = -line_profile(f, f0, amplitude_c);
            let noisy = y * relative_noise(rel_sigma, rng.as_deref_mut())?;
            StarkDataPoint::new(f, d, intensity_for(y), noisy, rel_sigma * y.abs())
        })
        .collect()
}

/// Points from the full shift of `state` over `catalog`, divided by
/// `mass_correction` to mimic an uncorrected calibration.
pub fn synthetic_stark_points<R: Rng>(
    catalog: &LineCatalog,
    target: &TransitionLine,
    state: &RoVibronicState,
    detunings: &[f64],
    rel_sigma: f64,
    mass_correction: f64,
    mut rng: Option<&mut R>,
) -> Result<Vec<StarkDataPoint>> {
    detunings
        .iter()
        .map(|&d| {
            let f = target.frequency + d;
            let per_i = ac_stark_shift(state, &LaserField::pi(1.0, f)?, catalog)? / mass_correction;
            let noisy = per_i * relative_noise(rel_sigma, rng.as_deref_mut())?;
            StarkDataPoint::new(f, d, intensity_for(per_i), noisy, rel_sigma * per_i.abs())
        })
        .collect()
}

/// Mean phonon number produced by a pulse driven by `stark_shift`.
pub fn nbar_for_shift(stark_shift: f64, odf: &OdfConfig, eta: f64) -> f64 {
    let alpha = odf_displacement(&OdfConfig { stark_shift, ..*odf }, eta);
    alpha * alpha
}

/// Sideband trace at `times` for a coherent state of mean `nbar`. With an
/// RNG, each point is a binomial draw of `n_shots`.
pub fn synthetic_rabi_trace<R: Rng>(
    nbar: f64,
    delta: f64,
    t2: f64,
    times: &[f64],
    n_shots: u32,
    meta: TraceMeta,
    rng: Option<&mut R>,
) -> Result<RabiTrace> {
    let p = times
        .iter()
        .map(|&t| coherent_signal(nbar, delta, t2, t, &meta.params))
        .collect::<Result<Vec<f64>>>()?;
    let p_excite: Vec<f64> = match rng {
        None => p,
        Some(rng) => p
            .iter()
            .map(|&pi| {
                let b = Binomial::new(n_shots as u64, pi.clamp(0.0, 1.0)).map_err(|e| Error::domain(e.to_string()))?;
                Ok(b.sample(rng) as f64 / n_shots as f64)
            })
            .collect::<Result<_>>()?,
    };
    let samples = times
        .iter()
        .zip(p_excite)
        .map(|(&t, p_excite)| RabiSample { t, p_excite, n_shots })
        .collect();
    RabiTrace::new(samples, meta)
}

/// Evenly spaced pulse times `step, 2·step, …, n·step`.
pub fn pulse_times(n: usize, step: f64) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * step).collect()
}

/// Trace metadata at the operating point.
pub fn operating_meta() -> TraceMeta {
    TraceMeta {
        params: SidebandParams::operating_point(),
        odf_pulse_time: crate::constants::OPERATING_T_ODF,
    }
}
