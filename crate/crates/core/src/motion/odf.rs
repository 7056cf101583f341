use serde::{Deserialize, Serialize};

use super::fock::{coherent_cutoff, fock_distribution_coherent};
use super::sideband::{sideband_signal, SidebandParams};
use crate::{Error, Result};

/// Optical-dipole-force pulse acting on the two-ion crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdfConfig {
    /// Molecular ac-Stark shift ΔE/h in Hz; only its magnitude drives motion.
    pub stark_shift: f64,
    pub pulse_time: f64,
    /// Dimensionless calibration scale κ.
    pub coupling_constant: f64,
    pub mass_correction: f64,
}

impl OdfConfig {
    pub fn new(stark_shift: f64, pulse_time: f64, coupling_constant: f64, mass_correction: f64) -> Result<Self> {
        if !(pulse_time >= 0.0 && pulse_time.is_finite()) {
            return Err(Error::domain(format!("pulse time {pulse_time} must be non-negative")));
        }
        if !(mass_correction > 0.0 && mass_correction.is_finite()) {
            return Err(Error::domain(format!("mass correction {mass_correction} must be positive")));
        }
        if !stark_shift.is_finite() || !coupling_constant.is_finite() {
            return Err(Error::domain("stark shift and coupling constant must be finite"));
        }
        Ok(OdfConfig {
            stark_shift,
            pulse_time,
            coupling_constant,
            mass_correction,
        })
    }
}

/// Coherent amplitude |α| = κ·π·η·(mass_correction·|ΔE/h|)·t_ODF.
pub fn odf_displacement(config: &OdfConfig, eta: f64) -> f64 {
    (config.coupling_constant * std::f64::consts::PI * eta * config.mass_correction * config.stark_shift * config.pulse_time)
        .abs()
}

/// Smallest |α| whose sideband signal at `t` reaches `target`.
pub fn solve_alpha_for_signal(target: f64, t: f64, params: &SidebandParams) -> Result<f64> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::domain(format!("target probability {target} outside [0, 1)")));
    }
    let signal = |alpha: f64| -> Result<f64> {
        let dist = fock_distribution_coherent(alpha, coherent_cutoff(alpha * alpha))?;
        Ok(sideband_signal(&dist, t, params) - target)
    };
    if signal(0.0)? >= 0.0 {
        return Ok(0.0);
    }
    let step = 0.05;
    let mut lo = 0.0;
    let mut hi = step;
    while signal(hi)? < 0.0 {
        lo = hi;
        hi += step;
        if hi > 10.0 {
            return Err(Error::NonConvergence(format!(
                "sideband signal never reaches {target} for |alpha| <= 10"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if signal(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCalibration {
    pub alpha: f64,
    pub coupling_constant: f64,
}

/// Fixes κ so that a pulse driven by `stark_shift` yields sideband signal
/// `target` at pulse time `t729`.
pub fn calibrate_coupling(
    target: f64,
    t729: f64,
    params: &SidebandParams,
    stark_shift: f64,
    pulse_time: f64,
    mass_correction: f64,
) -> Result<CouplingCalibration> {
    let alpha = solve_alpha_for_signal(target, t729, params)?;
    let unit = OdfConfig::new(stark_shift, pulse_time, 1.0, mass_correction)?;
    let per_kappa = odf_displacement(&unit, params.eta);
    if per_kappa == 0.0 {
        return Err(Error::domain("cannot calibrate the coupling with zero shift or pulse time"));
    }
    Ok(CouplingCalibration {
        alpha,
        coupling_constant: alpha / per_kappa,
    })
}

/// κ anchored at the detection operating point of the bundled N₂⁺ catalog.
pub fn operating_point_coupling(catalog: &crate::stark::LineCatalog) -> Result<CouplingCalibration> {
    use crate::constants::*;
    let shift = crate::stark::operating_point_shift(catalog)?;
    calibrate_coupling(
        OPERATING_P_BRIGHT,
        OPERATING_T_729,
        &SidebandParams::operating_point(),
        shift,
        OPERATING_T_ODF,
        DEFAULT_MASS_CORRECTION,
    )
}
