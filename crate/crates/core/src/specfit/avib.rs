use serde::{Deserialize, Serialize};

use super::mass::apply_mass_correction;
use crate::stark::{line_kernel, LaserField, LineCatalog, RoVibronicState, TransitionLine, DEFAULT_POLE_GUARD};
use crate::{Error, Result};

/// One Stark-shift determination. `stark_over_intensity` is signed and in
/// Hz per (W/m²); `detuning` is the laser frequency minus the target line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkDataPoint {
    pub frequency: f64,
    pub detuning: f64,
    pub intensity: f64,
    pub stark_over_intensity: f64,
    pub sigma: f64,
    pub mass_corrected: bool,
}

impl StarkDataPoint {
    pub fn new(frequency: f64, detuning: f64, intensity: f64, stark_over_intensity: f64, sigma: f64) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::domain(format!("intensity {intensity} must be positive")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma {sigma} must be positive")));
        }
        if !(frequency > 0.0 && frequency.is_finite() && detuning.is_finite() && stark_over_intensity.is_finite()) {
            return Err(Error::domain("non-finite Stark data point"));
        }
        Ok(StarkDataPoint {
            frequency,
            detuning,
            intensity,
            stark_over_intensity,
            sigma,
            mass_corrected: false,
        })
    }

    /// Absolute measured shift in Hz.
    pub fn shift(&self) -> f64 {
        self.stark_over_intensity * self.intensity
    }

    /// Scales value and uncertainty by `factor`; refuses a second application.
    pub fn mass_corrected(&self, factor: f64) -> Result<Self> {
        if self.mass_corrected {
            return Err(Error::MassCorrectionApplied);
        }
        Ok(StarkDataPoint {
            stark_over_intensity: apply_mass_correction(self.stark_over_intensity, factor)?,
            sigma: apply_mass_correction(self.sigma, factor)?,
            mass_corrected: true,
            ..*self
        })
    }
}

fn same_line(a: &TransitionLine, b: &TransitionLine) -> bool {
    a.branch == b.branch && a.frequency == b.frequency && a.lower == b.lower && a.upper == b.upper
}

/// Vibronic Einstein A of `target_line` from one measured shift.
///
/// The point is mass-corrected with `mass_correction` unless already flagged.
/// Other catalog lines from `state` are subtracted at their catalog A values.
pub fn extract_avib(
    point: &StarkDataPoint,
    target_line: &TransitionLine,
    state: &RoVibronicState,
    catalog: &LineCatalog,
    mass_correction: f64,
) -> Result<f64> {
    let point = if point.mass_corrected {
        *point
    } else {
        point.mass_corrected(mass_correction)?
    };
    if !catalog.lines.iter().any(|l| same_line(l, target_line)) {
        return Err(Error::LineNotFound(target_line.branch.clone()));
    }
    if !state.is_level(&target_line.lower) {
        return Err(Error::domain(format!(
            "line {} does not start from {}",
            target_line.branch, state.label
        )));
    }
    let laser = LaserField::pi(point.intensity, point.frequency)?;
    let kernel = line_kernel(target_line, state, &laser, DEFAULT_POLE_GUARD)?;
    if kernel == 0.0 {
        return Err(Error::DegenerateModel(format!(
            "line {} does not couple the chosen sublevel",
            target_line.branch
        )));
    }
    let mut others = 0.0;
    for line in catalog.lines_from(state).filter(|l| !same_line(l, target_line)) {
        others += line_kernel(line, state, &laser, DEFAULT_POLE_GUARD)? * line.a_vib;
    }
    let a = (point.shift() - others) / kernel;
    // Round-off on an exact cancellation must not read as a bad catalog.
    let tolerance = 1e-12 * (point.shift().abs() + others.abs()) / kernel.abs();
    if a < -tolerance {
        return Err(Error::NegativeA(a));
    }
    Ok(a.max(0.0))
}
