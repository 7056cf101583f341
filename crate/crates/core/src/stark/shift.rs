use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catalog::{LaserField, LineCatalog, RoVibronicState, TransitionLine};
use super::wigner::wigner3j;
use crate::constants::{PLANCK, SPEED_OF_LIGHT, TWO_PI};
use crate::{Error, Result};

/// Default half-width of the excluded band around each resonance, Hz.
pub const DEFAULT_POLE_GUARD: f64 = 1.0e3;

/// `(2J_j+1) · (J_j 1 J_i; -m 0 m)²` for π light.
pub fn angular_weight(line: &TransitionLine, state: &RoVibronicState) -> Result<f64> {
    let tj_upper = line.upper.twice_j;
    if state.twice_m.abs() > tj_upper {
        return Ok(0.0);
    }
    let w = wigner3j(tj_upper, 2, state.twice_j, -state.twice_m, 0, state.twice_m)?;
    Ok((tj_upper + 1) as f64 * w * w)
}

/// Shift per unit A_vib (Hz·s) that `line` contributes to `state`; the shift
/// itself is this kernel times the line's A_vib.
pub fn line_kernel(line: &TransitionLine, state: &RoVibronicState, laser: &LaserField, pole_guard: f64) -> Result<f64> {
    check_pole(line, laser, pole_guard)?;
    let w_line = TWO_PI * line.frequency;
    let w_laser = TWO_PI * laser.frequency;
    // ω_ij² − ω² factored to keep precision near resonance.
    let denom = w_line * w_line * ((w_line - w_laser) * (w_line + w_laser));
    let energy = -3.0 * std::f64::consts::PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT / denom
        * laser.intensity
        * line.s_rot
        * angular_weight(line, state)?;
    Ok(energy / PLANCK)
}

fn check_pole(line: &TransitionLine, laser: &LaserField, pole_guard: f64) -> Result<()> {
    if (laser.frequency - line.frequency).abs() <= pole_guard {
        return Err(Error::Pole {
            laser_hz: laser.frequency,
            line_hz: line.frequency,
            guard_hz: pole_guard,
        });
    }
    Ok(())
}

/// ac-Stark shift ΔE/h of `state` in Hz, using the default pole guard.
pub fn ac_stark_shift(state: &RoVibronicState, laser: &LaserField, catalog: &LineCatalog) -> Result<f64> {
    ac_stark_shift_guarded(state, laser, catalog, DEFAULT_POLE_GUARD)
}

/// Second-order shift summed over every catalog line leaving `state`'s level,
/// keeping the counter-rotating term.
pub fn ac_stark_shift_guarded(
    state: &RoVibronicState,
    laser: &LaserField,
    catalog: &LineCatalog,
    pole_guard: f64,
) -> Result<f64> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    catalog
        .lines_from(state)
        .map(|line| Ok(line_kernel(line, state, laser, pole_guard)? * line.a_vib))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub frequency: f64,
    /// Signed shift of the bright state; `None` inside a pole guard band.
    pub bright_shift: Option<f64>,
    /// Largest |shift| over the other states, 0 for an empty set.
    pub other_shift: Option<f64>,
}

/// Shift spectrum of a bright state against the worst-case other state.
pub fn stark_spectrum(
    bright_state: &RoVibronicState,
    other_states: &[RoVibronicState],
    intensity: f64,
    frequency_grid: &[f64],
    catalog: &LineCatalog,
    pole_guard: f64,
) -> Result<Vec<SpectrumRow>> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    frequency_grid
        .par_iter()
        .map(|&frequency| {
            let laser = LaserField::pi(intensity, frequency)?;
            let bright_shift = masked(ac_stark_shift_guarded(bright_state, &laser, catalog, pole_guard))?;
            let mut other_shift = Some(0.0f64);
            for s in other_states {
                match masked(ac_stark_shift_guarded(s, &laser, catalog, pole_guard))? {
                    Some(v) => other_shift = other_shift.map(|m| m.max(v.abs())),
                    None => {
                        other_shift = None;
                        break;
                    }
                }
            }
            Ok(SpectrumRow {
                frequency,
                bright_shift,
                other_shift,
            })
        })
        .collect()
}

fn masked(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Pole { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
