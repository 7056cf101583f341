use serde::{Deserialize, Serialize};

use crate::constants::DEFAULT_HFS_SPACING;
use crate::{Error, Result};

/// Reference detuning of the scattering anchor, Hz.
const ANCHOR_DETUNING: f64 = 10.0e9;
/// Reference Stark shift of the scattering anchor, Hz.
const ANCHOR_SHIFT: f64 = 10.0e3;
const ANCHOR_CYCLES: f64 = 1000.0;
const PULSES_PER_CYCLE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringBudget {
    /// Expected QND determinations before an off-resonant scattering event.
    pub cycles: f64,
    pub bsb_pulses: f64,
}

/// Expected QND cycles before losing the state to photon scattering.
///
/// Scattering goes as 1/Δ² and the signal as 1/Δ, so at a fixed signal the cycle
/// count scales as Δ/ΔE. Anchored at 1000 cycles for 10 GHz and 10 kHz.
pub fn scattering_budget(detuning: f64, stark_shift: f64) -> Result<ScatteringBudget> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::domain("detuning must be non-zero and finite"));
    }
    if !(stark_shift > 0.0 && stark_shift.is_finite()) {
        return Err(Error::domain("stark shift must be positive"));
    }
    // Numerator first so round anchor values stay exact.
    let cycles = ANCHOR_CYCLES * detuning.abs() * ANCHOR_SHIFT / (ANCHOR_DETUNING * stark_shift);
    Ok(ScatteringBudget {
        cycles,
        bsb_pulses: PULSES_PER_CYCLE * cycles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperfineValidity {
    pub valid: bool,
    pub message: String,
}

pub fn hyperfine_validity(detuning: f64) -> HyperfineValidity {
    hyperfine_validity_with(detuning, DEFAULT_HFS_SPACING)
}

/// Flags detunings within ten hyperfine spacings (inclusive) as hyperfine-sensitive.
pub fn hyperfine_validity_with(detuning: f64, hfs_spacing: f64) -> HyperfineValidity {
    let limit = 10.0 * hfs_spacing;
    if detuning.abs() <= limit {
        HyperfineValidity {
            valid: false,
            message: format!(
                "hyperfine-sensitive: |detuning| = {:.4e} Hz is within 10 x {:.3e} Hz; unresolved hyperfine structure may bias the shift",
                detuning.abs(),
                hfs_spacing
            ),
        }
    } else {
        HyperfineValidity {
            valid: true,
            message: format!("valid: |detuning| = {:.4e} Hz exceeds {:.3e} Hz", detuning.abs(), limit),
        }
    }
}
