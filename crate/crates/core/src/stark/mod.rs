//! State-dependent ac-Stark shifts from a transition-line catalog.

mod budget;
mod catalog;
mod shift;
mod wigner;

pub use budget::{hyperfine_validity, hyperfine_validity_with, scattering_budget, HyperfineValidity, ScatteringBudget};
pub use catalog::{
    ca_d_five_half, ca_s_half, n2_bright_state, n2_other_states, LaserField, Level, LineCatalog, Polarization,
    RoVibronicState, TransitionLine, CATALOG_HEADER, N2_GROUND_LABEL, R11_HALF,
};
pub use shift::{
    ac_stark_shift, ac_stark_shift_guarded, angular_weight, line_kernel, stark_spectrum, SpectrumRow,
    DEFAULT_POLE_GUARD,
};
pub use wigner::{wigner3j, MAX_TWICE_J};

/// Shift of the bright N₂⁺ state at the detection operating point (Hz, signed).
pub fn operating_point_shift(catalog: &LineCatalog) -> crate::Result<f64> {
    use crate::constants::{OPERATING_DETUNING, OPERATING_INTENSITY};
    let line = catalog
        .find_branch(R11_HALF)
        .ok_or_else(|| crate::Error::LineNotFound(R11_HALF.into()))?;
    let laser = LaserField::pi(OPERATING_INTENSITY, line.frequency + OPERATING_DETUNING)?;
    ac_stark_shift(&n2_bright_state(), &laser, catalog)
}
