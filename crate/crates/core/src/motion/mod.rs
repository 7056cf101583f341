//! Motional state preparation and sideband Rabi signals.

mod fock;
mod odf;
mod sideband;

pub use fock::{
    coherent_cutoff, fock_distribution_coherent, fock_distribution_coherent_with, fock_distribution_thermal,
    fock_distribution_thermal_with, FockDistribution, DEFAULT_N_MAX, DEFAULT_TAIL_TOLERANCE,
};
pub use odf::{
    calibrate_coupling, odf_displacement, operating_point_coupling, solve_alpha_for_signal, CouplingCalibration,
    OdfConfig,
};
pub use sideband::{
    angular_rabi_frequencies, laguerre_generalized, rabi_frequency, sideband_signal, sideband_signal_from, sideband_signal_with, RabiModel,
    SidebandParams,
};

/// Coherent state of mean occupation `nbar` with an automatically sized cutoff.
pub fn coherent_from_mean(nbar: f64) -> crate::Result<FockDistribution> {
    fock_distribution_coherent(nbar.max(0.0).sqrt(), coherent_cutoff(nbar))
}
