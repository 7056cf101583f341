//! Force-spectroscopy analysis: sideband Rabi fits, the empirical map from
//! fit parameters to Stark shift, the line-center fit, and inversion of the
//! Stark formula for the vibronic Einstein A.

mod avib;
mod calibration;
mod line;
mod lm;
mod mass;
mod rabi;
pub mod synthetic;

pub use avib::{extract_avib, StarkDataPoint};
pub use calibration::{
    build_calibration, build_calibration_with, polyfit, stark_from_trace, stark_from_trace_with, CalibrationDegrees, CalibrationModel,
    StarkEstimate, MIN_CALIBRATION_POINTS,
};
pub use line::{fit_line_center, fit_line_center_with, line_profile, LineFit, MIN_LINE_POINTS};
pub use lm::{covariance, minimize, LmOptions, LmSolution};
pub use mass::{apply_mass_correction, mass_corrected_wavelength};
pub use rabi::{
    binomial_sigma, coherent_signal, coherent_signals, fit_rabi_trace, fit_rabi_trace_with, RabiFit, RabiSample, RabiTrace,
    TraceMeta,
};
