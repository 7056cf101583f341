//! Physical constants and the experimental operating point used as defaults.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Single lattice-beam intensity at the detection operating point, W/m².
pub const OPERATING_INTENSITY: f64 = 2.0e6;
/// Lattice detuning from the R11(1/2) line at the detection operating point, Hz.
pub const OPERATING_DETUNING: f64 = -17.0e9;
/// Lamb-Dicke parameter of the in-phase mode.
pub const OPERATING_ETA: f64 = 0.1;
/// Bare 729 nm Rabi frequency Ω₀/2π, Hz.
pub const OPERATING_OMEGA0: f64 = 90.0e3;
/// Optical-dipole-force pulse duration, s.
pub const OPERATING_T_ODF: f64 = 500.0e-6;
/// Sideband pulse time of maximum bright/dark contrast, s.
pub const OPERATING_T_729: f64 = 20.0e-6;
/// Bright-state sideband success probability at the operating pulse time.
pub const OPERATING_P_BRIGHT: f64 = 0.52;
/// Dark-state sideband success probability at the operating pulse time.
pub const OPERATING_P_DARK: f64 = 0.06;
/// Number of sideband pulses averaged per detection attempt.
pub const OPERATING_N_REP: usize = 22;
/// Presentation threshold on the averaged success probability.
pub const OPERATING_THRESHOLD_P: f64 = 0.25;
/// In-phase mode frequency f_IP, Hz.
pub const OPERATING_MODE_FREQUENCY: f64 = 620.0e3;
/// Energy scaling between force on the atom and force on the molecule.
pub const DEFAULT_MASS_CORRECTION: f64 = 1.17;
/// Fraction of shots surviving the D-state post-selection.
pub const DEFAULT_PREP_SUCCESS: f64 = 0.97;
/// Residual thermal occupation after ground-state cooling.
pub const DEFAULT_NBAR_BACKGROUND: f64 = 0.05;
/// Assumed hyperfine manifold spacing, Hz.
pub const DEFAULT_HFS_SPACING: f64 = 300.0e6;
/// Absolute wavemeter accuracy, Hz.
pub const WAVEMETER_ACCURACY: f64 = 50.0e6;

pub const MASS_CA40: f64 = 40.0;
pub const MASS_N2: f64 = 28.0;
