use crate::{Error, Result};

/// Wavelength at which a calibration on the atom would reproduce the motional
/// energy of the same force applied to the molecule: λ·√(m_atom/m_molecule).
pub fn mass_corrected_wavelength(wavelength: f64, mass_atom: f64, mass_molecule: f64) -> Result<f64> {
    if !(mass_atom > 0.0 && mass_molecule > 0.0) {
        return Err(Error::domain("masses must be positive"));
    }
    Ok(wavelength * (mass_atom / mass_molecule).sqrt())
}

/// Scales a calibrated shift by the atom→molecule correction factor. Data
/// points carry a flag instead; see [`super::StarkDataPoint::mass_corrected`].
pub fn apply_mass_correction(stark_shift: f64, factor: f64) -> Result<f64> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::domain(format!("mass-correction factor {factor} must be positive")));
    }
    Ok(stark_shift * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_scaling() {
        let l = mass_corrected_wavelength(787.47e-9, 40.0, 28.0).unwrap();
        assert!((l - 941.2e-9).abs() < 0.1e-9, "{l}");
        assert!((l - 940e-9).abs() / 940e-9 < 0.003);
        assert_eq!(mass_corrected_wavelength(800e-9, 28.0, 28.0).unwrap(), 800e-9);
        assert_eq!(mass_corrected_wavelength(800e-9, 4.0 * 7.0, 7.0).unwrap(), 1600e-9);
        assert!(mass_corrected_wavelength(800e-9, 0.0, 7.0).is_err());
    }

    #[test]
    fn shift_scaling() {
        assert!((apply_mass_correction(10e3, 1.17).unwrap() - 11.7e3).abs() < 1e-9);
        assert_eq!(apply_mass_correction(10e3, 1.0).unwrap(), 10e3);
        assert!(apply_mass_correction(10e3, 0.0).is_err());
    }
}
