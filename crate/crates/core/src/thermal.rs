//! Thermal occupation of harmonic modes.

use crate::error::{Error, Result};
use crate::units::BOLTZMANN_CM;

/// Bath temperature in kelvin, finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(kelvin: f64) -> Result<Self> {
        if !(kelvin.is_finite() && kelvin > 0.0) {
            return Err(Error::invalid(format!(
                "temperature must be finite and > 0 K, got {kelvin}"
            )));
        }
        Ok(Self(kelvin))
    }

    #[inline]
    pub fn kelvin(self) -> f64 {
        self.0
    }

    /// k_B T in cm⁻¹.
    #[inline]
    pub fn thermal_energy(self) -> f64 {
        BOLTZMANN_CM * self.0
    }
}

/// Bose-Einstein occupation `1 / (exp(ħω / k_B T) - 1)` of a mode of
/// frequency `omega` (cm⁻¹) at temperature `kelvin`.
pub fn bose_occupation(omega: f64, kelvin: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid(format!(
            "mode frequency must be finite and > 0 cm-1, got {omega}"
        )));
    }
    let t = Temperature::new(kelvin)?;
    Ok(occupation(omega, t))
}

/// Unchecked variant for validated inputs.
#[inline]
pub(crate) fn occupation(omega: f64, t: Temperature) -> f64 {
    1.0 / (omega / t.thermal_energy()).exp_m1()
}

/// Occupations of every frequency in `omegas` at `t`.
pub(crate) fn occupations(omegas: &[f64], t: Temperature) -> Vec<f64> {
    omegas.iter().map(|&w| occupation(w, t)).collect()
}
