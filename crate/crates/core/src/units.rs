//! Physical constants in the spectroscopic unit system used throughout the
//! crate: energies in cm⁻¹, ħ = 1.

use std::f64::consts::PI;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM: f64 = 0.695_034_800;

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM: f64 = 2.997_924_58e10;

/// Multiply a rate expressed in cm⁻¹ (ħ = 1) by this factor to get s⁻¹.
pub const CM_TO_PER_SECOND: f64 = 2.0 * PI * SPEED_OF_LIGHT_CM;

/// Convert a rate in cm⁻¹ to s⁻¹.
#[inline]
pub fn rate_to_per_second(rate_cm: f64) -> f64 {
    rate_cm * CM_TO_PER_SECOND
}
