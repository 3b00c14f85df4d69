//! Physical constants (SI).

use crate::real::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light as the working scalar type.
pub fn c<R: Real>() -> R {
    R::lit(SPEED_OF_LIGHT)
}

/// Planck constant as the working scalar type.
pub fn h<R: Real>() -> R {
    R::lit(PLANCK)
}

/// Energy of one photon at the given vacuum wavelength, J.
pub fn photon_energy<R: Real>(wavelength: R) -> R {
    h::<R>() * c::<R>() / wavelength
}
