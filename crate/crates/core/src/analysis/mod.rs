//! Measurement-side pipeline: peak detection, Lorentzian fitting, finesse
//! extraction, amplification/contrast arithmetic and shot-noise-limited
//! sensitivity.

mod finesse;
mod fit;
mod peaks;

pub use finesse::{analyze_trace, finesse_from_trace, FinesseResult, TraceAnalysis};
pub use fit::{
    fit_double_lorentzian, fit_lorentzian, lorentzian, lorentzian_jacobian_row, LorentzianFit,
    OdmrDip, OdmrFit,
};
pub use peaks::{detect_peaks, peak_indices, DEFAULT_MIN_PROMINENCE};

use crate::consts::photon_energy;
use crate::error::{Error, Result};
use crate::real::Real;

/// Electron gyromagnetic ratio used by the sensitivity formula, Hz/T.
pub const GYROMAGNETIC_RATIO_HZ_PER_T: f64 = 28.024e9;

/// Relative amplification ΔA = (A − A₀)/A₀.
pub fn amplification<R: Real>(a: R, a0: R) -> Result<R> {
    if !(a0 > R::zero()) {
        return Err(Error::InvalidReference(format!(
            "unpumped amplitude must be > 0, got {a0}"
        )));
    }
    Ok((a - a0) / a0)
}

/// Magnetic contrast (A − A_mag)/A.
pub fn contrast<R: Real>(a: R, a_mag: R) -> Result<R> {
    if !(a > R::zero()) {
        return Err(Error::InvalidReference(format!(
            "field-free amplitude must be > 0, got {a}"
        )));
    }
    Ok((a - a_mag) / a)
}

/// Shot-noise-limited DC magnetic sensitivity, T/√Hz:
///
/// η = 4/(3√3) · (1/γ) · Δν / (C·√R),  R = P·λ/(h·c).
///
/// The 4/(3√3) prefactor is the standard continuous-wave ODMR shot-noise
/// form for a Lorentzian line; γ is [`GYROMAGNETIC_RATIO_HZ_PER_T`].
pub fn shot_noise_sensitivity<R: Real>(
    width_fwhm: R,
    contrast: R,
    detected_power: R,
    wavelength: R,
) -> R {
    let prefactor = R::lit(4.0) / (R::lit(3.0) * R::lit(3.0).sqrt());
    let photon_rate = detected_power / photon_energy(wavelength);
    prefactor / R::lit(GYROMAGNETIC_RATIO_HZ_PER_T) * width_fwhm
        / (contrast * photon_rate.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplification_examples() {
        assert_relative_eq!(
            amplification(5.5e-6, 3.0e-6).unwrap(),
            0.8333,
            max_relative = 1e-3
        );
        assert_eq!(amplification(2.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(amplification(1.30, 1.00).unwrap(), 0.30, max_relative = 1e-12);
        assert!(amplification(1.0, 0.0).is_err());
        assert!(amplification(1.0, -1.0).is_err());
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast(0.7, 0.7).unwrap(), 0.0);
        assert_relative_eq!(
            contrast(1.0, 1.0 - 0.3265).unwrap(),
            0.3265,
            max_relative = 1e-12
        );
        assert_relative_eq!(contrast(1.0, 0.841).unwrap(), 0.159, max_relative = 1e-12);
        assert!(contrast(0.0, 0.0).is_err());
    }

    #[test]
    fn amplification_and_contrast_are_scale_invariant() {
        for scale in [1e-6, 1.0, 4.2e3] {
            let da = amplification(5.5 * scale, 3.0 * scale).unwrap();
            assert_relative_eq!(da, amplification(5.5, 3.0).unwrap(), max_relative = 1e-12);
            let c = contrast(5.5 * scale, 3.0 * scale).unwrap();
            assert_relative_eq!(c, contrast(5.5, 3.0).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn sensitivity_scaling_laws() {
        let base = shot_noise_sensitivity(5e6, 0.1, 1e-3, 710e-9);
        assert_relative_eq!(
            shot_noise_sensitivity(5e6, 0.2, 1e-3, 710e-9),
            base / 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            shot_noise_sensitivity(5e6, 0.1, 4e-3, 710e-9),
            base / 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            shot_noise_sensitivity(10e6, 0.1, 1e-3, 710e-9),
            base * 2.0,
            max_relative = 1e-12
        );
    }
}
