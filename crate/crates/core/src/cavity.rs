//! Symmetric high-finesse Fabry–Pérot cavity with a Brewster-angled
//! diamond plate: mode geometry, free spectral range, finesse–loss
//! relations and on-resonance output powers.

use serde::{Deserialize, Serialize};

use crate::consts::c;
use crate::error::{Error, Result};
use crate::real::Real;

/// Mirror and plate geometry of the symmetric two-mirror cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry<R> {
    /// Mirror radius of curvature, m.
    pub mirror_roc: R,
    /// Geometric mirror spacing, m.
    pub geometric_length: R,
    /// Intensity reflectivity of each (identical) mirror.
    pub mirror_reflectivity: R,
    /// Intensity transmission of each mirror.
    pub mirror_transmission: R,
    /// Geometric thickness of the diamond plate, m.
    pub diamond_thickness: R,
    /// Refractive index of diamond at the seed wavelength.
    pub diamond_index: R,
    /// Seed wavelength, m.
    pub seed_wavelength: R,
}

impl<R: Real> CavityGeometry<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.geometric_length > R::zero()
            && self.geometric_length < R::lit(2.0) * self.mirror_roc)
        {
            return Err(Error::UnstableCavity(format!(
                "need 0 < L < 2*ROC, got L={} ROC={}",
                self.geometric_length, self.mirror_roc
            )));
        }
        if self.mirror_reflectivity + self.mirror_transmission > R::one() {
            return Err(Error::InvalidGeometry(format!(
                "mirror R + T must be <= 1, got {}",
                self.mirror_reflectivity + self.mirror_transmission
            )));
        }
        if !(self.mirror_reflectivity > R::zero() && self.mirror_reflectivity < R::one()) {
            return Err(Error::InvalidGeometry(format!(
                "mirror reflectivity must be in (0, 1), got {}",
                self.mirror_reflectivity
            )));
        }
        if !(self.seed_wavelength > R::zero()) {
            return Err(Error::InvalidGeometry("seed wavelength must be > 0".into()));
        }
        Ok(())
    }

    /// Brewster traversal of the plate for this geometry.
    pub fn brewster_path(&self) -> Result<BrewsterPath<R>> {
        optical_path_brewster(self.diamond_thickness, self.diamond_index)
    }

    /// One-way optical cavity length including the plate, m.
    pub fn optical_length(&self) -> Result<R> {
        Ok(self.geometric_length + self.brewster_path()?.optical_length_added)
    }
}

/// Per-pass loss and gain of the cavity, both dimensionless.
///
/// `base_loss_per_pass` is μ₀L: one mirror's worth of loss plus intrinsic
/// plate absorption, scatter and the birefringence pick-off.
/// `nv_gain_per_pass` is μ_g·l with l the geometric plate thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBudget<R> {
    pub base_loss_per_pass: R,
    pub nv_gain_per_pass: R,
}

impl<R: Real> LossBudget<R> {
    pub fn validate(&self) -> Result<()> {
        if self.nv_gain_per_pass >= self.base_loss_per_pass {
            return Err(Error::AboveThreshold {
                gain: self.nv_gain_per_pass.as_f64(),
                loss: self.base_loss_per_pass.as_f64(),
            });
        }
        Ok(())
    }
}

/// Traversal of a plane-parallel plate inserted at Brewster's angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrewsterPath<R> {
    /// Incidence angle arctan(n), rad.
    pub brewster_angle: R,
    /// Refracted angle inside the plate, rad.
    pub internal_angle: R,
    /// Geometric in-plate path per traversal, m.
    pub single_pass_path: R,
    /// Optical length added to the cavity per traversal,
    /// n·path − axial footprint, m.
    pub optical_length_added: R,
}

/// Brewster-angle traversal of a plate of given thickness and index.
pub fn optical_path_brewster<R: Real>(thickness: R, index: R) -> Result<BrewsterPath<R>> {
    if !(index >= R::one()) {
        return Err(Error::InvalidGeometry(format!(
            "refractive index must be >= 1, got {index}"
        )));
    }
    if !(thickness >= R::zero()) {
        return Err(Error::InvalidGeometry(format!(
            "plate thickness must be >= 0, got {thickness}"
        )));
    }
    let brewster_angle = index.atan();
    let internal_angle = (brewster_angle.sin() / index).asin();
    let single_pass_path = thickness / internal_angle.cos();
    // Axial footprint: the in-plate ray makes angle (θ_B − θ_int) with the
    // cavity axis, so the plate replaces path·cos(θ_B − θ_int) of vacuum.
    let footprint = single_pass_path * (brewster_angle - internal_angle).cos();
    let optical_length_added = index * single_pass_path - footprint;
    Ok(BrewsterPath {
        brewster_angle,
        internal_angle,
        single_pass_path,
        optical_length_added,
    })
}

/// TEM₀₀ waist of the empty symmetric cavity: w₀² = (λ/2π)·√(L(2·ROC − L)).
pub fn mode_waist<R: Real>(geom: &CavityGeometry<R>) -> Result<R> {
    geom.validate()?;
    let l = geom.geometric_length;
    let discriminant = l * (R::lit(2.0) * geom.mirror_roc - l);
    let w0_sq = geom.seed_wavelength / (R::lit(2.0) * R::PI()) * discriminant.sqrt();
    Ok(w0_sq.sqrt())
}

/// Free spectral range c/(2·L_opt), Hz. `optical_length` must be positive.
pub fn free_spectral_range<R: Real>(optical_length: R) -> R {
    c::<R>() / (R::lit(2.0) * optical_length)
}

/// Resonance width FSR/𝓕, same unit as the FSR.
pub fn fwhm_from_finesse<R: Real>(fsr: R, finesse: R) -> R {
    fsr / finesse
}

/// Finesse of the below-threshold cavity, π/(μ₀L − μ_g·l).
///
/// Errors when the gain reaches the loss: the model refuses to cross the
/// lasing threshold.
pub fn finesse_from_losses<R: Real>(budget: &LossBudget<R>) -> Result<R> {
    budget.validate()?;
    Ok(R::PI() / (budget.base_loss_per_pass - budget.nv_gain_per_pass))
}

/// Net gain per unit length from a finesse pair: μ_g = π/l·(1/𝓕₀ − 1/𝓕_g).
pub fn net_gain_from_finesse_pair<R: Real>(f0: R, fg: R, medium_length: R) -> R {
    R::PI() / medium_length * (f0.recip() - fg.recip())
}

/// On-resonance steady-state powers of the seeded cavity, W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPowers<R> {
    /// Power leaving through the output mirror.
    pub transmitted_peak: R,
    /// Birefringence pick-off at the diamond surface.
    pub reflected_peak: R,
    /// Circulating power incident on the output mirror.
    pub circulating: R,
}

/// On-resonance two-mirror response with an internal net gain/loss.
///
/// transmitted = seed·T²·G/(1 − R·G)² with R = √(R₁R₂) and G the single-pass
/// intensity factor through everything between the mirrors (NV gain minus
/// intrinsic absorption, scatter and pick-off). The reflected channel is the
/// birefringence pick-off, proportional to circulating power; the directly
/// back-reflected seed returns toward the source and is not detected there.
pub fn peak_output_powers<R: Real>(
    seed_power: R,
    geom: &CavityGeometry<R>,
    budget: &LossBudget<R>,
    birefringence_reflectance: R,
) -> Result<PeakPowers<R>> {
    if !(seed_power >= R::zero()) {
        return Err(Error::InvalidReference(format!(
            "seed power must be >= 0, got {seed_power}"
        )));
    }
    budget.validate()?;

    let r = geom.mirror_reflectivity;
    let t = geom.mirror_transmission;
    // Everything that is not mirror loss lives between the mirrors.
    let internal_loss = budget.base_loss_per_pass - (R::one() - r);
    let g = (budget.nv_gain_per_pass - internal_loss).exp();
    let denom = R::one() - r * g;
    if denom <= R::zero() {
        return Err(Error::AboveThreshold {
            gain: budget.nv_gain_per_pass.as_f64(),
            loss: budget.base_loss_per_pass.as_f64(),
        });
    }
    let circulating = seed_power * t * g / (denom * denom);
    Ok(PeakPowers {
        transmitted_peak: circulating * t,
        reflected_peak: circulating * birefringence_reflectance,
        circulating,
    })
}

/// Unit-peak Airy transmission versus mirror displacement from resonance.
///
/// Resonances repeat every λ/2 of displacement. The Lorentzian
/// approximation used for 𝓕 above [`AIRY_LORENTZIAN_THRESHOLD`] agrees with
/// this to better than 1e-6 near resonance.
pub fn airy_profile<R: Real>(displacement: R, wavelength: R, finesse: R) -> R {
    let coeff = R::lit(2.0) * finesse / R::PI();
    let phase = R::lit(2.0) * R::PI() * displacement / wavelength;
    R::one() / (R::one() + coeff * coeff * phase.sin() * phase.sin())
}

/// Finesse above which synthesized resonances use the Lorentzian
/// approximation of the Airy function.
pub const AIRY_LORENTZIAN_THRESHOLD: f64 = 50.0;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn paper_geometry() -> CavityGeometry<f64> {
        CavityGeometry {
            mirror_roc: 30e-3,
            geometric_length: 12e-3,
            mirror_reflectivity: 0.9998,
            mirror_transmission: 1.8e-4,
            diamond_thickness: 295e-6,
            diamond_index: 2.41,
            seed_wavelength: 710e-9,
        }
    }

    #[test]
    fn mode_waist_matches_reference_geometry() {
        let w0 = mode_waist(&paper_geometry()).unwrap();
        assert!((w0 - 52.0e-6).abs() < 0.5e-6, "waist {w0}");
    }

    #[test]
    fn mode_waist_confocal_closed_form() {
        let mut geom = paper_geometry();
        geom.geometric_length = geom.mirror_roc;
        let w0 = mode_waist(&geom).unwrap();
        let expected = (geom.seed_wavelength * geom.mirror_roc / (2.0 * std::f64::consts::PI))
            .sqrt();
        assert_relative_eq!(w0, expected, max_relative = 1e-12);
    }

    #[test]
    fn mode_waist_rejects_concentric_limit() {
        let mut geom = paper_geometry();
        geom.geometric_length = 2.0 * geom.mirror_roc;
        assert!(matches!(
            mode_waist(&geom),
            Err(Error::UnstableCavity(_))
        ));
        // Waist collapses on the way to the limit.
        geom.geometric_length = 2.0 * geom.mirror_roc * (1.0 - 1e-9);
        let near = mode_waist(&geom).unwrap();
        assert!(near < 5e-6);
    }

    #[test]
    fn brewster_path_for_diamond() {
        let path = optical_path_brewster(295e-6, 2.41).unwrap();
        assert_relative_eq!(path.brewster_angle.to_degrees(), 67.47, max_relative = 1e-3);
        assert_relative_eq!(path.internal_angle.to_degrees(), 22.53, max_relative = 1e-3);
        assert_relative_eq!(path.single_pass_path, 319.4e-6, max_relative = 1e-3);
        // Wavefront form of the added optical length: t(n·cosθ_t − cosθ_i).
        let alt = 295e-6 * (2.41 * path.internal_angle.cos() - path.brewster_angle.cos());
        assert_relative_eq!(path.optical_length_added, alt, max_relative = 1e-12);
    }

    #[test]
    fn brewster_vacuum_plate_adds_nothing() {
        let path = optical_path_brewster(1e-3, 1.0).unwrap();
        assert_relative_eq!(path.brewster_angle.to_degrees(), 45.0, max_relative = 1e-12);
        assert_abs_diff_eq!(path.optical_length_added, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn brewster_zero_thickness() {
        let path = optical_path_brewster(0.0, 2.41).unwrap();
        assert_eq!(path.single_pass_path, 0.0);
        assert_eq!(path.optical_length_added, 0.0);
    }

    #[test]
    fn fsr_examples() {
        let geom = paper_geometry();
        let l_opt = geom.optical_length().unwrap();
        let fsr = free_spectral_range(l_opt);
        // ~12 GHz, and FWHM at finesse 800 lands at 15 MHz.
        assert_relative_eq!(fsr, 12.0e9, max_relative = 0.01);
        let fwhm = fwhm_from_finesse(fsr, 800.0);
        assert!((fwhm - 15e6).abs() < 0.5e6, "FWHM {fwhm}");

        assert_relative_eq!(
            free_spectral_range(0.15),
            1.0e9,
            max_relative = 2e-3
        );
        assert_relative_eq!(
            free_spectral_range(2.0 * l_opt),
            fsr / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn finesse_from_losses_reference_points() {
        let f0 = finesse_from_losses(&LossBudget {
            base_loss_per_pass: std::f64::consts::PI / 958.0,
            nv_gain_per_pass: 0.0,
        })
        .unwrap();
        assert_relative_eq!(f0, 958.0, max_relative = 1e-12);

        let gain = std::f64::consts::PI * (1.0 / 958.0 - 1.0 / 1086.0);
        let fg = finesse_from_losses(&LossBudget {
            base_loss_per_pass: std::f64::consts::PI / 958.0,
            nv_gain_per_pass: gain,
        })
        .unwrap();
        assert_relative_eq!(fg, 1086.0, max_relative = 1e-12);
    }

    #[test]
    fn finesse_loss_roundtrip_is_identity() {
        let budget = LossBudget {
            base_loss_per_pass: 3.3e-3,
            nv_gain_per_pass: 5.5e-4,
        };
        let f = finesse_from_losses(&budget).unwrap();
        let recovered = std::f64::consts::PI / f + budget.nv_gain_per_pass;
        assert_abs_diff_eq!(recovered, budget.base_loss_per_pass, epsilon = 1e-15);
    }

    #[test]
    fn finesse_errors_at_threshold() {
        let budget = LossBudget {
            base_loss_per_pass: 1e-3,
            nv_gain_per_pass: 1e-3,
        };
        assert!(matches!(
            finesse_from_losses(&budget),
            Err(Error::AboveThreshold { .. })
        ));
    }

    #[test]
    fn net_gain_from_finesse_pair_examples() {
        let mu = net_gain_from_finesse_pair(958.0, 1086.0, 295e-6);
        assert!((mu - 1.31).abs() < 1e-3, "net gain {mu}");
        assert_eq!(net_gain_from_finesse_pair(900.0, 900.0, 295e-6), 0.0);
        assert!(net_gain_from_finesse_pair(1086.0, 958.0, 295e-6) < 0.0);
    }

    #[test]
    fn lossless_impedance_matched_cavity_transmits_everything() {
        let geom = CavityGeometry {
            mirror_reflectivity: 0.999,
            mirror_transmission: 0.001,
            ..paper_geometry()
        };
        let budget = LossBudget {
            base_loss_per_pass: 1.0 - geom.mirror_reflectivity,
            nv_gain_per_pass: 0.0,
        };
        let out = peak_output_powers(1.0, &geom, &budget, 0.0).unwrap();
        assert_relative_eq!(out.transmitted_peak, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn amplification_follows_finesse_square_law() {
        let geom = paper_geometry();
        let base = std::f64::consts::PI / 958.0;
        let gain = std::f64::consts::PI * (1.0 / 958.0 - 1.0 / 1086.0);
        let budget0 = LossBudget {
            base_loss_per_pass: base,
            nv_gain_per_pass: 0.0,
        };
        let budget_g = LossBudget {
            base_loss_per_pass: base,
            nv_gain_per_pass: gain,
        };
        let a0 = peak_output_powers(1.0, &geom, &budget0, 1.44e-3).unwrap();
        let ag = peak_output_powers(1.0, &geom, &budget_g, 1.44e-3).unwrap();
        let ratio = ag.transmitted_peak / a0.transmitted_peak;
        let law = (1086.0f64 / 958.0).powi(2);
        assert!((ratio - law).abs() < 0.01, "ratio {ratio} law {law}");
        // ~28.5% amplification against the square law.
        assert!((ratio - 1.0 - 0.285).abs() < 0.01);
    }

    #[test]
    fn transmission_increases_with_gain_below_threshold() {
        let geom = paper_geometry();
        let base = std::f64::consts::PI / 958.0;
        let mut previous = 0.0;
        for k in 0..8 {
            let budget = LossBudget {
                base_loss_per_pass: base,
                nv_gain_per_pass: base * 0.1 * k as f64,
            };
            let out = peak_output_powers(1.0, &geom, &budget, 0.0).unwrap();
            assert!(out.transmitted_peak > previous);
            previous = out.transmitted_peak;
        }
    }

    #[test]
    fn reflected_to_transmitted_ratio_is_pickoff_over_t() {
        let geom = paper_geometry();
        let budget = LossBudget {
            base_loss_per_pass: std::f64::consts::PI / 958.0,
            nv_gain_per_pass: 0.0,
        };
        let biref = 1.44e-3;
        let out = peak_output_powers(1.0, &geom, &budget, biref).unwrap();
        assert_relative_eq!(
            out.reflected_peak / out.transmitted_peak,
            biref / geom.mirror_transmission,
            max_relative = 1e-12
        );
        // Reference configuration puts this ratio at ~8.
        assert_relative_eq!(out.reflected_peak / out.transmitted_peak, 8.0, max_relative = 1e-3);
    }

    #[test]
    fn airy_profile_peaks_every_half_wavelength() {
        let lambda = 710e-9;
        for k in 0..4 {
            let x = k as f64 * lambda / 2.0;
            assert_relative_eq!(airy_profile(x, lambda, 40.0), 1.0, max_relative = 1e-12);
        }
        // Half maximum at ±FWHM/2 = λ/(4𝓕) for high finesse.
        let f = 400.0;
        let half = airy_profile(lambda / (4.0 * f), lambda, f);
        assert!((half - 0.5).abs() < 0.01, "half {half}");
    }
}
