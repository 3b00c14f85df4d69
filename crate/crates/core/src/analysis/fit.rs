//! Lorentzian and double-Lorentzian least-squares fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::invert;
use crate::optimize::{self, LeastSquaresProblem, SolverOptions};
use crate::real::Real;

use super::peaks::peak_indices;

/// Unit-height Lorentzian with FWHM parametrization:
/// L(x) = 1 / (1 + (2(x − center)/fwhm)²).
pub fn lorentzian<R: Real>(x: R, center: R, fwhm: R) -> R {
    let u = R::lit(2.0) * (x - center) / fwhm;
    R::one() / (R::one() + u * u)
}

/// Row of the Jacobian of `amplitude·L(x) + baseline` with respect to
/// [amplitude, center, fwhm, baseline].
pub fn lorentzian_jacobian_row<R: Real>(x: R, amplitude: R, center: R, fwhm: R) -> [R; 4] {
    let u = R::lit(2.0) * (x - center) / fwhm;
    let denom = R::one() + u * u;
    let denom_sq = denom * denom;
    [
        R::one() / denom,
        R::lit(4.0) * amplitude * u / (fwhm * denom_sq),
        R::lit(2.0) * amplitude * u * u / (fwhm * denom_sq),
        R::one(),
    ]
}

/// Fitted single-peak parameters with covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LorentzianFit<R> {
    /// Peak height above the baseline, W.
    pub amplitude: R,
    /// Peak center, in the x unit of the fitted data.
    pub center: R,
    /// Full width at half maximum, same unit as center.
    pub fwhm: R,
    /// Constant offset, W.
    pub baseline: R,
    /// Covariance of [amplitude, center, fwhm, baseline].
    pub covariance: [[R; 4]; 4],
    /// √(sum of squared residuals), W.
    pub residual_norm: R,
    pub iterations: usize,
}

impl<R: Real> LorentzianFit<R> {
    pub fn center_variance(&self) -> R {
        self.covariance[1][1]
    }

    pub fn fwhm_variance(&self) -> R {
        self.covariance[2][2]
    }

    fn to_f64(&self) -> LorentzianFit<f64> {
        let mut covariance = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                covariance[i][j] = self.covariance[i][j].as_f64();
            }
        }
        LorentzianFit {
            amplitude: self.amplitude.as_f64(),
            center: self.center.as_f64(),
            fwhm: self.fwhm.as_f64(),
            baseline: self.baseline.as_f64(),
            covariance,
            residual_norm: self.residual_norm.as_f64(),
            iterations: self.iterations,
        }
    }
}

struct SinglePeak<'a, R> {
    x: &'a [R],
    y: &'a [R],
}

impl<R: Real> LeastSquaresProblem<R> for SinglePeak<'_, R> {
    fn residuals(&self, p: &[R]) -> Option<Vec<R>> {
        let (a, x0, w, b) = (p[0], p[1], p[2].abs(), p[3]);
        if w == R::zero() {
            return None;
        }
        Some(
            self.x
                .iter()
                .zip(self.y.iter())
                .map(|(&x, &y)| a * lorentzian(x, x0, w) + b - y)
                .collect(),
        )
    }

    fn jacobian(&self, p: &[R]) -> Option<Vec<Vec<R>>> {
        let (a, x0, w_signed) = (p[0], p[1], p[2]);
        let w = w_signed.abs();
        if w == R::zero() {
            return None;
        }
        let sign = if w_signed < R::zero() { -R::one() } else { R::one() };
        Some(
            self.x
                .iter()
                .map(|&x| {
                    let row = lorentzian_jacobian_row(x, a, x0, w);
                    vec![row[0], row[1], sign * row[2], row[3]]
                })
                .collect(),
        )
    }
}

/// Width of the half-maximum crossing around `index`, in x units.
fn estimate_fwhm<R: Real>(x: &[R], y: &[R], index: usize, baseline: R) -> R {
    let half = baseline + (y[index] - baseline) * R::lit(0.5);
    let mut left = index;
    while left > 0 && y[left] > half {
        left -= 1;
    }
    let mut right = index;
    while right + 1 < y.len() && y[right] > half {
        right += 1;
    }
    let width = x[right] - x[left];
    if width > R::zero() {
        width
    } else {
        (x[x.len() - 1] - x[0]) / R::lit(4.0)
    }
}

/// Damped least-squares fit of `A·L(x) + b` to one windowed peak.
///
/// The window must contain at least 10 samples. A negative-width excursion
/// during iteration is folded back; the stored width is its magnitude.
pub fn fit_lorentzian<R: Real>(x: &[R], y: &[R]) -> Result<LorentzianFit<R>> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "x and y lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "peak window must contain at least 10 samples, got {}",
            x.len()
        )));
    }

    let mut baseline = y[0];
    let mut top = y[0];
    let mut argmax = 0;
    for (i, &v) in y.iter().enumerate() {
        if v < baseline {
            baseline = v;
        }
        if v > top {
            top = v;
            argmax = i;
        }
    }
    let initial = [
        top - baseline,
        x[argmax],
        estimate_fwhm(x, y, argmax, baseline),
        baseline,
    ];

    let problem = SinglePeak { x, y };
    let solution = optimize::solve(&problem, &initial, &SolverOptions::default())
        .ok_or_else(|| Error::InvalidInput("fit window is not evaluable".into()))?;
    if !solution.converged {
        return Err(Error::FitFailed {
            iterations: solution.iterations,
            cost: solution.cost.as_f64(),
            step: solution.last_step.as_f64(),
        });
    }

    let dof = x.len().saturating_sub(4);
    let ssr = solution.cost * R::lit(2.0);
    let sigma_sq = if dof > 0 {
        ssr / R::lit(dof as f64)
    } else {
        R::zero()
    };
    let inverse = invert(&solution.normal_matrix).map_err(|_| Error::FitFailed {
        iterations: solution.iterations,
        cost: solution.cost.as_f64(),
        step: solution.last_step.as_f64(),
    })?;
    let mut covariance = [[R::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            covariance[i][j] = sigma_sq * inverse[i][j];
        }
    }

    Ok(LorentzianFit {
        amplitude: solution.params[0],
        center: solution.params[1],
        fwhm: solution.params[2].abs(),
        baseline: solution.params[3],
        covariance,
        residual_norm: ssr.sqrt(),
        iterations: solution.iterations,
    })
}

/// One dip of a double-Lorentzian ODMR fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OdmrDip<R> {
    /// Fractional dip depth relative to the baseline.
    pub contrast: R,
    /// Dip center, Hz.
    pub center: R,
    /// Dip FWHM, Hz.
    pub width_fwhm: R,
}

/// Double-Lorentzian fit b·(1 − C₁L₁ − C₂L₂) of an ODMR spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdmrFit<R> {
    /// The two dips, ordered by center frequency.
    pub dips: [OdmrDip<R>; 2],
    /// Shared baseline, W.
    pub baseline: R,
    /// Depth of the combined model at its lowest point, relative to the
    /// baseline (the overlapping tails make this exceed either contrast).
    pub overall_contrast: R,
    /// Covariance of [C₁, f₁, w₁, C₂, f₂, w₂, b].
    pub covariance: Vec<Vec<R>>,
    pub residual_norm: R,
    pub iterations: usize,
}

struct DoubleDip<'a, R> {
    f: &'a [R],
    y: &'a [R],
}

fn double_dip_model<R: Real>(p: &[R], f: R) -> R {
    let l1 = lorentzian(f, p[1], p[2].abs());
    let l2 = lorentzian(f, p[4], p[5].abs());
    p[6] * (R::one() - p[0] * l1 - p[3] * l2)
}

impl<R: Real> LeastSquaresProblem<R> for DoubleDip<'_, R> {
    fn residuals(&self, p: &[R]) -> Option<Vec<R>> {
        if p[2] == R::zero() || p[5] == R::zero() {
            return None;
        }
        Some(
            self.f
                .iter()
                .zip(self.y.iter())
                .map(|(&f, &y)| double_dip_model(p, f) - y)
                .collect(),
        )
    }

    fn jacobian(&self, p: &[R]) -> Option<Vec<Vec<R>>> {
        let (c1, f1, w1s, c2, f2, w2s, b) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6]);
        let (w1, w2) = (w1s.abs(), w2s.abs());
        if w1 == R::zero() || w2 == R::zero() {
            return None;
        }
        let s1 = if w1s < R::zero() { -R::one() } else { R::one() };
        let s2 = if w2s < R::zero() { -R::one() } else { R::one() };
        Some(
            self.f
                .iter()
                .map(|&f| {
                    let r1 = lorentzian_jacobian_row(f, c1, f1, w1);
                    let r2 = lorentzian_jacobian_row(f, c2, f2, w2);
                    let l1 = lorentzian(f, f1, w1);
                    let l2 = lorentzian(f, f2, w2);
                    vec![
                        -b * l1,
                        -b * r1[1],
                        -b * s1 * r1[2],
                        -b * l2,
                        -b * r2[1],
                        -b * s2 * r2[2],
                        R::one() - c1 * l1 - c2 * l2,
                    ]
                })
                .collect(),
        )
    }
}

fn single_dip_fallback<R: Real>(f: &[R], y: &[R]) -> LorentzianFit<f64> {
    let top = y.iter().copied().fold(R::neg_infinity(), R::max);
    let inverted: Vec<R> = y.iter().map(|&v| top - v).collect();
    match fit_lorentzian(f, &inverted) {
        Ok(fit) => fit.to_f64(),
        Err(_) => LorentzianFit {
            amplitude: 0.0,
            center: f[f.len() / 2].as_f64(),
            fwhm: (f[f.len() - 1] - f[0]).as_f64(),
            baseline: top.as_f64(),
            covariance: [[0.0; 4]; 4],
            residual_norm: f64::INFINITY,
            iterations: 0,
        },
    }
}

/// Simultaneous 7-parameter fit of two dips and a shared baseline.
///
/// Initialization comes from the two deepest local minima. A spectrum with
/// only one resolvable dip (or a fit that collapses both dips onto each
/// other) yields a degenerate-fit error carrying a single-Lorentzian
/// description of the inverted spectrum.
pub fn fit_double_lorentzian<R: Real>(f: &[R], y: &[R]) -> Result<OdmrFit<R>> {
    if f.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "frequency and power lengths differ: {} vs {}",
            f.len(),
            y.len()
        )));
    }
    if f.len() < 15 {
        return Err(Error::InvalidInput(format!(
            "spectrum must contain at least 15 samples, got {}",
            f.len()
        )));
    }

    let top = y.iter().copied().fold(R::neg_infinity(), R::max);
    let inverted: Vec<R> = y.iter().map(|&v| top - v).collect();
    let mut dips = peak_indices(&inverted, R::lit(0.35));
    dips.sort_by(|&a, &b| {
        inverted[b]
            .partial_cmp(&inverted[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    if dips.len() < 2 {
        return Err(Error::DegenerateFit {
            reason: format!("found {} resolvable dip(s), need 2", dips.len()),
            fallback: Box::new(single_dip_fallback(f, y)),
        });
    }
    let (mut i1, mut i2) = (dips[0], dips[1]);
    if f[i1] > f[i2] {
        std::mem::swap(&mut i1, &mut i2);
    }

    let baseline0 = top;
    let depth1 = inverted[i1] / baseline0;
    let depth2 = inverted[i2] / baseline0;
    let w1 = estimate_fwhm(f, &inverted, i1, R::zero());
    let w2 = estimate_fwhm(f, &inverted, i2, R::zero());
    let initial = [depth1, f[i1], w1, depth2, f[i2], w2, baseline0];

    let problem = DoubleDip { f, y };
    let solution = optimize::solve(&problem, &initial, &SolverOptions::default())
        .ok_or_else(|| Error::InvalidInput("spectrum is not evaluable".into()))?;
    if !solution.converged {
        return Err(Error::FitFailed {
            iterations: solution.iterations,
            cost: solution.cost.as_f64(),
            step: solution.last_step.as_f64(),
        });
    }

    let p = &solution.params;
    let (c1, f1, width1, c2, f2, width2, baseline) =
        (p[0], p[1], p[2].abs(), p[3], p[4], p[5].abs(), p[6]);

    let separation = (f2 - f1).abs();
    let degenerate = separation < (width1 + width2) * R::lit(0.25)
        || !(c1 > R::zero() && c1 < R::one())
        || !(c2 > R::zero() && c2 < R::one())
        || !(baseline > R::zero());
    if degenerate {
        return Err(Error::DegenerateFit {
            reason: "dips collapsed onto each other or left the physical range".into(),
            fallback: Box::new(single_dip_fallback(f, y)),
        });
    }

    let dof = f.len().saturating_sub(7);
    let ssr = solution.cost * R::lit(2.0);
    let sigma_sq = if dof > 0 {
        ssr / R::lit(dof as f64)
    } else {
        R::zero()
    };
    let covariance = invert(&solution.normal_matrix)
        .map(|inv| {
            inv.into_iter()
                .map(|row| row.into_iter().map(|v| sigma_sq * v).collect())
                .collect()
        })
        .unwrap_or_else(|_| vec![vec![R::zero(); 7]; 7]);

    // Deepest point of the combined model on a dense grid across the dips.
    let lo = f1 - width1 * R::lit(3.0);
    let hi = f2 + width2 * R::lit(3.0);
    let n = 2048;
    let mut overall = R::zero();
    for k in 0..=n {
        let fk = lo + (hi - lo) * R::lit(k as f64 / n as f64);
        let depth = c1 * lorentzian(fk, f1, width1) + c2 * lorentzian(fk, f2, width2);
        overall = overall.max(depth);
    }

    let mut result = OdmrFit {
        dips: [
            OdmrDip {
                contrast: c1,
                center: f1,
                width_fwhm: width1,
            },
            OdmrDip {
                contrast: c2,
                center: f2,
                width_fwhm: width2,
            },
        ],
        baseline,
        overall_contrast: overall,
        covariance,
        residual_norm: ssr.sqrt(),
        iterations: solution.iterations,
    };
    if result.dips[0].center > result.dips[1].center {
        result.dips.swap(0, 1);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn recovers_exact_lorentzian_to_machine_precision() {
        let x = linspace(-5.0, 5.0, 101);
        let (a, x0, w, b) = (2.5, 0.3, 1.2, 0.4);
        let y: Vec<f64> = x.iter().map(|&xi| a * lorentzian(xi, x0, w) + b).collect();
        let fit = fit_lorentzian(&x, &y).unwrap();
        assert_relative_eq!(fit.amplitude, a, max_relative = 1e-9);
        assert_relative_eq!(fit.center, x0, max_relative = 1e-9);
        assert_relative_eq!(fit.fwhm, w, max_relative = 1e-9);
        assert_relative_eq!(fit.baseline, b, max_relative = 1e-9);
        assert!(fit.residual_norm < 1e-10);
        // Zero-residual fit has (near-)zero covariance.
        assert!(fit.covariance[2][2] < 1e-18);
    }

    #[test]
    fn width_is_reported_as_magnitude() {
        let x = linspace(-4.0, 4.0, 81);
        let y: Vec<f64> = x.iter().map(|&xi| 1.0 * lorentzian(xi, 0.0, 0.9)).collect();
        let fit = fit_lorentzian(&x, &y).unwrap();
        assert!(fit.fwhm > 0.0);
        assert_relative_eq!(fit.fwhm, 0.9, max_relative = 1e-8);
    }

    #[test]
    fn rejects_tiny_windows() {
        let x = linspace(0.0, 1.0, 5);
        let y = vec![0.0; 5];
        assert!(matches!(
            fit_lorentzian(&x, &y),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn overlapping_peaks_leave_a_large_residual() {
        let x = linspace(-3.0, 3.0, 121);
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| lorentzian(xi, -0.7, 0.5) + lorentzian(xi, 0.7, 0.5))
            .collect();
        match fit_lorentzian(&x, &y) {
            Err(Error::FitFailed { .. }) => {}
            Ok(fit) => {
                let scale: f64 = y.iter().cloned().fold(0.0, f64::max);
                assert!(
                    fit.residual_norm > 0.05 * scale,
                    "degenerate input fit too good: {}",
                    fit.residual_norm
                );
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let x = linspace(-2.0, 2.0, 17);
        let y = vec![0.0; 17];
        let problem = SinglePeak { x: &x, y: &y };
        let params = [1.7, 0.2, 0.8, 0.05];
        let analytic = problem.jacobian(&params).unwrap();
        // Default trait method = central differences.
        struct Numeric<'a>(SinglePeak<'a, f64>);
        impl LeastSquaresProblem<f64> for Numeric<'_> {
            fn residuals(&self, p: &[f64]) -> Option<Vec<f64>> {
                self.0.residuals(p)
            }
        }
        let numeric = Numeric(SinglePeak { x: &x, y: &y }).jacobian(&params).unwrap();
        for (ra, rn) in analytic.iter().zip(numeric.iter()) {
            for (a, n) in ra.iter().zip(rn.iter()) {
                assert_abs_diff_eq!(a, n, epsilon = 1e-5 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn double_lorentzian_exact_recovery() {
        let f = linspace(2.84e9, 2.90e9, 401);
        let truth = [0.136, 2.862e9, 4.46e6, 0.130, 2.878e9, 4.50e6, 1.0e-3];
        let y: Vec<f64> = f.iter().map(|&fi| double_dip_model(&truth, fi)).collect();
        let fit = fit_double_lorentzian(&f, &y).unwrap();
        assert_relative_eq!(fit.dips[0].contrast, 0.136, max_relative = 1e-9);
        assert_relative_eq!(fit.dips[0].center, 2.862e9, max_relative = 1e-12);
        assert_relative_eq!(fit.dips[0].width_fwhm, 4.46e6, max_relative = 1e-9);
        assert_relative_eq!(fit.dips[1].contrast, 0.130, max_relative = 1e-9);
        assert_relative_eq!(fit.baseline, 1.0e-3, max_relative = 1e-9);
        assert!(fit.overall_contrast >= 0.136);
    }

    #[test]
    fn single_dip_spectrum_is_degenerate_with_fallback() {
        let f = linspace(2.84e9, 2.90e9, 301);
        let y: Vec<f64> = f
            .iter()
            .map(|&fi| 1e-3 * (1.0 - 0.1 * lorentzian(fi, 2.87e9, 5e6)))
            .collect();
        match fit_double_lorentzian(&f, &y) {
            Err(Error::DegenerateFit { fallback, .. }) => {
                assert_relative_eq!(fallback.center, 2.87e9, max_relative = 1e-6);
                assert_relative_eq!(fallback.fwhm, 5e6, max_relative = 1e-3);
            }
            other => panic!("expected degenerate fit, got {other:?}"),
        }
    }
}
