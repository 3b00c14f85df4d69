//! Finesse extraction from scanned-cavity traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sim::ScanTrace;

use super::fit::{fit_lorentzian, LorentzianFit};
use super::peaks::{detect_peaks, DEFAULT_MIN_PROMINENCE};

/// Finesse, free spectral range and mean width of a trace.
///
/// The FSR and FWHM carry the unit of the trace positions (m for piezo
/// scans); their ratio is the dimensionless finesse.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FinesseResult<R> {
    pub finesse: R,
    pub fsr: R,
    pub mean_fwhm: R,
    /// One-sigma uncertainty on the finesse, from the fit covariances and
    /// the spacing/width sample scatter.
    pub uncertainty: R,
}

/// Full per-peak fit record behind a [`FinesseResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceAnalysis<R> {
    pub finesse: FinesseResult<R>,
    pub peak_indices: Vec<usize>,
    pub fits: Vec<LorentzianFit<R>>,
}

/// Half-max crossing width around a detected peak, in samples.
fn rough_width_samples<R: Real>(power: &[R], index: usize) -> usize {
    let baseline = power.iter().copied().fold(R::infinity(), R::min);
    let half = baseline + (power[index] - baseline) * R::lit(0.5);
    let mut left = index;
    while left > 0 && power[left] > half {
        left -= 1;
    }
    let mut right = index;
    while right + 1 < power.len() && power[right] > half {
        right += 1;
    }
    (right - left).max(4)
}

/// Fits every detected peak and assembles FSR, mean FWHM and finesse.
///
/// Windows are ±3 estimated FWHM around each peak, truncated at the
/// midpoint to the neighbouring peak and at the trace edges.
pub fn analyze_trace<R: Real>(trace: &ScanTrace<R>, min_prominence: R) -> Result<TraceAnalysis<R>> {
    let peaks = detect_peaks(trace, min_prominence);
    if peaks.len() < 2 {
        return Err(Error::InsufficientPeaks {
            found: peaks.len(),
            need: 2,
        });
    }

    let n = trace.positions.len();
    let mut fits = Vec::with_capacity(peaks.len());
    for (k, &index) in peaks.iter().enumerate() {
        let halfwidth = 3 * rough_width_samples(&trace.detected_power, index);
        let mut lo = index.saturating_sub(halfwidth);
        let mut hi = (index + halfwidth + 1).min(n);
        if k > 0 {
            lo = lo.max((peaks[k - 1] + index) / 2 + 1);
        }
        if k + 1 < peaks.len() {
            hi = hi.min((index + peaks[k + 1]) / 2);
        }
        let fit = fit_lorentzian(&trace.positions[lo..hi], &trace.detected_power[lo..hi])?;
        fits.push(fit);
    }

    let centers: Vec<R> = fits.iter().map(|f| f.center).collect();
    let widths: Vec<R> = fits.iter().map(|f| f.fwhm).collect();
    let spacings: Vec<R> = centers.windows(2).map(|w| w[1] - w[0]).collect();

    let k = R::lit(spacings.len() as f64);
    let fsr = spacings.iter().copied().sum::<R>() / k;
    let m = R::lit(widths.len() as f64);
    let mean_fwhm = widths.iter().copied().sum::<R>() / m;
    if !(fsr > R::zero() && mean_fwhm > R::zero()) {
        return Err(Error::InvalidInput(
            "non-positive spacing or width in trace fits".into(),
        ));
    }
    let finesse = fsr / mean_fwhm;

    // Spacing scatter (zero for a perfectly periodic comb) plus the fit
    // covariance of the telescoped mean spacing (first and last center).
    let spacing_scatter = if spacings.len() > 1 {
        spacings
            .iter()
            .map(|&s| (s - fsr) * (s - fsr))
            .sum::<R>()
            / (k - R::one())
            / k
    } else {
        R::zero()
    };
    let edge_var = (fits[0].center_variance() + fits[fits.len() - 1].center_variance())
        / (k * k);
    let var_fsr = spacing_scatter + edge_var;

    let width_scatter = if widths.len() > 1 {
        widths
            .iter()
            .map(|&w| (w - mean_fwhm) * (w - mean_fwhm))
            .sum::<R>()
            / (m - R::one())
            / m
    } else {
        R::zero()
    };
    let width_cov = fits.iter().map(|f| f.fwhm_variance()).sum::<R>() / (m * m);
    let var_fwhm = width_scatter + width_cov;

    let rel_sq = var_fsr / (fsr * fsr) + var_fwhm / (mean_fwhm * mean_fwhm);
    let uncertainty = finesse * rel_sq.sqrt();

    Ok(TraceAnalysis {
        finesse: FinesseResult {
            finesse,
            fsr,
            mean_fwhm,
            uncertainty,
        },
        peak_indices: peaks,
        fits,
    })
}

/// Finesse of a scanned trace with the default peak prominence.
pub fn finesse_from_trace<R: Real>(trace: &ScanTrace<R>) -> Result<FinesseResult<R>> {
    Ok(analyze_trace(trace, R::lit(DEFAULT_MIN_PROMINENCE))?.finesse)
}
