//! Threshold-based peak detection for scanned traces.

use crate::real::Real;
use crate::sim::ScanTrace;

/// Default prominence fraction used by the trace pipeline.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.5;

/// Indices of local maxima exceeding
/// `baseline + min_prominence · (max − baseline)`.
///
/// Samples above the threshold are grouped into contiguous runs and each
/// run contributes its highest sample (lowest index on ties), so a noisy
/// crest yields exactly one detection. A flat sequence has no peaks.
pub fn peak_indices<R: Real>(values: &[R], min_prominence: R) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut lo = values[0];
    let mut hi = values[0];
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        return Vec::new();
    }
    let threshold = lo + min_prominence * (hi - lo);

    let mut peaks = Vec::new();
    let mut run_best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v > threshold {
            run_best = match run_best {
                Some(best) if values[best] >= v => Some(best),
                _ => Some(i),
            };
        } else if let Some(best) = run_best.take() {
            peaks.push(best);
        }
    }
    if let Some(best) = run_best {
        peaks.push(best);
    }
    peaks
}

/// Peak indices of a scanned-cavity trace, sorted by position.
pub fn detect_peaks<R: Real>(trace: &ScanTrace<R>, min_prominence: R) -> Vec<usize> {
    peak_indices(&trace.detected_power, min_prominence)
}
