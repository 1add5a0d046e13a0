use crate::error::{Error, Result};
use crate::synth::{spectral_stats, spectrogram};

use super::trace::Trace;

pub const PEAK_THRESHOLD: f64 = 0.6;
/// s.
pub const PEAK_MIN_SEPARATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFeatures {
    pub peaks: Vec<Peak>,
    /// Pearson correlation of nearness with ln(center_freq); `None` when
    /// either is constant over the settled region.
    pub sweep_correlation: Option<f64>,
}

/// Maxima of each excursion above `threshold`; of two maxima closer than
/// `min_separation` s only the higher survives.
pub fn find_peaks(times: &[f64], values: &[f64], threshold: f64, min_separation: f64) -> Vec<Peak> {
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < values.len() {
        if values[i] > threshold {
            let start = i;
            while i < values.len() && values[i] > threshold {
                i += 1;
            }
            let best = (start..i).max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a))).unwrap();
            candidates.push(Peak { index: best, time: times[best], value: values[best] });
        } else {
            i += 1;
        }
    }
    let mut by_height = candidates.clone();
    by_height.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
    let mut kept: Vec<Peak> = Vec::new();
    for p in by_height {
        if kept.iter().all(|k| (k.time - p.time).abs() >= min_separation) {
            kept.push(p);
        }
    }
    kept.sort_by_key(|p| p.index);
    kept
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let (x, y) = (&x[..n], &y[..n]);
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    let d = (sxx * syy).sqrt();
    (d > 0.0).then(|| sxy / d)
}

/// Peak list and nearness/pitch correlation over the post-warm-up rows.
pub fn analyze_trace(trace: &Trace) -> Result<TraceFeatures> {
    if trace.rows.len() <= trace.warmup {
        return Err(Error::InsufficientData(format!(
            "trace has {} rows, warm-up alone is {}",
            trace.rows.len(),
            trace.warmup
        )));
    }
    let rows = trace.settled();
    let t: Vec<f64> = rows.iter().map(|r| r.frame.time).collect();
    let rig: Vec<f64> = rows.iter().map(|r| r.frame.rigidity).collect();
    let near: Vec<f64> = rows.iter().map(|r| r.frame.nearness).collect();
    let logf: Vec<f64> = rows.iter().map(|r| r.params.center_freq.ln()).collect();
    let mut peaks = find_peaks(&t, &rig, PEAK_THRESHOLD, PEAK_MIN_SEPARATION);
    for p in &mut peaks {
        p.index += trace.warmup;
    }
    Ok(TraceFeatures { peaks, sweep_correlation: pearson(&near, &logf) })
}

/// Per-frame (center time, centroid, spread) of the audio, Hz. Frames with
/// no energy are skipped.
pub fn spectral_profile(audio: &[f64], sample_rate: f64, window: usize, hop: usize) -> Result<Vec<(f64, f64, f64)>> {
    let spec = spectrogram(audio, sample_rate, window, hop)?;
    let mut out = Vec::with_capacity(spec.frames());
    for f in 0..spec.frames() {
        if let Some((c, s)) = spectral_stats(&spec, f)? {
            out.push((spec.frame_time(f), c, s));
        }
    }
    Ok(out)
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}
