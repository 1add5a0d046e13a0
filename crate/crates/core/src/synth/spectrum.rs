use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{contract, Result};

/// Short-time magnitude spectrum, frames as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f64>>,
    pub window: usize,
    /// s.
    pub hop: f64,
    /// Hz.
    pub bin_width: f64,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn bins(&self) -> usize {
        self.window / 2 + 1
    }

    /// Center time of a frame, s.
    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 * self.hop + 0.5 / self.bin_width
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.magnitudes {
            let mut first = true;
            for m in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{m:.6e}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Hann-weighted magnitude STFT. Audio shorter than one window yields an
/// empty spectrogram.
pub fn spectrogram(audio: &[f64], sample_rate: f64, window: usize, hop: usize) -> Result<Spectrogram> {
    if window < 2 || !window.is_power_of_two() {
        return Err(contract(format!("window {window} is not a power of two")));
    }
    if hop == 0 || hop > window {
        return Err(contract(format!("hop {hop} outside [1, {window}]")));
    }
    let w = hann(window);
    let fft = FftPlanner::new().plan_fft_forward(window);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut magnitudes = Vec::new();
    let mut start = 0;
    while start + window <= audio.len() {
        for (b, (x, wi)) in buf.iter_mut().zip(audio[start..start + window].iter().zip(&w)) {
            *b = Complex::new(x * wi, 0.0);
        }
        fft.process(&mut buf);
        magnitudes.push(buf[..window / 2 + 1].iter().map(|c| c.norm()).collect());
        start += hop;
    }
    Ok(Spectrogram { magnitudes, window, hop: hop as f64 / sample_rate, bin_width: sample_rate / window as f64 })
}

/// Time-domain energy of the windowed frame recovered from its one-sided
/// magnitudes (interior bins stand for their negative-frequency mirror).
pub fn one_sided_energy(magnitudes: &[f64], window: usize) -> f64 {
    let last = window / 2;
    let sum: f64 =
        magnitudes.iter().enumerate().map(|(k, m)| if k == 0 || k == last { m * m } else { 2.0 * m * m }).sum();
    sum / window as f64
}

/// Magnitude-weighted centroid and standard deviation of one frame, Hz.
/// `None` for an all-zero frame.
pub fn spectral_stats(spec: &Spectrogram, frame: usize) -> Result<Option<(f64, f64)>> {
    let row =
        spec.magnitudes.get(frame).ok_or_else(|| contract(format!("frame {frame} outside [0, {})", spec.frames())))?;
    Ok(magnitude_stats(row, spec.bin_width))
}

pub fn magnitude_stats(row: &[f64], bin_width: f64) -> Option<(f64, f64)> {
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let centroid = row.iter().enumerate().map(|(k, m)| k as f64 * bin_width * m).sum::<f64>() / total;
    let var = row.iter().enumerate().map(|(k, m)| (k as f64 * bin_width - centroid).powi(2) * m).sum::<f64>() / total;
    Some((centroid, var.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sine_peaks_in_expected_bin() {
        let fs = 16000.0;
        let x: Vec<f64> = (0..4096).map(|n| (2.0 * PI * 1000.0 * n as f64 / fs).sin()).collect();
        let s = spectrogram(&x, fs, 1024, 512).unwrap();
        assert_eq!(s.frames(), 7);
        assert_eq!(s.bins(), 513);
        for row in &s.magnitudes {
            let peak = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(peak, (1000.0f64 / 15.625).round() as usize);
        }
    }

    #[test]
    fn silence_and_short_input() {
        let s = spectrogram(&vec![0.0; 2048], 16000.0, 256, 128).unwrap();
        assert!(s.magnitudes.iter().flatten().all(|&m| m == 0.0));
        assert!(spectral_stats(&s, 0).unwrap().is_none());
        let s = spectrogram(&vec![0.5; 100], 16000.0, 256, 128).unwrap();
        assert_eq!(s.frames(), 0);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(spectrogram(&[0.0; 10], 1.0, 100, 10).is_err());
        assert!(spectrogram(&[0.0; 10], 1.0, 64, 65).is_err());
        assert!(spectrogram(&[0.0; 10], 1.0, 64, 0).is_err());
        let s = spectrogram(&[0.0; 64], 1.0, 64, 64).unwrap();
        assert!(spectral_stats(&s, 1).is_err());
    }

    #[test]
    fn parseval_holds() {
        let mut g = super::super::SplitMix64::new(3);
        let x: Vec<f64> = (0..1024).map(|_| g.next_noise()).collect();
        let n = 256;
        let s = spectrogram(&x, 16000.0, n, n).unwrap();
        let w = hann(n);
        for (f, row) in s.magnitudes.iter().enumerate() {
            let direct: f64 = x[f * n..(f + 1) * n].iter().zip(&w).map(|(a, b)| (a * b).powi(2)).sum();
            assert_relative_eq!(one_sided_energy(row, n), direct, max_relative = 1e-6);
        }
    }

    #[test]
    fn stats_oracles() {
        let mut row = vec![0.0; 65];
        row[10] = 3.0;
        assert_eq!(magnitude_stats(&row, 15.625), Some((156.25, 0.0)));
        row[30] = 3.0;
        let (c, s) = magnitude_stats(&row, 10.0).unwrap();
        assert_relative_eq!(c, 200.0);
        assert_relative_eq!(s, 100.0);
    }
}
