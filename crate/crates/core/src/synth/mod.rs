//! Sonification of the control stream: one noise source whose center
//! frequency follows nearness and whose bandwidth follows rigidity.

mod biquad;
mod noise;
mod spectrum;
mod wav;

pub use biquad::{BandPass, Biquad, BiquadCoeffs, NOISE_BANDWIDTH_RATIO, SECTIONS};
pub use noise::SplitMix64;
pub use spectrum::{hann, magnitude_stats, one_sided_energy, spectral_stats, spectrogram, Spectrogram};
pub use wav::{read_wav, write_wav, write_wav_to};

use crate::config::DeviceConfig;
use crate::demux::ControlFrame;
use crate::error::{contract, Result};

/// Standard deviation of uniform noise on [-1, 1).
const NOISE_SIGMA: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Hz.
    pub center_freq: f64,
    /// -3 dB width, Hz. At or above `audio_rate / 2` the filter is bypassed.
    pub bandwidth: f64,
    pub audio_rate: f64,
}

impl SynthParams {
    pub fn new(center_freq: f64, bandwidth: f64, audio_rate: f64) -> Result<Self> {
        let nyquist = audio_rate / 2.0;
        if !(center_freq > 0.0 && center_freq < nyquist) {
            return Err(contract(format!("center frequency {center_freq} Hz outside (0, {nyquist})")));
        }
        if !(bandwidth > 0.0 && (bandwidth <= center_freq || bandwidth >= nyquist)) {
            return Err(contract(format!(
                "bandwidth {bandwidth} Hz outside (0, {center_freq}] and below the bypass sentinel"
            )));
        }
        Ok(Self { center_freq, bandwidth, audio_rate })
    }

    /// Parameters that pass the raw noise through untouched.
    pub fn bypass(audio_rate: f64) -> Self {
        Self { center_freq: audio_rate / 4.0, bandwidth: audio_rate / 2.0, audio_rate }
    }

    pub fn is_bypass(&self) -> bool {
        self.bandwidth >= self.audio_rate / 2.0
    }
}

/// Exponential nearness→pitch and rigidity→bandwidth maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthMapping {
    pub f_lo: f64,
    pub f_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    /// Nearness at which the pitch bottoms out, mm.
    pub range: f64,
    pub audio_rate: f64,
}

impl SynthMapping {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self {
            f_lo: cfg.center_freq_lo_hz,
            f_hi: cfg.center_freq_hi_hz,
            b_lo: cfg.bandwidth_lo_hz,
            b_hi: cfg.bandwidth_hi_hz,
            range: cfg.sensor_range_mm,
            audio_rate: cfg.audio_rate_hz,
        }
    }

    /// Closer finger, higher pitch.
    pub fn center_freq(&self, nearness: f64) -> f64 {
        let x = (nearness / self.range).clamp(0.0, 1.0);
        self.f_lo * (self.f_hi / self.f_lo).powf(1.0 - x)
    }

    /// Never wider than the center frequency so the band stays above DC.
    pub fn bandwidth(&self, rigidity: f64, center_freq: f64) -> f64 {
        let r = rigidity.clamp(0.0, 1.0);
        (self.b_lo * (self.b_hi / self.b_lo).powf(r)).min(center_freq)
    }

    pub fn map_controls(&self, frame: &ControlFrame) -> SynthParams {
        let center_freq = self.center_freq(frame.nearness);
        SynthParams { center_freq, bandwidth: self.bandwidth(frame.rigidity, center_freq), audio_rate: self.audio_rate }
    }
}

/// Band-limited noise renderer. Parameters change only between samples.
#[derive(Debug, Clone)]
pub struct NoiseSynth {
    rng: SplitMix64,
    params: SynthParams,
    filter: BandPass,
    gain: f64,
    level: f64,
}

impl NoiseSynth {
    pub fn new(seed: u64, params: SynthParams, level: f64) -> Self {
        let mut s = Self {
            rng: SplitMix64::new(seed),
            params,
            filter: BandPass::new(1.0, 1.0, params.audio_rate),
            gain: 0.0,
            level,
        };
        s.set_params(params);
        s
    }

    pub fn params(&self) -> SynthParams {
        self.params
    }

    pub fn set_params(&mut self, params: SynthParams) {
        self.params = params;
        if !params.is_bypass() {
            self.filter.retune(params.center_freq, params.bandwidth, params.audio_rate);
            let enbw = NOISE_BANDWIDTH_RATIO * params.bandwidth;
            self.gain = self.level / NOISE_SIGMA * (params.audio_rate / (2.0 * enbw)).sqrt();
        }
    }

    /// One sample in [-1, 1]; `tanh` bounds the makeup-gained band.
    pub fn next_sample(&mut self) -> f64 {
        let x = self.rng.next_noise();
        if self.params.is_bypass() {
            return x;
        }
        (self.gain * self.filter.process(x)).tanh()
    }

    pub fn render_block(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_sample()).collect()
    }
}
