//! Device, model and loop parameters.
//!
//! `DeviceConfig` is the single source of truth for every number the
//! simulator uses. It loads from a plain `key = value` text file where every
//! key is optional and unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Only noise generator currently implemented; see [`crate::synth::SplitMix64`].
pub const NOISE_ALGORITHM: &str = "splitmix64";

macro_rules! device_config {
    ($( $(#[$doc:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct DeviceConfig {
            $( $(#[$doc])* pub $field: $ty, )*
        }

        impl Default for DeviceConfig {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl DeviceConfig {
            /// Every recognised key, in file order.
            pub const KEYS: &'static [&'static str] = &[$( stringify!($field), )*];

            /// Set one field from its textual form. Does not re-validate.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( stringify!($field) => {
                        self.$field = ConfigValue::parse_value(value).ok_or_else(|| {
                            Error::Config(format!("invalid value {value:?} for key {key}"))
                        })?;
                    } )*
                    _ => return Err(Error::Config(format!("unknown key {key:?}"))),
                }
                Ok(())
            }

            /// Textual value of one field, as it would be written to a config file.
            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $( stringify!($field) => Some(self.$field.format_value()), )*
                    _ => None,
                }
            }

            /// Render all fields as a loadable config file.
            pub fn to_text(&self) -> String {
                let mut out = String::new();
                $( let _ = writeln!(out, "{} = {}", stringify!($field), self.$field.format_value()); )*
                out
            }
        }
    };
}

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Option<Self>;
    fn format_value(&self) -> String;
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    }
    fn format_value(&self) -> String {
        format!("{self}")
    }
}

impl ConfigValue for u32 {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for u64 {
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for bool {
    fn parse_value(s: &str) -> Option<Self> {
        match s {
            "true" | "1" | "yes" | "on" => Some(true),
            "false" | "0" | "no" | "off" => Some(false),
            _ => None,
        }
    }
    fn format_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for String {
    fn parse_value(s: &str) -> Option<Self> {
        Some(s.to_string())
    }
    fn format_value(&self) -> String {
        self.clone()
    }
}

device_config! {
    // proximity sensor
    /// Distance per sensor count, mm.
    sensor_resolution_mm: f64 = 0.2,
    /// Sensing range, mm. Gaps beyond this saturate.
    sensor_range_mm: f64 = 17.0,
    sensor_rate_hz: f64 = 400.0,
    /// Add uniform ±0.5-count dither before rounding.
    sensor_dither: bool = false,
    sensor_dither_seed: u64 = 0x5eed,

    // drive output stage
    output_rate_hz: f64 = 200.0,
    /// Number of distinct drive codes; codes run 0..output_steps-1.
    output_steps: u32 = 2195,
    temp_min_c: f64 = 20.0,
    temp_max_c: f64 = 100.0,
    /// Coil resistance temperature coefficient, 1/°C.
    alpha_cu: f64 = 0.00393,

    // force field
    /// Force-law gain, N·mm² per unit drive.
    force_gain: f64 = 50_000.0,
    /// Force-law offset from the surface to the effective pole, mm.
    force_offset_mm: f64 = 60.0,
    max_drive: f64 = 1.0,

    // finger
    finger_mass_kg: f64 = 0.015,
    stiffness_min: f64 = 2500.0,
    stiffness_max: f64 = 7000.0,
    damping_min: f64 = 3.0,
    damping_max: f64 = 8.0,
    /// Integral gain with which the virtual player holds its intended gap, 1/s.
    hold_gain: f64 = 4.0,

    // coil thermal
    ambient_c: f64 = 20.0,
    thermal_tau_s: f64 = 60.0,
    /// Thermal resistance, °C/W.
    thermal_resistance: f64 = 40.0,
    /// Electrical power at full drive current with the coil at 20 °C, W.
    coil_power_w: f64 = 2.0,

    // loop
    physics_rate_hz: f64 = 8000.0,
    audio_rate_hz: f64 = 16000.0,
    audio_block: u32 = 64,
    wave_freq_hz: f64 = 48.0,
    /// Peak-to-peak swing of the tactile wave, fraction of full scale.
    wave_amplitude: f64 = 0.35,
    /// Minimum of the tactile wave, fraction of full scale.
    wave_bias: f64 = 0.1,

    // demultiplexer
    nearness_cycles: u32 = 6,
    amplitude_tau_s: f64 = 0.2,
    calibration_points: u32 = 8,
    calibration_min_mm: f64 = 2.0,
    calibration_max_mm: f64 = 16.0,
    settle_window_s: f64 = 0.5,
    settle_tolerance: f64 = 0.01,
    settle_max_s: f64 = 10.0,

    // audio mapping
    center_freq_lo_hz: f64 = 200.0,
    center_freq_hi_hz: f64 = 4000.0,
    bandwidth_lo_hz: f64 = 30.0,
    bandwidth_hi_hz: f64 = 1000.0,
    /// RMS level of the filtered noise before soft clipping.
    audio_level: f64 = 0.1,
    noise_algorithm: String = NOISE_ALGORITHM.to_string(),

    // live service
    telemetry_hz: f64 = 30.0,
    stream_pcm: bool = false,
}

fn ratio(num: f64, den: f64) -> Option<u32> {
    if den <= 0.0 || num <= 0.0 {
        return None;
    }
    let r = num / den;
    let n = r.round();
    ((r - n).abs() < 1e-9 && n >= 1.0 && n <= u32::MAX as f64).then_some(n as u32)
}

impl DeviceConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: idx + 1, reason: format!("expected key = value, got {line:?}") })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: idx + 1,
                reason: match e {
                    Error::Config(m) => m,
                    other => other.to_string(),
                },
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Number of distinct proximity counts, `sensor_range / sensor_resolution + 1`.
    pub fn sensor_levels(&self) -> u32 {
        self.max_count() + 1
    }

    pub fn max_count(&self) -> u32 {
        (self.sensor_range_mm / self.sensor_resolution_mm).round() as u32
    }

    pub fn physics_dt(&self) -> f64 {
        1.0 / self.physics_rate_hz
    }

    pub fn sensor_period(&self) -> f64 {
        1.0 / self.sensor_rate_hz
    }

    /// Physics steps per sensor tick.
    pub fn sensor_divider(&self) -> Result<u32> {
        ratio(self.physics_rate_hz, self.sensor_rate_hz).ok_or_else(|| {
            Error::Config(format!(
                "sensor rate {} Hz does not divide physics rate {} Hz",
                self.sensor_rate_hz, self.physics_rate_hz
            ))
        })
    }

    /// Physics steps per actuator update.
    pub fn output_divider(&self) -> Result<u32> {
        ratio(self.physics_rate_hz, self.output_rate_hz).ok_or_else(|| {
            Error::Config(format!(
                "output rate {} Hz does not divide physics rate {} Hz",
                self.output_rate_hz, self.physics_rate_hz
            ))
        })
    }

    /// Audio samples rendered per physics step.
    pub fn audio_per_step(&self) -> Result<u32> {
        ratio(self.audio_rate_hz, self.physics_rate_hz).ok_or_else(|| {
            Error::Config(format!(
                "audio rate {} Hz is not an integer multiple of physics rate {} Hz",
                self.audio_rate_hz, self.physics_rate_hz
            ))
        })
    }

    /// Nearness window length in sensor samples; must span a whole number of
    /// tactile cycles exactly.
    pub fn nearness_window(&self) -> Result<usize> {
        ratio(self.nearness_cycles as f64 * self.sensor_rate_hz, self.wave_freq_hz).map(|w| w as usize).ok_or_else(
            || {
                Error::Config(format!(
                    "{} cycles of a {} Hz wave is not a whole number of {} Hz sensor samples",
                    self.nearness_cycles, self.wave_freq_hz, self.sensor_rate_hz
                ))
            },
        )
    }

    /// Sensor ticks between telemetry frames in the live service.
    pub fn telemetry_divider(&self) -> u32 {
        ((self.sensor_rate_hz / self.telemetry_hz).round() as u32).max(1)
    }

    /// Evenly spaced calibration nearness grid.
    pub fn calibration_grid(&self, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![self.calibration_min_mm];
        }
        let span = self.calibration_max_mm - self.calibration_min_mm;
        (0..points).map(|i| self.calibration_min_mm + span * i as f64 / (points - 1) as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sensor_resolution_mm", self.sensor_resolution_mm),
            ("sensor_range_mm", self.sensor_range_mm),
            ("sensor_rate_hz", self.sensor_rate_hz),
            ("output_rate_hz", self.output_rate_hz),
            ("force_gain", self.force_gain),
            ("force_offset_mm", self.force_offset_mm),
            ("max_drive", self.max_drive),
            ("finger_mass_kg", self.finger_mass_kg),
            ("stiffness_min", self.stiffness_min),
            ("damping_min", self.damping_min),
            ("thermal_tau_s", self.thermal_tau_s),
            ("physics_rate_hz", self.physics_rate_hz),
            ("audio_rate_hz", self.audio_rate_hz),
            ("wave_freq_hz", self.wave_freq_hz),
            ("amplitude_tau_s", self.amplitude_tau_s),
            ("center_freq_lo_hz", self.center_freq_lo_hz),
            ("bandwidth_lo_hz", self.bandwidth_lo_hz),
            ("telemetry_hz", self.telemetry_hz),
            ("settle_window_s", self.settle_window_s),
            ("settle_max_s", self.settle_max_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.output_steps < 2195 {
            return Err(Error::Config(format!("output_steps must be at least 2195, got {}", self.output_steps)));
        }
        if self.stiffness_max <= self.stiffness_min || self.damping_max <= self.damping_min {
            return Err(Error::Config("finger impedance maxima must exceed minima".into()));
        }
        if self.temp_max_c <= self.temp_min_c {
            return Err(Error::Config("temp_max_c must exceed temp_min_c".into()));
        }
        if self.ambient_c < self.temp_min_c {
            return Err(Error::Config(format!(
                "ambient {} °C below rated minimum {} °C",
                self.ambient_c, self.temp_min_c
            )));
        }
        if self.wave_bias < 0.0 || self.wave_amplitude < 0.0 || self.wave_bias + self.wave_amplitude > 1.0 {
            return Err(Error::Config("tactile wave must stay within [0, 1] of full scale".into()));
        }
        if !(self.center_freq_hi_hz > self.center_freq_lo_hz) || self.center_freq_hi_hz >= self.audio_rate_hz / 2.0 {
            return Err(Error::Config("center frequency range must be ascending and below audio Nyquist".into()));
        }
        if !(self.bandwidth_hi_hz > self.bandwidth_lo_hz) {
            return Err(Error::Config("bandwidth range must be ascending".into()));
        }
        if self.calibration_min_mm < 0.0
            || self.calibration_max_mm > self.sensor_range_mm
            || self.calibration_max_mm <= self.calibration_min_mm
        {
            return Err(Error::Config("calibration range must be ascending within the sensing range".into()));
        }
        if self.audio_block == 0 {
            return Err(Error::Config("audio_block must be > 0".into()));
        }
        if self.noise_algorithm != NOISE_ALGORITHM {
            return Err(Error::Config(format!(
                "unsupported noise_algorithm {:?}; only {NOISE_ALGORITHM} is implemented",
                self.noise_algorithm
            )));
        }
        self.sensor_divider()?;
        self.output_divider()?;
        self.audio_per_step()?;
        self.nearness_window()?;
        Ok(())
    }
}
