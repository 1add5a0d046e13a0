//! Proximity sensor and drive output stage.
//!
//! Quantization rounds half to even everywhere so the closed loop sees no
//! directional bias.

use crate::config::DeviceConfig;
use crate::error::{contract, Error, Result};
use crate::synth::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProximitySample {
    pub counts: u32,
    /// True gap exceeded the sensing range.
    pub saturated: bool,
    /// Sample instant in integer sensor ticks; see [`ProximitySample::time`].
    pub tick: u64,
}

impl ProximitySample {
    pub fn time(&self, sensor_rate: f64) -> f64 {
        self.tick as f64 / sensor_rate
    }
}

/// Linear, noiseless (by default) proximity sensor.
#[derive(Debug, Clone)]
pub struct ProximitySensor {
    pub resolution: f64,
    pub range: f64,
    pub max_count: u32,
    dither: Option<SplitMix64>,
}

impl ProximitySensor {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self {
            resolution: cfg.sensor_resolution_mm,
            range: cfg.sensor_range_mm,
            max_count: cfg.max_count(),
            dither: cfg.sensor_dither.then(|| SplitMix64::new(cfg.sensor_dither_seed)),
        }
    }

    pub fn sense_proximity(&mut self, gap: f64, tick: u64) -> Result<ProximitySample> {
        if !(gap >= 0.0) {
            return Err(contract(format!("negative gap {gap} mm")));
        }
        let mut x = gap / self.resolution;
        if let Some(rng) = self.dither.as_mut() {
            x += rng.next_f64() - 0.5;
        }
        let counts = x.round_ties_even().clamp(0.0, self.max_count as f64) as u32;
        Ok(ProximitySample { counts, saturated: gap > self.range, tick })
    }

    pub fn counts_to_mm(&self, counts: u32) -> Result<f64> {
        if counts > self.max_count {
            return Err(contract(format!("counts {counts} outside [0, {}]", self.max_count)));
        }
        Ok(counts as f64 * self.resolution)
    }
}

/// Temperature-compensated, quantized coil driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveStage {
    pub steps: u32,
    pub temp_min: f64,
    pub temp_max: f64,
    pub alpha: f64,
    /// Electrical power at full current with the coil at 20 °C, W.
    pub full_power: f64,
}

impl DriveStage {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self {
            steps: cfg.output_steps,
            temp_min: cfg.temp_min_c,
            temp_max: cfg.temp_max_c,
            alpha: cfg.alpha_cu,
            full_power: cfg.coil_power_w,
        }
    }

    fn top(&self) -> f64 {
        (self.steps - 1) as f64
    }

    /// Resistance relative to 20 °C.
    pub fn coil_resistance(&self, temp: f64) -> f64 {
        1.0 + self.alpha * (temp - 20.0)
    }

    /// Map a force command to a drive code. Full scale is anchored at the
    /// hottest rated temperature, so colder coils use fewer codes.
    pub fn compensate_and_quantize(&self, force_command: f64, temp: f64) -> Result<u32> {
        if !(0.0..=1.0).contains(&force_command) {
            return Err(contract(format!("force command {force_command} outside [0, 1]")));
        }
        if !(self.temp_min..=self.temp_max).contains(&temp) {
            return Err(Error::OverTemperature { temp, min: self.temp_min, max: self.temp_max });
        }
        let raw = force_command * self.coil_resistance(temp) / self.coil_resistance(self.temp_max);
        Ok((raw * self.top()).round_ties_even() as u32)
    }

    /// Commanded current as a fraction of full scale: the drive voltage over
    /// the hot coil resistance.
    pub fn current_fraction(&self, drive_steps: u32, temp: f64) -> f64 {
        drive_steps as f64 / self.top() * self.coil_resistance(self.temp_max) / self.coil_resistance(temp)
    }

    /// Force-producing drive the plant actually sees, in `[0, 1]`.
    pub fn drive_steps_to_actuation(&self, drive_steps: u32, temp: f64) -> Result<f64> {
        if drive_steps >= self.steps {
            return Err(contract(format!("drive steps {drive_steps} outside [0, {}]", self.steps - 1)));
        }
        Ok(self.current_fraction(drive_steps, temp).clamp(0.0, 1.0))
    }

    /// I²R dissipation in W.
    pub fn electrical_power(&self, drive_steps: u32, temp: f64) -> f64 {
        let i = self.current_fraction(drive_steps, temp);
        self.full_power * i * i * self.coil_resistance(temp)
    }
}
