//! Nearness/rigidity demultiplexer.
//!
//! A fixed tactile wave makes the finger vibrate; proximity is averaged over
//! whole wave cycles to give *nearness*, and the RMS deviation around that
//! average gives the vibration amplitude. A calibration table of rigid and
//! loose reference amplitudes across nearness turns amplitude into a
//! normalized *rigidity* that does not depend on nearness.

mod amplitude;
mod calibration;
mod nearness;

pub use amplitude::AmplitudeState;
pub use calibration::{
    run_calibration, settle_amplitude, CalibrationLoop, CalibrationTable, SettleCriterion, DEGENERATE_SPREAD_MM,
};
pub use nearness::NearnessState;

use crate::config::DeviceConfig;
use crate::error::Result;
use crate::transducers::{ProximitySample, ProximitySensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlFrame {
    pub time: f64,
    /// mm.
    pub nearness: f64,
    /// RMS vibration amplitude, mm.
    pub amplitude: f64,
    /// Normalized rigidity in [0, 1]; the raw amplitude when no calibration
    /// table is loaded (see `normalized`).
    pub rigidity: f64,
    pub normalized: bool,
    /// Emitted before the nearness window filled.
    pub warming_up: bool,
}

#[derive(Debug, Clone)]
pub struct Demux {
    sensor: ProximitySensor,
    sensor_rate: f64,
    nearness: NearnessState,
    amplitude: AmplitudeState,
    table: Option<CalibrationTable>,
}

impl Demux {
    pub fn new(cfg: &DeviceConfig, table: Option<CalibrationTable>) -> Result<Self> {
        Ok(Self {
            sensor: ProximitySensor::from_config(cfg),
            sensor_rate: cfg.sensor_rate_hz,
            nearness: NearnessState::new(cfg.nearness_window()?),
            amplitude: AmplitudeState::new(cfg.amplitude_tau_s, cfg.sensor_rate_hz),
            table,
        })
    }

    pub fn table(&self) -> Option<&CalibrationTable> {
        self.table.as_ref()
    }

    pub fn window(&self) -> usize {
        self.nearness.window()
    }

    /// One sensor tick through the chain: counts → mm → nearness →
    /// amplitude → rigidity.
    pub fn process_sample(&mut self, sample: &ProximitySample) -> Result<ControlFrame> {
        let mm = self.sensor.counts_to_mm(sample.counts)?;
        let nearness = self.nearness.update(mm);
        let warming_up = self.nearness.warming_up();
        let amplitude = self.amplitude.update(mm, nearness);
        let (rigidity, normalized) = match &self.table {
            Some(t) => (t.compute_rigidity(amplitude, nearness)?, true),
            None => (amplitude, false),
        };
        Ok(ControlFrame { time: sample.time(self.sensor_rate), nearness, amplitude, rigidity, normalized, warming_up })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude.amplitude()
    }

    pub fn nearness(&self) -> f64 {
        self.nearness.nearness()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_stream_pins_nearness_at_range() {
        let cfg = DeviceConfig::default();
        let table = CalibrationTable::new(vec![2.0, 16.0], vec![0.1, 0.05], vec![1.0, 0.5]).unwrap();
        let mut d = Demux::new(&cfg, Some(table)).unwrap();
        let mut sensor = ProximitySensor::from_config(&cfg);
        for tick in 0..200 {
            let s = sensor.sense_proximity(30.0, tick).unwrap();
            assert!(s.saturated);
            let f = d.process_sample(&s).unwrap();
            assert!((f.nearness - 17.0).abs() < 1e-9);
            assert!(f.amplitude.is_finite() && f.amplitude < 1e-9);
            assert!((0.0..=1.0).contains(&f.rigidity));
        }
    }

    #[test]
    fn warm_up_frames_are_flagged_and_finite() {
        let cfg = DeviceConfig::default();
        let mut d = Demux::new(&cfg, None).unwrap();
        let w = d.window() as u64;
        for tick in 0..2 * w {
            let s = ProximitySample { counts: (tick % 7) as u32 + 30, saturated: false, tick };
            let f = d.process_sample(&s).unwrap();
            assert_eq!(f.warming_up, tick + 1 < w);
            assert!(f.nearness.is_finite() && f.amplitude.is_finite() && f.rigidity.is_finite());
            assert!(!f.normalized);
            assert_eq!(f.rigidity, f.amplitude);
        }
    }
}
