use crate::config::DeviceConfig;
use crate::demux::{run_calibration, CalibrationLoop, CalibrationTable, SettleCriterion};
use crate::device::FingerIntent;
use crate::error::Result;

use super::engine::Engine;

/// The full closed loop with the finger held still at each grid point.
pub struct PlantCalibrationLoop {
    cfg: DeviceConfig,
    seed: u64,
    engine: Option<Engine>,
}

impl PlantCalibrationLoop {
    pub fn new(cfg: &DeviceConfig, seed: u64) -> Self {
        Self { cfg: cfg.clone(), seed, engine: None }
    }
}

impl CalibrationLoop for PlantCalibrationLoop {
    fn tick_rate(&self) -> f64 {
        self.cfg.sensor_rate_hz
    }

    fn hold(&mut self, nearness: f64, rigidity_intent: f64) -> Result<()> {
        let intent = FingerIntent::new(nearness, rigidity_intent, self.cfg.sensor_range_mm)?;
        self.engine = Some(Engine::new(&self.cfg, None, self.seed, intent)?);
        Ok(())
    }

    fn tick(&mut self) -> Result<f64> {
        let engine = self.engine.as_mut().ok_or_else(|| crate::error::contract("tick before hold"))?;
        let intent = engine.intent();
        if engine.tick() > 0 {
            engine.advance()?;
        }
        engine.take_audio();
        Ok(engine.sample(intent)?.frame.amplitude)
    }
}

pub fn settle_criterion(cfg: &DeviceConfig) -> SettleCriterion {
    SettleCriterion { window: cfg.settle_window_s, tolerance: cfg.settle_tolerance, max_time: cfg.settle_max_s }
}

/// Rigid and loose reference amplitudes over an evenly spaced grid.
pub fn calibrate(cfg: &DeviceConfig, points: usize) -> Result<CalibrationTable> {
    cfg.validate()?;
    let mut lp = PlantCalibrationLoop::new(cfg, 0);
    run_calibration(&mut lp, &cfg.calibration_grid(points), &settle_criterion(cfg))
}
