use std::f64::consts::PI;

use crate::config::DeviceConfig;
use crate::demux::{CalibrationTable, Demux};
use crate::device::{FingerIntent, Plant, PlantState};
use crate::error::{contract, Error, Result};
use crate::synth::{NoiseSynth, SynthMapping, SynthParams};
use crate::transducers::{DriveStage, ProximitySensor};

use super::gesture::{GestureScript, IntentSource};
use super::trace::{Trace, TraceRow};

/// Fixed-timestep closed loop: plant → sensor → demux → synth, with the
/// tactile wave driving the coil through a zero-order hold.
///
/// Call [`Engine::sample`] on every sensor tick and [`Engine::advance`] in
/// between. Identical call sequences give bit-identical results.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: DeviceConfig,
    plant: Plant,
    sensor: ProximitySensor,
    stage: DriveStage,
    demux: Demux,
    mapping: SynthMapping,
    synth: NoiseSynth,
    state: PlantState,
    intent: FingerIntent,
    /// Virtual player's feedforward lean against the mean magnetic pull, mm.
    lean: f64,
    /// Virtual player's integral correction to the spring anchor, mm.
    hold_offset: f64,
    drive_steps: u32,
    step: u64,
    tick: u64,
    sensor_divider: u64,
    output_divider: u64,
    audio_per_step: usize,
    dt: f64,
    audio: Vec<f64>,
}

impl Engine {
    pub fn new(cfg: &DeviceConfig, table: Option<CalibrationTable>, seed: u64, initial: FingerIntent) -> Result<Self> {
        cfg.validate()?;
        let plant = Plant::from_config(cfg);
        let lean = plant.static_pull(initial.target_gap, Self::mean_command(cfg), initial.rigidity_intent)?;
        let mapping = SynthMapping::from_config(cfg);
        Ok(Self {
            plant,
            sensor: ProximitySensor::from_config(cfg),
            stage: DriveStage::from_config(cfg),
            demux: Demux::new(cfg, table)?,
            mapping,
            synth: NoiseSynth::new(seed, SynthParams::bypass(cfg.audio_rate_hz), cfg.audio_level),
            state: PlantState::at_rest(initial.target_gap, cfg.ambient_c),
            intent: initial,
            lean,
            hold_offset: 0.0,
            drive_steps: 0,
            step: 0,
            tick: 0,
            sensor_divider: cfg.sensor_divider()? as u64,
            output_divider: cfg.output_divider()? as u64,
            audio_per_step: cfg.audio_per_step()? as usize,
            dt: cfg.physics_dt(),
            audio: Vec::new(),
            cfg: cfg.clone(),
        })
    }

    fn mean_command(cfg: &DeviceConfig) -> f64 {
        cfg.wave_bias + 0.5 * cfg.wave_amplitude
    }

    /// Force command of the tactile wave at `time`, in [0, 1].
    pub fn wave_command(cfg: &DeviceConfig, time: f64) -> f64 {
        let phase = (2.0 * PI * cfg.wave_freq_hz * time).sin();
        (cfg.wave_bias + cfg.wave_amplitude * 0.5 * (1.0 + phase)).clamp(0.0, 1.0)
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    pub fn state(&self) -> PlantState {
        self.state
    }

    pub fn intent(&self) -> FingerIntent {
        self.intent
    }

    pub fn demux(&self) -> &Demux {
        &self.demux
    }

    /// Index of the next sensor tick.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn sensor_divider(&self) -> u64 {
        self.sensor_divider
    }

    /// Sensor tick: latch the finger intent, sample proximity, demultiplex
    /// and retune the synth. Only valid on a sensor boundary.
    pub fn sample(&mut self, intent: FingerIntent) -> Result<TraceRow> {
        if !self.step.is_multiple_of(self.sensor_divider) {
            return Err(contract(format!("step {} is not a sensor tick", self.step)));
        }
        FingerIntent::new(intent.target_gap, intent.rigidity_intent, self.cfg.sensor_range_mm)?;
        self.intent = intent;
        self.lean = self.plant.static_pull(intent.target_gap, Self::mean_command(&self.cfg), intent.rigidity_intent)?;
        let sample = self.sensor.sense_proximity(self.state.gap, self.tick)?;
        let frame = self.demux.process_sample(&sample)?;
        let params = self.mapping.map_controls(&frame);
        self.synth.set_params(params);
        let row = TraceRow {
            tick: self.tick,
            frame,
            gap: self.state.gap,
            counts: sample.counts,
            drive_steps: self.drive_steps,
            coil_temp: self.state.coil_temp,
            params,
        };
        self.tick += 1;
        Ok(row)
    }

    /// One physics step with actuator update, player, plant, heating and audio.
    pub fn step(&mut self) -> Result<()> {
        let fault = |e: Error, time: f64| match e {
            Error::Contract(reason) => Error::SimulationFault { time, reason },
            other => other,
        };
        let t = self.time();
        if self.step.is_multiple_of(self.output_divider) {
            let cmd = Self::wave_command(&self.cfg, t);
            self.drive_steps = self.stage.compensate_and_quantize(cmd, self.state.coil_temp)?;
        }
        let drive = self.stage.drive_steps_to_actuation(self.drive_steps, self.state.coil_temp)? * self.cfg.max_drive;

        self.hold_offset += self.cfg.hold_gain * (self.intent.target_gap - self.state.gap) * self.dt;
        let anchor = FingerIntent {
            target_gap: self.intent.target_gap + self.lean + self.hold_offset,
            rigidity_intent: self.intent.rigidity_intent,
        };
        let power = self.stage.electrical_power(self.drive_steps, self.state.coil_temp);
        let next = self.plant.step_plant(self.state, anchor, drive, self.dt).map_err(|e| fault(e, t))?;
        self.state = self.plant.thermal.step_thermal(next, power, self.dt)?;

        for _ in 0..self.audio_per_step {
            let x = self.synth.next_sample();
            self.audio.push(x);
        }
        self.step += 1;
        Ok(())
    }

    /// Run the physics steps up to the next sensor tick.
    pub fn advance(&mut self) -> Result<()> {
        for _ in 0..self.sensor_divider {
            self.step()?;
        }
        Ok(())
    }

    /// Audio rendered since the last call.
    pub fn take_audio(&mut self) -> Vec<f64> {
        std::mem::take(&mut self.audio)
    }

    pub fn pending_audio(&self) -> &[f64] {
        &self.audio
    }
}

/// Samples one source over `ticks` sensor ticks, rendering audio for
/// `physics_steps` steps in total.
pub fn run_source(
    cfg: &DeviceConfig,
    source: &dyn IntentSource,
    ticks: u64,
    physics_steps: u64,
    table: Option<CalibrationTable>,
    seed: u64,
) -> Result<(Trace, Vec<f64>)> {
    if ticks == 0 {
        return Ok((Trace { rows: Vec::new(), warmup: 0, normalized: table.is_some() }, Vec::new()));
    }
    let normalized = table.is_some();
    let first = source.intent_at(0, 0.0)?;
    let mut engine = Engine::new(cfg, table, seed, first)?;
    let warmup = engine.demux().window();
    let div = engine.sensor_divider();
    let mut rows = Vec::with_capacity(ticks as usize);
    let mut steps = 0;
    for k in 0..ticks {
        let intent = if k == 0 { first } else { source.intent_at(k, k as f64 / cfg.sensor_rate_hz)? };
        rows.push(engine.sample(intent)?);
        let n = div.min(physics_steps.saturating_sub(steps));
        if k + 1 < ticks {
            for _ in 0..n {
                engine.step()?;
            }
            steps += n;
        }
    }
    while steps < physics_steps {
        engine.step()?;
        steps += 1;
    }
    let audio = engine.take_audio();
    Ok((Trace { rows, warmup, normalized }, audio))
}

/// Batch run of a gesture. Trace has `floor(duration · sensor_rate) + 1`
/// rows and the audio `duration · audio_rate` samples; a zero-length
/// gesture gives neither.
pub fn run_scenario(
    cfg: &DeviceConfig,
    gesture: &GestureScript,
    table: Option<CalibrationTable>,
    seed: u64,
) -> Result<(Trace, Vec<f64>)> {
    cfg.validate()?;
    let duration = gesture.duration();
    if duration <= 0.0 {
        return run_source(cfg, gesture, 0, 0, table, seed);
    }
    let steps = (duration * cfg.physics_rate_hz + 1e-9).floor() as u64;
    let div = cfg.sensor_divider()? as u64;
    run_source(cfg, gesture, steps / div + 1, steps, table, seed)
}
