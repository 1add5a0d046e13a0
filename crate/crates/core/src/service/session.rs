use std::collections::VecDeque;

use crate::config::DeviceConfig;
use crate::demux::{CalibrationTable, ControlFrame};
use crate::device::FingerIntent;
use crate::error::{Error, Result};
use crate::harness::{Engine, IntentTimeline, TraceRow};
use crate::synth::{magnitude_stats, spectrogram};

use super::protocol::{FrameMsg, Inbound, MappingInfo, Outbound, StatusMsg};

/// Audio analysed for the spectral fields of each telemetry frame.
pub const STATS_WINDOW: usize = 1024;
/// Lag behind wall time, s, beyond which the session reports an overrun and
/// lets simulated time fall behind.
pub const MAX_LAG_S: f64 = 0.25;
/// Sensor ticks one `pace` call may run before it yields.
pub const MAX_TICKS_PER_PACE: u64 = 200;

const DEFAULT_GAP_MM: f64 = 10.0;
const DEFAULT_RIGIDITY: f64 = 0.5;

/// One live simulation, advanced only by its owner.
///
/// Wall time is passed in by the caller, so the session itself is
/// deterministic: the same inbound messages at the same wall times give the
/// same outbound messages.
#[derive(Debug)]
pub struct Session {
    cfg: DeviceConfig,
    table: Option<CalibrationTable>,
    seed: u64,
    engine: Option<Engine>,
    running: bool,
    intent: FingerIntent,
    timeline: IntentTimeline,
    /// Wall time and simulated time at the last (re)anchoring.
    wall_base: f64,
    sim_base: f64,
    recorded: Option<Vec<ControlFrame>>,
    recent_audio: VecDeque<f64>,
    since_frame: Vec<f64>,
}

impl Session {
    pub fn new(cfg: DeviceConfig, table: Option<CalibrationTable>, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let intent = FingerIntent::new(DEFAULT_GAP_MM.min(cfg.sensor_range_mm), DEFAULT_RIGIDITY, cfg.sensor_range_mm)?;
        Ok(Self {
            cfg,
            table,
            seed,
            engine: None,
            running: false,
            intent,
            timeline: IntentTimeline::new(intent),
            wall_base: 0.0,
            sim_base: 0.0,
            recorded: None,
            recent_audio: VecDeque::with_capacity(STATS_WINDOW),
            since_frame: Vec::new(),
        })
    }

    /// Keep every ControlFrame for later comparison against a batch replay.
    pub fn with_frame_recording(mut self) -> Self {
        self.recorded = Some(Vec::new());
        self
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    pub fn table(&self) -> Option<&CalibrationTable> {
        self.table.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn running(&self) -> bool {
        self.running
    }

    pub fn intent(&self) -> FingerIntent {
        self.intent
    }

    /// Intent latched at each sensor tick so far.
    pub fn timeline(&self) -> &IntentTimeline {
        &self.timeline
    }

    pub fn recorded_frames(&self) -> Option<&[ControlFrame]> {
        self.recorded.as_deref()
    }

    /// Sensor ticks simulated so far.
    pub fn ticks(&self) -> u64 {
        self.engine.as_ref().map_or(0, |e| e.tick())
    }

    /// Simulated time of the next sensor tick.
    pub fn next_tick_time(&self) -> f64 {
        self.ticks() as f64 / self.cfg.sensor_rate_hz
    }

    pub fn status(&self) -> Outbound {
        let c = &self.cfg;
        Outbound::Status(StatusMsg {
            running: self.running,
            sim_time: self.next_tick_time(),
            telemetry_hz: c.sensor_rate_hz / c.telemetry_divider() as f64,
            calibrated: self.table.is_some(),
            gap_mm: self.intent.target_gap,
            rigidity_intent: self.intent.rigidity_intent,
            mapping: MappingInfo {
                center_freq_lo_hz: c.center_freq_lo_hz,
                center_freq_hi_hz: c.center_freq_hi_hz,
                bandwidth_lo_hz: c.bandwidth_lo_hz,
                bandwidth_hi_hz: c.bandwidth_hi_hz,
                nearness_range_mm: c.sensor_range_mm,
                audio_rate_hz: c.audio_rate_hz,
                audio_level: c.audio_level,
                noise_algorithm: c.noise_algorithm.clone(),
            },
        })
    }

    /// Apply one client text message received at wall time `wall` (s).
    pub fn handle_message(&mut self, text: &str, wall: f64) -> Vec<Outbound> {
        let msg = match parse_inbound(text) {
            Ok(m) => m,
            Err(reason) => return vec![Outbound::error(reason)],
        };
        match msg {
            Inbound::Finger { gap_mm, rigidity } => {
                let range = self.cfg.sensor_range_mm;
                let gap = gap_mm.unwrap_or(self.intent.target_gap);
                if !(gap.is_finite() && (0.0..=range).contains(&gap)) {
                    return vec![Outbound::error("gap_mm out of range")];
                }
                let r = rigidity.unwrap_or(self.intent.rigidity_intent);
                if !(r.is_finite() && (0.0..=1.0).contains(&r)) {
                    return vec![Outbound::error("rigidity out of range")];
                }
                self.intent = FingerIntent { target_gap: gap, rigidity_intent: r };
                Vec::new()
            }
            Inbound::Start => {
                if !self.running {
                    self.running = true;
                    self.wall_base = wall;
                    self.sim_base = self.next_tick_time();
                }
                vec![self.status()]
            }
            Inbound::Stop => {
                self.running = false;
                vec![self.status()]
            }
            Inbound::SetConfig { key, value } => {
                if self.running {
                    return vec![Outbound::error("set_config requires a stopped session")];
                }
                let mut cfg = self.cfg.clone();
                if let Err(e) = cfg.set(&key, &value).and_then(|_| cfg.validate()) {
                    return vec![Outbound::error(e.to_string())];
                }
                if let Err(e) = self.reset(cfg) {
                    return vec![Outbound::error(e.to_string())];
                }
                vec![self.status()]
            }
        }
    }

    /// Start over with a new configuration; the recorded timeline restarts too.
    fn reset(&mut self, cfg: DeviceConfig) -> Result<()> {
        cfg.nearness_window()?;
        cfg.sensor_divider()?;
        cfg.output_divider()?;
        cfg.audio_per_step()?;
        let range = cfg.sensor_range_mm;
        self.intent.target_gap = self.intent.target_gap.min(range);
        self.cfg = cfg;
        self.engine = None;
        self.timeline = IntentTimeline::new(self.intent);
        self.sim_base = 0.0;
        if let Some(r) = self.recorded.as_mut() {
            r.clear();
        }
        self.recent_audio.clear();
        self.since_frame.clear();
        Ok(())
    }

    /// Run every sensor tick whose simulated time has been reached by wall
    /// time `wall`; returns telemetry and notices.
    pub fn pace(&mut self, wall: f64) -> Vec<Outbound> {
        if !self.running {
            return Vec::new();
        }
        let allowed = self.sim_base + (wall - self.wall_base);
        let mut out = Vec::new();
        let mut ran = 0;
        while self.next_tick_time() <= allowed + 1e-12 && ran < MAX_TICKS_PER_PACE {
            match self.run_tick() {
                Ok(Some(frame)) => out.push(frame),
                Ok(None) => {}
                Err(e) => {
                    self.running = false;
                    out.push(Outbound::error(e.to_string()));
                    out.push(self.status());
                    return out;
                }
            }
            ran += 1;
        }
        let lag = allowed - self.next_tick_time();
        if lag > MAX_LAG_S {
            // Time dilates: state is never skipped, the wall anchor moves.
            out.push(Outbound::Overrun { sim_time: self.next_tick_time(), lag_s: lag });
            self.wall_base = wall;
            self.sim_base = self.next_tick_time();
        }
        out
    }

    fn run_tick(&mut self) -> Result<Option<Outbound>> {
        let intent = self.intent;
        let engine = match self.engine.as_mut() {
            Some(e) => {
                e.advance()?;
                e
            }
            None => {
                let e = Engine::new(&self.cfg, self.table.clone(), self.seed, intent)?;
                self.engine.insert(e)
            }
        };
        let tick = engine.tick();
        let row = engine.sample(intent)?;
        let audio = engine.take_audio();
        self.timeline.record(tick, intent)?;
        if let Some(r) = self.recorded.as_mut() {
            r.push(row.frame);
        }
        for &x in &audio {
            if self.recent_audio.len() == STATS_WINDOW {
                self.recent_audio.pop_front();
            }
            self.recent_audio.push_back(x);
        }
        self.since_frame.extend_from_slice(&audio);
        if tick % self.cfg.telemetry_divider() as u64 != 0 {
            return Ok(None);
        }
        self.telemetry(&row).map(Some)
    }

    fn telemetry(&mut self, row: &TraceRow) -> Result<Outbound> {
        let audio = std::mem::take(&mut self.since_frame);
        let audio_rms =
            if audio.is_empty() { 0.0 } else { (audio.iter().map(|x| x * x).sum::<f64>() / audio.len() as f64).sqrt() };
        let (centroid_hz, spread_hz) = if self.recent_audio.len() == STATS_WINDOW {
            let buf: Vec<f64> = self.recent_audio.iter().copied().collect();
            let spec = spectrogram(&buf, self.cfg.audio_rate_hz, STATS_WINDOW, STATS_WINDOW)?;
            magnitude_stats(&spec.magnitudes[0], spec.bin_width).unwrap_or((0.0, 0.0))
        } else {
            (0.0, 0.0)
        };
        let f = row.frame;
        let msg = FrameMsg {
            t: f.time,
            nearness_mm: f.nearness,
            amplitude_mm: f.amplitude,
            rigidity: f.rigidity,
            gap_mm: row.gap,
            center_freq_hz: row.params.center_freq,
            bandwidth_hz: row.params.bandwidth,
            audio_rms,
            centroid_hz,
            spread_hz,
            normalized: f.normalized,
            pcm: self.cfg.stream_pcm.then(|| audio.iter().map(|&x| x as f32).collect()),
        };
        let numbers = [
            msg.t,
            msg.nearness_mm,
            msg.amplitude_mm,
            msg.rigidity,
            msg.gap_mm,
            msg.center_freq_hz,
            msg.bandwidth_hz,
            msg.audio_rms,
            msg.centroid_hz,
            msg.spread_hz,
        ];
        if numbers.iter().any(|x| !x.is_finite()) {
            return Err(Error::SimulationFault { time: f.time, reason: "non-finite telemetry".into() });
        }
        Ok(Outbound::Frame(msg))
    }
}

fn parse_inbound(text: &str) -> std::result::Result<Inbound, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let kind =
        value.get("type").and_then(|t| t.as_str()).ok_or_else(|| "missing message type".to_string())?.to_string();
    if !matches!(kind.as_str(), "finger" | "start" | "stop" | "set_config") {
        return Err(format!("unknown message type {kind:?}"));
    }
    serde_json::from_value(value).map_err(|e| format!("invalid {kind} message: {e}"))
}
