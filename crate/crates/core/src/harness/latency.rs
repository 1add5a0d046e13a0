use std::fmt;

use serde::Serialize;

use crate::config::DeviceConfig;

/// Sensor-to-sound budget, ms.
pub const AUDIO_LATENCY_MAX_MS: f64 = 10.0;
/// Sensor-to-force budget, ms.
pub const TACTILE_LATENCY_MAX_MS: f64 = 2.0;
/// Peak cutaneous vibration sensitivity the actuator must be able to reach, Hz.
pub const TACTILE_NYQUIST_MIN_HZ: f64 = 250.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    pub audio_path_ms: f64,
    pub tactile_path_ms: f64,
    pub tactile_nyquist_hz: f64,
    pub verdicts: Vec<Verdict>,
}

impl LatencyReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Worst-case latencies from config arithmetic alone: one sensor period
/// plus one audio block, or plus one actuator hold period.
pub fn latency_report(cfg: &DeviceConfig) -> LatencyReport {
    let sensor_ms = 1000.0 / cfg.sensor_rate_hz;
    let audio_path_ms = sensor_ms + 1000.0 * cfg.audio_block as f64 / cfg.audio_rate_hz;
    let tactile_path_ms = sensor_ms + 1000.0 / cfg.output_rate_hz;
    let tactile_nyquist_hz = cfg.output_rate_hz / 2.0;
    let at_most =
        |name, value, unit, limit| Verdict { name, value, unit, relation: "<=", limit, pass: value <= limit + 1e-9 };
    let verdicts = vec![
        at_most("audio_path", audio_path_ms, "ms", AUDIO_LATENCY_MAX_MS),
        at_most("tactile_path", tactile_path_ms, "ms", TACTILE_LATENCY_MAX_MS),
        Verdict {
            name: "tactile_nyquist",
            value: tactile_nyquist_hz,
            unit: "Hz",
            relation: ">=",
            limit: TACTILE_NYQUIST_MIN_HZ,
            pass: tactile_nyquist_hz >= TACTILE_NYQUIST_MIN_HZ - 1e-9,
        },
    ];
    LatencyReport { audio_path_ms, tactile_path_ms, tactile_nyquist_hz, verdicts }
}

impl fmt::Display for LatencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.verdicts {
            writeln!(
                f,
                "{:<16} {:>8.3} {:<3} {} {:>7.3}  {}",
                v.name,
                v.value,
                v.unit,
                v.relation,
                v.limit,
                if v.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
