use serde::{Deserialize, Serialize};

/// Client → server.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    Finger { gap_mm: Option<f64>, rigidity: Option<f64> },
    Start,
    Stop,
    SetConfig { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameMsg {
    pub t: f64,
    pub nearness_mm: f64,
    pub amplitude_mm: f64,
    pub rigidity: f64,
    pub gap_mm: f64,
    pub center_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub audio_rms: f64,
    /// Spectral centroid of the most recent audio, 0 until enough audio exists.
    pub centroid_hz: f64,
    pub spread_hz: f64,
    /// False while the rigidity field carries raw amplitude.
    pub normalized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pcm: Option<Vec<f32>>,
}

/// Mapping constants a client needs to synthesize locally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingInfo {
    pub center_freq_lo_hz: f64,
    pub center_freq_hi_hz: f64,
    pub bandwidth_lo_hz: f64,
    pub bandwidth_hi_hz: f64,
    pub nearness_range_mm: f64,
    pub audio_rate_hz: f64,
    pub audio_level: f64,
    pub noise_algorithm: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatusMsg {
    pub running: bool,
    pub sim_time: f64,
    pub telemetry_hz: f64,
    pub calibrated: bool,
    pub gap_mm: f64,
    pub rigidity_intent: f64,
    pub mapping: MappingInfo,
}

/// Server → client.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Frame(FrameMsg),
    Status(StatusMsg),
    Error { reason: String },
    Overrun { sim_time: f64, lag_s: f64 },
}

impl Outbound {
    pub fn error(reason: impl Into<String>) -> Self {
        Outbound::Error { reason: reason.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data always serializes")
    }
}
