use std::fmt::Write as _;

use crate::demux::ControlFrame;
use crate::error::{Error, Result};
use crate::synth::SynthParams;

pub const TRACE_HEADER: &str =
    "t,gap_mm,counts,nearness_mm,amplitude_mm,rigidity,drive_steps,coil_temp_c,center_freq_hz,bandwidth_hz";

/// One sensor tick of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub tick: u64,
    pub frame: ControlFrame,
    /// True gap at the sample instant, mm.
    pub gap: f64,
    pub counts: u32,
    /// Drive code held at the sample instant.
    pub drive_steps: u32,
    pub coil_temp: f64,
    pub params: SynthParams,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Leading rows emitted before the nearness window filled.
    pub warmup: usize,
    /// False when the rigidity column carries raw amplitude.
    pub normalized: bool,
}

/// Six significant digits, no exponent, no negative zero.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() {
        "0".into()
    } else {
        s
    }
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn frames(&self) -> Vec<ControlFrame> {
        self.rows.iter().map(|r| r.frame).collect()
    }

    pub fn settled(&self) -> &[TraceRow] {
        &self.rows[self.warmup.min(self.rows.len())..]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                sig6(r.frame.time),
                sig6(r.gap),
                r.counts,
                sig6(r.frame.nearness),
                sig6(r.frame.amplitude),
                sig6(r.frame.rigidity),
                r.drive_steps,
                sig6(r.coil_temp),
                sig6(r.params.center_freq),
                sig6(r.params.bandwidth),
            );
        }
        out
    }

    /// Inverse of [`Trace::to_csv`] up to the written precision.
    pub fn from_csv(text: &str, warmup: usize, sensor_rate: f64, audio_rate: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == TRACE_HEADER => {}
            _ => return Err(Error::Parse { line: 1, reason: "missing trace header".into() }),
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse { line: idx + 1, reason };
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>().map_err(|_| err(format!("not a number: {f:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != 10 {
                return Err(err(format!("expected 10 columns, got {}", v.len())));
            }
            let tick = rows.len() as u64;
            rows.push(TraceRow {
                tick,
                frame: ControlFrame {
                    time: v[0],
                    nearness: v[3],
                    amplitude: v[4],
                    rigidity: v[5],
                    normalized: true,
                    warming_up: (tick as usize) < warmup,
                },
                gap: v[1],
                counts: v[2] as u32,
                drive_steps: v[6] as u32,
                coil_temp: v[7],
                params: SynthParams { center_freq: v[8], bandwidth: v[9], audio_rate },
            });
            if let [.., a, b] = rows.as_slice() {
                let dt = b.frame.time - a.frame.time;
                if (dt * sensor_rate - 1.0).abs() > 1e-3 {
                    return Err(err(format!("row spacing {dt} s is not one sensor period")));
                }
            }
        }
        Ok(Self { rows, warmup, normalized: true })
    }
}
