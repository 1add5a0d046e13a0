//! Batch closed-loop runs: gestures in, traces and audio out.

mod analysis;
mod calibrate;
mod engine;
mod gesture;
mod latency;
mod trace;

pub use analysis::{
    analyze_trace, find_peaks, median, pearson, spectral_profile, Peak, TraceFeatures, PEAK_MIN_SEPARATION,
    PEAK_THRESHOLD,
};
pub use calibrate::{calibrate, settle_criterion, PlantCalibrationLoop};
pub use engine::{run_scenario, run_source, Engine};
pub use gesture::{Breakpoint, GestureScript, IntentSource, IntentTimeline};
pub use latency::{
    latency_report, LatencyReport, Verdict, AUDIO_LATENCY_MAX_MS, TACTILE_LATENCY_MAX_MS, TACTILE_NYQUIST_MIN_HZ,
};
pub use trace::{sig6, Trace, TraceRow, TRACE_HEADER};
