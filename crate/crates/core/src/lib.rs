//! Deterministic simulator of a finger-on-electromagnet tactile loop.
//!
//! A magnet worn on the finger hovers over an electromagnet that is driven
//! with a fixed tactile wave. The proximity sensor sees the wave's vibration
//! on top of the finger's slow movement; [`demux`] separates the two into
//! *nearness* and *rigidity*, and [`synth`] turns them into sound.
//!
//! - [`device`]: finger mass-spring-damper, magnetic force, coil heating.
//! - [`transducers`]: quantized proximity sensor and compensated drive stage.
//! - [`harness`]: multirate engine, gesture scripts, traces, latency budget.
//! - [`service`]: live wall-clock-paced sessions over WebSocket.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod demux;
pub mod device;
pub mod error;
pub mod harness;
pub mod service;
pub mod synth;
pub mod transducers;

pub use config::DeviceConfig;
pub use demux::{CalibrationTable, ControlFrame, Demux};
pub use device::{FingerIntent, Plant, PlantState};
pub use error::{Error, Result};
pub use transducers::{DriveStage, ProximitySample, ProximitySensor};
