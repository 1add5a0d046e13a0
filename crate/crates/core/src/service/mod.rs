//! Live sessions: a client steers the virtual finger and receives loop
//! telemetry over a WebSocket (JSON text frames).
//!
//! Client → server:
//! `{"type":"finger","gap_mm":8.0,"rigidity":0.5}`, `{"type":"start"}`,
//! `{"type":"stop"}`, `{"type":"set_config","key":"telemetry_hz","value":"20"}`.
//!
//! Server → client: `frame`, `status`, `error` and `overrun` messages; see
//! [`Outbound`].

mod protocol;
#[cfg(feature = "server")]
mod server;
mod session;

pub use protocol::{FrameMsg, Inbound, MappingInfo, Outbound, StatusMsg};
#[cfg(feature = "server")]
pub use server::{router, serve, PACE_INTERVAL};
pub use session::{Session, MAX_LAG_S, MAX_TICKS_PER_PACE, STATS_WINDOW};
