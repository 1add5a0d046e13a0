use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::sync::mpsc;

use crate::config::DeviceConfig;
use crate::demux::CalibrationTable;
use crate::error::Result;

use super::protocol::Outbound;
use super::session::Session;

/// How often a session executor checks the wall clock.
pub const PACE_INTERVAL: Duration = Duration::from_millis(5);
const QUEUE_DEPTH: usize = 256;

#[derive(Debug, Clone)]
struct AppState {
    cfg: Arc<DeviceConfig>,
    table: Arc<Option<CalibrationTable>>,
}

/// `GET /ws` upgrades to one live session per connection.
pub fn router(cfg: DeviceConfig, table: Option<CalibrationTable>) -> Router {
    let state = AppState { cfg: Arc::new(cfg), table: Arc::new(table) };
    Router::new().route("/ws", get(upgrade)).with_state(state)
}

pub async fn serve(
    listener: tokio::net::TcpListener,
    cfg: DeviceConfig,
    table: Option<CalibrationTable>,
) -> Result<()> {
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    log::info!("listening on {addr:?}");
    axum::serve(listener, router(cfg, table)).await?;
    Ok(())
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

async fn connection(socket: WebSocket, state: AppState) {
    let session = match Session::new((*state.cfg).clone(), (*state.table).clone(), 0) {
        Ok(s) => s,
        Err(e) => {
            log::error!("cannot open session: {e}");
            return;
        }
    };
    let (mut sink, mut stream) = socket.split();
    let (in_tx, in_rx) = mpsc::channel::<String>(QUEUE_DEPTH);
    let (out_tx, mut out_rx) = mpsc::channel::<Outbound>(QUEUE_DEPTH);

    let errors = out_tx.clone();
    let executor = tokio::spawn(run_session(session, in_rx, out_tx));
    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if sink.send(Message::Text(msg.to_json().into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(_) => {
                let _ = errors.send(Outbound::error("binary frames are not supported")).await;
                continue;
            }
            Message::Close(_) => break,
            _ => continue,
        };
        if in_tx.send(text).await.is_err() {
            break;
        }
    }
    drop(in_tx);
    drop(errors);
    let _ = executor.await;
    writer.abort();
}

/// Sole owner of the session: drains the inbound queue and keeps the loop
/// paced to the wall clock.
async fn run_session(mut session: Session, mut inbox: mpsc::Receiver<String>, outbox: mpsc::Sender<Outbound>) {
    let epoch = Instant::now();
    let now = || epoch.elapsed().as_secs_f64();
    if outbox.send(session.status()).await.is_err() {
        return;
    }
    let mut ticker = tokio::time::interval(PACE_INTERVAL);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    loop {
        let out = tokio::select! {
            msg = inbox.recv() => match msg {
                Some(text) => session.handle_message(&text, now()),
                None => return,
            },
            _ = ticker.tick() => session.pace(now()),
        };
        for m in out {
            if outbox.send(m).await.is_err() {
                return;
            }
        }
    }
}
