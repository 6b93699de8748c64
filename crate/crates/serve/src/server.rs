use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use retrobench::env::{GamePackage, Split};
use retrobench::rng::derive_seed;
use tokio::net::TcpListener;
use tokio::time::{interval, Interval, MissedTickBehavior};
use tower_http::services::ServeDir;

use crate::protocol::{decode_client, ServerMessage, CLOSE_PROTOCOL_ERROR};
use crate::session::{Session, SessionConfig};

const CLOSE_NORMAL: u16 = 1000;
const CLOSE_INTERNAL: u16 = 1011;

const PLACEHOLDER_INDEX: &str = "<!doctype html>
<title>retrobench</title>
<p>Session server is running. Connect a play client to <code>/ws</code>.</p>
";

pub struct ServerState {
    pub pkg: Arc<GamePackage>,
    pub split: Split,
    pub config: SessionConfig,
    /// Static client files; a placeholder page is served when absent.
    pub assets: Option<PathBuf>,
    next_session: AtomicU64,
}

impl ServerState {
    pub fn new(pkg: GamePackage, split: Split, config: SessionConfig, assets: Option<PathBuf>) -> crate::Result<Self> {
        config.validate()?;
        config.level_queue(&split)?;
        Ok(Self {
            pkg: Arc::new(pkg),
            split,
            config,
            assets,
            next_session: AtomicU64::new(0),
        })
    }
}

pub fn router(state: Arc<ServerState>) -> Router {
    let app = Router::new().route("/ws", get(upgrade));
    let app = match &state.assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    app.with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, state: Arc<ServerState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<ServerState>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_session(socket, state))
}

async fn close(socket: &mut WebSocket, code: u16, reason: String) {
    let frame = CloseFrame {
        code,
        reason: reason.into(),
    };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<ServerMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Binary(m.encode().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn next_tick(clock: &mut Option<Interval>) {
    match clock {
        Some(i) => {
            i.tick().await;
        }
        None => tokio::task::yield_now().await,
    }
}

async fn run_session(mut socket: WebSocket, state: Arc<ServerState>) {
    let id = state.next_session.fetch_add(1, Ordering::Relaxed);
    let cfg = state.config.clone();
    let mut session = match Session::new(state.pkg.clone(), &state.split, cfg.clone(), derive_seed(cfg.seed, id)) {
        Ok(s) => s,
        Err(e) => return close(&mut socket, CLOSE_INTERNAL, e.to_string()).await,
    };
    let mut clock = (cfg.tick_hz > 0.0).then(|| {
        let mut i = interval(Duration::from_secs_f64(1.0 / cfg.tick_hz));
        i.set_missed_tick_behavior(MissedTickBehavior::Delay);
        i
    });

    'session: loop {
        let running = session.is_running();
        tokio::select! {
            biased;
            incoming = socket.recv() => {
                let bytes = match incoming {
                    Some(Ok(Message::Binary(b))) => b,
                    Some(Ok(Message::Text(_))) => {
                        close(&mut socket, CLOSE_PROTOCOL_ERROR, "text messages are not part of the protocol".into()).await;
                        break;
                    }
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                };
                let msgs = match decode_client(&bytes) {
                    Ok(m) => m,
                    Err(e) => {
                        close(&mut socket, CLOSE_PROTOCOL_ERROR, e.to_string()).await;
                        break;
                    }
                };
                let mut out = Vec::new();
                for m in msgs {
                    match session.handle(m) {
                        Ok(o) => out.extend(o),
                        Err(e) => {
                            close(&mut socket, CLOSE_INTERNAL, e.to_string()).await;
                            break 'session;
                        }
                    }
                }
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
            _ = next_tick(&mut clock), if running => {
                match session.tick() {
                    Ok(out) => {
                        if !send_all(&mut socket, out).await {
                            break;
                        }
                    }
                    Err(e) => {
                        close(&mut socket, CLOSE_INTERNAL, e.to_string()).await;
                        break;
                    }
                }
                if session.is_finished() {
                    break;
                }
            }
        }
    }

    let completed = session.is_finished();
    session.disconnect();
    if let Some(dir) = &cfg.transcript_dir {
        let dir = dir.join(format!("session-{id:04}"));
        let _ = tokio::task::spawn_blocking(move || session.write_transcript(&dir)).await;
    }
    if completed {
        close(&mut socket, CLOSE_NORMAL, "session complete".into()).await;
    }
}
