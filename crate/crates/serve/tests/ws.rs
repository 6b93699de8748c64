mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use common::*;
use futures_util::{SinkExt, StreamExt};
use retrobench::record::ReplayFile;
use retrobench::Buttons;
use retrobench_serve::protocol::{rle_decode, ClientMessage, EndReason, ServerMessage};
use retrobench_serve::session::replay_file_name;
use retrobench_serve::{serve, EpisodeStatus, ServerState, SessionConfig, SessionRecord};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(cfg: SessionConfig, assets: Option<&Path>) -> String {
    let pkg = Arc::try_unwrap(package()).ok().unwrap();
    let state = ServerState::new(pkg, split(), cfg, assets.map(Path::to_path_buf)).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, Arc::new(state)));
    addr.to_string()
}

async fn connect(addr: &str) -> Client {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn send(c: &mut Client, m: ClientMessage) {
    c.send(Message::binary(m.encode())).await.unwrap();
}

/// Next protocol message, or `None` once the server closes.
async fn recv(c: &mut Client) -> Option<ServerMessage> {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(30), c.next())
            .await
            .expect("server went quiet")?
            .ok()?;
        match msg {
            Message::Binary(b) => return Some(decode_one(&b)),
            Message::Close(_) => return None,
            _ => continue,
        }
    }
}

/// Reads until the server's close frame and returns its code.
async fn close_code(c: &mut Client) -> Option<u16> {
    loop {
        match tokio::time::timeout(Duration::from_secs(10), c.next()).await.unwrap() {
            Some(Ok(Message::Close(f))) => return f.map(|f| u16::from(f.code)),
            Some(Ok(_)) => continue,
            _ => return None,
        }
    }
}

fn fast(mut cfg: SessionConfig, hz: f64) -> SessionConfig {
    cfg.tick_hz = hz;
    cfg
}

#[tokio::test]
async fn held_right_streams_ordered_frames_and_scores() {
    let addr = start(fast(config(), 200.0), None).await;
    let mut c = connect(&addr).await;
    send(&mut c, ClientMessage::Input(RIGHT)).await;
    send(&mut c, ClientMessage::Ready).await;
    assert!(matches!(recv(&mut c).await, Some(ServerMessage::Session { .. })));

    let mut ticks = Vec::new();
    let mut score = f64::NAN;
    while ticks.len() < 100 || score.is_nan() {
        match recv(&mut c).await.unwrap() {
            ServerMessage::Frame { tick, data, .. } => {
                assert_eq!(rle_decode(&data).unwrap().len(), 320 * 224 * 3);
                ticks.push(tick);
                score = f64::NAN;
            }
            ServerMessage::Score { episode_return, .. } => score = episode_return,
            other => panic!("unexpected {other:?}"),
        }
    }
    assert_eq!(ticks, (1..=100).collect::<Vec<u32>>());
    assert!(score > 0.0, "score {score}");
}

#[tokio::test]
async fn idle_client_times_out_at_the_episode_limit() {
    let addr = start(config(), None).await;
    let mut c = connect(&addr).await;
    send(&mut c, ClientMessage::Ready).await;
    let mut frames = 0u32;
    loop {
        match recv(&mut c).await.unwrap() {
            ServerMessage::Frame { tick, timestep, .. } => {
                frames += 1;
                assert_eq!((tick, timestep), (frames, frames));
            }
            ServerMessage::EpisodeEnd { reason, timesteps, .. } => {
                assert_eq!((reason, timesteps), (EndReason::Timeout, 4500));
                break;
            }
            _ => {}
        }
    }
    assert_eq!(frames, 4500);
}

#[tokio::test]
async fn malformed_input_closes_with_protocol_error() {
    let addr = start(fast(config(), 15.0), None).await;
    let bad: Vec<Message> = vec![
        Message::binary(vec![3, 0, 0, 0, 0x10, 0x00, 0x10]),
        Message::binary(vec![1, 0, 0, 0, 0x55]),
        Message::binary(vec![2, 0]),
        Message::text("ready"),
    ];
    for m in bad {
        let mut c = connect(&addr).await;
        send(&mut c, ClientMessage::Ready).await;
        c.send(m).await.unwrap();
        assert_eq!(close_code(&mut c).await, Some(1002));
    }
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let addr = start(fast(config(), 100.0), None).await;
    let mut a = connect(&addr).await;
    let mut b = connect(&addr).await;
    send(&mut a, ClientMessage::Input(RIGHT)).await;
    send(&mut a, ClientMessage::Ready).await;
    send(&mut b, ClientMessage::Ready).await;
    let mut last = [0.0f64; 2];
    for (i, c) in [&mut a, &mut b].into_iter().enumerate() {
        let mut frames = 0;
        while frames < 20 {
            match recv(c).await.unwrap() {
                ServerMessage::Frame { .. } => frames += 1,
                ServerMessage::Score { episode_return, .. } => last[i] = episode_return,
                _ => {}
            }
        }
    }
    assert!(last[0] > 0.0);
    assert_eq!(last[1], 0.0);
}

#[tokio::test]
async fn transcript_of_a_disconnected_session_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SessionConfig {
        mode: retrobench_serve::protocol::Mode::Test,
        levels: Some(vec!["test-short".into()]),
        transcript_dir: Some(dir.path().to_path_buf()),
        ..fast(config(), 100.0)
    };
    let addr = start(cfg, None).await;
    let mut c = connect(&addr).await;
    send(&mut c, ClientMessage::Input(RIGHT)).await;
    send(&mut c, ClientMessage::Ready).await;
    let live = loop {
        if let Some(ServerMessage::EpisodeEnd {
            reason, total_return, ..
        }) = recv(&mut c).await
        {
            assert_eq!(reason, EndReason::Completed);
            break total_return;
        }
    };
    send(&mut c, ClientMessage::Input(Buttons::NONE)).await;
    // Let the next episode start before leaving.
    while !matches!(recv(&mut c).await, Some(ServerMessage::Frame { .. })) {}
    c.close(None).await.unwrap();
    drop(c);

    let session_dir = dir.path().join("session-0000");
    let json = session_dir.join("session.json");
    for _ in 0..200 {
        if json.exists() {
            break;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    let record: SessionRecord = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(record.episodes[0].status, EpisodeStatus::Finished);
    assert_eq!(record.episodes[0].total_return.to_bits(), live.to_bits());
    assert!(record.episodes[1..]
        .iter()
        .all(|e| e.status == EpisodeStatus::Abandoned));
    assert_eq!(record.levels[0].episodes.len(), 1);

    let pkg = package();
    for e in &record.episodes {
        let replay = ReplayFile::load(&session_dir.join(replay_file_name(e.index))).unwrap();
        let summary = replay.verify(&pkg).unwrap();
        assert_eq!(summary.total_return.to_bits(), e.total_return.to_bits());
    }
}

async fn http_get(addr: &str, path: &str) -> String {
    let mut s = TcpStream::connect(addr).await.unwrap();
    let req = format!("GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n");
    s.write_all(req.as_bytes()).await.unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).await.unwrap();
    out
}

#[tokio::test]
async fn serves_static_assets_or_a_placeholder() {
    let addr = start(config(), None).await;
    let page = http_get(&addr, "/").await;
    assert!(page.starts_with("HTTP/1.1 200"));
    assert!(page.contains("/ws"));

    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<p>play</p>").unwrap();
    std::fs::write(assets.path().join("app.js"), "console.log(1)").unwrap();
    let addr = start(config(), Some(assets.path())).await;
    assert!(http_get(&addr, "/").await.ends_with("<p>play</p>"));
    assert!(http_get(&addr, "/app.js").await.contains("console.log(1)"));
    assert!(http_get(&addr, "/missing.js").await.starts_with("HTTP/1.1 404"));
}
