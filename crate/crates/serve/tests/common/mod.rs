#![allow(dead_code)]

use std::sync::Arc;

use retrobench::env::{GamePackage, Scenario, Split};
use retrobench::sim::LevelSpec;
use retrobench::{Button, Buttons};
use retrobench_serve::protocol::{decode_server, ServerMessage};
use retrobench_serve::SessionConfig;

pub const RIGHT: Buttons = Buttons::NONE.with(Button::Right);

/// Flat 14-row level `cols` tiles wide.
pub fn flat(cols: usize) -> LevelSpec {
    let rows: Vec<String> = (0..14)
        .map(|r| if r >= 10 { "#".repeat(cols) } else { ".".repeat(cols) })
        .collect();
    LevelSpec::from_ascii(&rows.join("\n"), 2, (cols as i32 - 6) * 16).unwrap()
}

/// Two long training levels, one short test level and one long test level.
pub fn package() -> Arc<GamePackage> {
    let levels = vec![
        ("train-a".to_string(), flat(300)),
        ("train-b".to_string(), flat(300)),
        ("test-short".to_string(), flat(40)),
        ("test-long".to_string(), flat(300)),
    ];
    Arc::new(GamePackage::from_levels("serve-test", levels, Scenario::default()).unwrap())
}

pub fn split() -> Split {
    Split {
        seed: 0,
        train: vec!["train-a".into(), "train-b".into()],
        test: vec!["test-short".into(), "test-long".into()],
    }
}

pub fn config() -> SessionConfig {
    SessionConfig {
        tick_hz: 0.0,
        ..SessionConfig::default()
    }
}

pub fn frames(msgs: &[ServerMessage]) -> usize {
    msgs.iter().filter(|m| matches!(m, ServerMessage::Frame { .. })).count()
}

pub fn decode_one(bytes: &[u8]) -> ServerMessage {
    let mut v = decode_server(bytes).unwrap();
    assert_eq!(v.len(), 1);
    v.pop().unwrap()
}
