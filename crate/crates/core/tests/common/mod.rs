#![allow(dead_code)]

use std::sync::Arc;

use retrobench::env::{EnvOptions, Environment, GamePackage, Scenario, DEFAULT_SCENARIO};
use retrobench::sim::{LevelSpec, ZoneSetConfig};
use retrobench::wrappers::StickyEnv;
use retrobench::{Button, Buttons};

pub const RIGHT: Buttons = Buttons::NONE.with(Button::Right);
pub const LEFT: Buttons = Buttons::NONE.with(Button::Left);

/// 14-row level whose columns are described by `floor`: `#` solid ground
/// from row 10 down, `.` a pit, `|` a wall from row 4 down.
pub fn strip(floor: &str) -> LevelSpec {
    let cols: Vec<char> = floor.chars().collect();
    let mut rows = Vec::new();
    for r in 0..14 {
        let row: String = cols
            .iter()
            .map(|&c| match c {
                '#' if r >= 10 => '#',
                '|' if r >= 4 => '=',
                _ => '.',
            })
            .collect();
        rows.push(row);
    }
    let end = (cols.len() as i32 - 6) * 16;
    LevelSpec::from_ascii(&rows.join("\n"), 2, end).unwrap()
}

pub fn flat(cols: usize) -> LevelSpec {
    strip(&"#".repeat(cols))
}

pub fn package(levels: Vec<(&str, LevelSpec)>) -> GamePackage {
    let levels = levels.into_iter().map(|(id, l)| (id.to_string(), l)).collect();
    GamePackage::from_levels("test", levels, Scenario::default()).unwrap()
}

pub fn env_for(level: LevelSpec) -> Environment {
    Environment::new(
        "test",
        Arc::new(level),
        Scenario::default(),
        Default::default(),
        EnvOptions::headless(0),
    )
    .unwrap()
}

pub fn sticky(level: LevelSpec, seed: u64) -> StickyEnv {
    StickyEnv::new(env_for(level), seed)
}

/// Small generated package (a few zones, short levels).
pub fn small_generated(seed: u64) -> GamePackage {
    let mut cfg = ZoneSetConfig::new(seed, 5, (1, 3));
    cfg.level_length_range = (1600, 2400);
    GamePackage::generate("small", &cfg).unwrap()
}

pub fn default_scenario() -> &'static str {
    DEFAULT_SCENARIO
}
