//! Deterministic fixed-point platformer: procedural zones and acts, per-frame
//! physics and RGB rendering.
//!
//! Everything in here is integer arithmetic. Given a level and a button
//! sequence, two runs produce bitwise-identical [`WorldState`]s on any
//! platform.

mod level;
mod physics;
mod probe;
mod reach;
mod render;
mod solver;
mod tiles;
mod zone;

pub use level::{generate_level, LevelSpec, MAX_GENERATION_ATTEMPTS};
pub use physics::{physics_step, Player, WorldState, WORLD_BLOB_VERSION};
pub use probe::{run_right_runner, ProbeOutcome, RightRunnerPolicy};
pub use reach::{coarse_reachable, coarse_reachable_columns};
pub use render::{render, Observation, Palette, OBS_HEIGHT, OBS_WIDTH};
pub use solver::solve_level;
pub use tiles::{Tile, TileGrid, LEVEL_ROWS, TILE_PX};
pub use zone::{generate_zone_set, ZoneParams, ZoneSetConfig};

/// Player hitbox, in pixels.
pub const PLAYER_W: i32 = 12;
pub const PLAYER_H: i32 = 24;
