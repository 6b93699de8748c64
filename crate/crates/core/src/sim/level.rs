use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::probe::run_right_runner;
use super::reach::coarse_reachable;
use super::tiles::{Tile, TileGrid, LEVEL_ROWS, TILE_PX};
use super::zone::ZoneParams;
use super::{PLAYER_H, PLAYER_W};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::rng::{chacha, derive_seed};

pub const MAX_GENERATION_ATTEMPTS: u32 = 16;

/// Timesteps the scripted right-runner gets when checking pocket levels.
const PROBE_TIMESTEPS: u32 = 4500;

const SURFACE_MIN: usize = 6;
const SURFACE_MAX: usize = 11;
const SPAWN_COL: usize = 3;
const END_RUN_COLS: usize = 20;
const BOTTOM: usize = LEVEL_ROWS - 1;
/// Columns needed after the chosen pocket start.
const POCKET_TAIL_COLS: usize = 70;
/// Upper-floor row of a backtrack pocket; the two corridors sit below it.
const POCKET_TOP: usize = 7;

/// One playable level: a concrete tile layout plus its start and completion
/// offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSpec {
    pub zone_id: u32,
    pub act_id: u32,
    pub layout_seed: u64,
    pub palette_seed: u64,
    pub tiles: TileGrid,
    pub spawn: (Fixed, Fixed),
    pub start_x: Fixed,
    pub end_x: Fixed,
    pub has_pocket: bool,
    fingerprint: u64,
}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    zone_id: u32,
    act_id: u32,
    layout_seed: u64,
    palette_seed: u64,
    start_x_px: i32,
    end_x_px: i32,
    spawn_px: (i32, i32),
    has_pocket: bool,
    width: usize,
    height: usize,
    tiles: Vec<String>,
}

impl LevelSpec {
    pub fn new(
        zone_id: u32,
        act_id: u32,
        layout_seed: u64,
        palette_seed: u64,
        tiles: TileGrid,
        spawn_px: (i32, i32),
        end_x_px: i32,
    ) -> Result<Self> {
        if tiles.height() != LEVEL_ROWS {
            return Err(Error::config(format!(
                "levels must be {LEVEL_ROWS} rows tall, got {}",
                tiles.height()
            )));
        }
        if end_x_px <= spawn_px.0 {
            return Err(Error::config(format!(
                "end_x {end_x_px} must lie right of start_x {}",
                spawn_px.0
            )));
        }
        if spawn_px.0 < 0 || spawn_px.0 + PLAYER_W > tiles.width_px() {
            return Err(Error::config("spawn outside the level"));
        }
        let mut level = Self {
            zone_id,
            act_id,
            layout_seed,
            palette_seed,
            tiles,
            spawn: (Fixed::from_px(spawn_px.0), Fixed::from_px(spawn_px.1)),
            start_x: Fixed::from_px(spawn_px.0),
            end_x: Fixed::from_px(end_x_px),
            has_pocket: false,
            fingerprint: 0,
        };
        level.fingerprint = level.compute_fingerprint();
        Ok(level)
    }

    /// Builds a level from an ASCII picture, spawning the player on top of
    /// the first solid tile in `spawn_col`.
    pub fn from_ascii(picture: &str, spawn_col: usize, end_x_px: i32) -> Result<Self> {
        let tiles = TileGrid::from_ascii(picture)?;
        let surface = (0..tiles.height())
            .find(|&r| tiles.at(spawn_col as i32, r as i32).is_solid())
            .ok_or_else(|| Error::config(format!("no floor under spawn column {spawn_col}")))?;
        Self::new(0, 0, 0, 0, tiles, spawn_on(spawn_col, surface), end_x_px)
    }

    pub fn start_x_px(&self) -> i32 {
        self.start_x.to_px()
    }

    pub fn end_x_px(&self) -> i32 {
        self.end_x.to_px()
    }

    /// Stable identity of the layout, embedded in save-state blobs.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.zone_id.to_le_bytes());
        h.update(self.act_id.to_le_bytes());
        h.update(self.layout_seed.to_le_bytes());
        h.update(self.palette_seed.to_le_bytes());
        h.update(self.spawn.0.raw().to_le_bytes());
        h.update(self.spawn.1.raw().to_le_bytes());
        h.update(self.end_x.raw().to_le_bytes());
        for row in self.tiles.to_rle_rows() {
            h.update(row.as_bytes());
            h.update(b"\n");
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn to_json(&self) -> Result<String> {
        let json = LevelJson {
            zone_id: self.zone_id,
            act_id: self.act_id,
            layout_seed: self.layout_seed,
            palette_seed: self.palette_seed,
            start_x_px: self.start_x_px(),
            end_x_px: self.end_x_px(),
            spawn_px: (self.spawn.0.to_px(), self.spawn.1.to_px()),
            has_pocket: self.has_pocket,
            width: self.tiles.width(),
            height: self.tiles.height(),
            tiles: self.tiles.to_rle_rows(),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: LevelJson = serde_json::from_str(text)?;
        let tiles = TileGrid::from_rle_rows(&json.tiles)?;
        if tiles.width() != json.width || tiles.height() != json.height {
            return Err(Error::Corrupt(format!(
                "tile rows decode to {}x{}, header says {}x{}",
                tiles.width(),
                tiles.height(),
                json.width,
                json.height
            )));
        }
        if json.start_x_px != json.spawn_px.0 {
            return Err(Error::Corrupt("start_x_px must equal the spawn x".into()));
        }
        let mut level = Self::new(
            json.zone_id,
            json.act_id,
            json.layout_seed,
            json.palette_seed,
            tiles,
            json.spawn_px,
            json.end_x_px,
        )?;
        level.has_pocket = json.has_pocket;
        Ok(level)
    }
}

fn spawn_on(col: usize, surface_row: usize) -> (i32, i32) {
    (
        col as i32 * TILE_PX + (TILE_PX - PLAYER_W) / 2,
        surface_row as i32 * TILE_PX - PLAYER_H,
    )
}

/// Column-by-column tile writer.
struct Builder {
    grid: TileGrid,
    col: usize,
    surface: usize,
}

impl Builder {
    fn new(width: usize) -> Self {
        Self {
            grid: TileGrid::new(width, LEVEL_ROWS),
            col: 0,
            surface: 9,
        }
    }

    fn ground(&mut self, n: usize) {
        for _ in 0..n {
            self.grid.fill_column(self.col, self.surface..=BOTTOM, Tile::Ground);
            self.col += 1;
        }
    }

    fn gap(&mut self, n: usize) {
        self.col += n;
    }

    fn wall(&mut self, height: usize, width: usize) {
        for _ in 0..width {
            self.grid.fill_column(self.col, self.surface..=BOTTOM, Tile::Ground);
            self.grid
                .fill_column(self.col, self.surface - height..=self.surface - 1, Tile::Block);
            self.col += 1;
        }
    }

    fn step(&mut self, delta: i32, min: usize, max: usize) {
        self.surface = (self.surface as i32 + delta).clamp(min as i32, max as i32) as usize;
    }

    /// Sealed shaft entered from the right. The only way on is to drop into
    /// the upper corridor, walk left to a hole at its far end, drop again and
    /// take the lower corridor right, under the wall, and up a short ramp.
    fn pocket(&mut self, rng: &mut ChaCha8Rng) {
        while self.surface != POCKET_TOP {
            self.ground(3);
            let delta = if self.surface > POCKET_TOP { -1 } else { 1 };
            self.step(delta, 0, BOTTOM);
        }
        self.ground(3);

        let top = POCKET_TOP;
        let floor2 = top + 3;
        let floor3 = top + 6;
        debug_assert_eq!(floor3, BOTTOM);

        // Column left of the hole closes both corridors.
        self.grid.fill_column(self.col, top..=BOTTOM, Tile::Ground);
        let hole = self.col + 1;
        let upper_len = rng.gen_range(9..=12);
        let shaft = hole + upper_len;
        let wall = shaft + 2;

        for c in hole..shaft {
            self.grid.set(c, top, Tile::Ground);
            if c >= hole + 2 {
                self.grid.set(c, floor2, Tile::Ground);
            }
            self.grid.set(c, floor3, Tile::Ground);
        }
        for c in shaft..wall {
            self.grid.set(c, floor2, Tile::Ground);
            self.grid.set(c, floor3, Tile::Ground);
        }
        for c in wall..wall + 2 {
            self.grid.fill_column(c, 0..=floor2, Tile::Block);
            self.grid.set(c, floor3, Tile::Ground);
        }
        self.col = wall + 2;
        self.surface = floor3;

        // Ramp back up to the normal terrain band.
        self.ground(3);
        while self.surface > SURFACE_MAX {
            self.step(-1, 0, BOTTOM);
            self.ground(2);
        }
    }
}

/// Generates act `act_index` of `zone`.
///
/// Every accepted level is confirmed traversable by the coarse jump-graph
/// search; levels carrying a backtrack pocket must additionally defeat the
/// scripted right-runner. Failing layouts are redrawn, up to
/// [`MAX_GENERATION_ATTEMPTS`] times.
pub fn generate_level(zone: &ZoneParams, act_index: u32) -> Result<LevelSpec> {
    zone.validate()?;
    if act_index >= zone.act_count {
        return Err(Error::config(format!(
            "act {act_index} out of range for zone {} with {} acts",
            zone.zone_id, zone.act_count
        )));
    }
    let layout_seed = zone.layout_seeds[act_index as usize];
    let has_pocket = chacha(derive_seed(layout_seed, 0x90C7)).gen_bool(zone.backtrack_pocket_rate);

    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = chacha(derive_seed(layout_seed, attempt as u64));
        let level = build_layout(zone, act_index, layout_seed, has_pocket, &mut rng)?;
        if !coarse_reachable(&level) {
            continue;
        }
        if has_pocket {
            let level = Arc::new(level);
            if run_right_runner(&level, PROBE_TIMESTEPS).reached_end {
                continue;
            }
            return Ok(Arc::try_unwrap(level).expect("probe released its handle"));
        }
        return Ok(level);
    }
    Err(Error::GenerationFailed {
        zone: zone.zone_id,
        act: act_index,
        seed: layout_seed,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

fn build_layout(
    zone: &ZoneParams,
    act_index: u32,
    layout_seed: u64,
    has_pocket: bool,
    rng: &mut ChaCha8Rng,
) -> Result<LevelSpec> {
    let content = (zone.level_length_px as usize).div_ceil(TILE_PX as usize);
    let mut b = Builder::new(content + END_RUN_COLS);
    let spawn_surface = b.surface;
    b.ground(10);

    // Leave room after the pocket for the longest feature run plus the
    // pocket itself.
    let latest = content.saturating_sub(POCKET_TAIL_COLS);
    if has_pocket && latest < b.col {
        return Err(Error::config(format!(
            "zone {}: level too short ({} px) for a backtrack pocket",
            zone.zone_id, zone.level_length_px
        )));
    }
    let mut pocket_at = has_pocket.then(|| {
        let lo = (content * 3 / 10).clamp(b.col, latest);
        let hi = (content * 6 / 10).clamp(lo, latest);
        rng.gen_range(lo..=hi)
    });

    // Features stop a little short of the completion offset so the finish
    // line always sits on open ground.
    while b.col + 12 < content {
        if let Some(at) = pocket_at {
            if b.col >= at && b.col + 48 < content {
                b.pocket(rng);
                pocket_at = None;
                continue;
            }
        }
        b.ground(rng.gen_range(4..=9));
        if rng.gen_bool(zone.gap_rate) {
            b.gap(rng.gen_range(2..=4));
            b.ground(2);
        } else if rng.gen_bool(zone.wall_rate) {
            let height = rng.gen_range(1..=3);
            let width = rng.gen_range(1..=2);
            b.wall(height, width);
        } else if rng.gen_bool(zone.terrain_roughness) {
            let delta = if b.surface <= SURFACE_MIN {
                rng.gen_range(1..=2)
            } else if b.surface >= SURFACE_MAX || rng.gen_bool(0.5) {
                -1
            } else {
                rng.gen_range(1..=2)
            };
            b.step(delta, SURFACE_MIN, SURFACE_MAX);
        }
    }
    let remaining = b.grid.width() - b.col;
    b.ground(remaining);

    let mut level = LevelSpec::new(
        zone.zone_id,
        act_index,
        layout_seed,
        zone.palette_seed,
        b.grid,
        spawn_on(SPAWN_COL, spawn_surface),
        content as i32 * TILE_PX,
    )?;
    level.has_pocket = has_pocket && pocket_at.is_none();
    if has_pocket && !level.has_pocket {
        return Err(Error::config(format!(
            "zone {}: level too short ({} px) for a backtrack pocket",
            zone.zone_id, zone.level_length_px
        )));
    }
    Ok(level)
}
