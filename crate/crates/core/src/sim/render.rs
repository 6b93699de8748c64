use super::physics::WorldState;
use super::tiles::{Tile, TILE_PX};
use super::{PLAYER_H, PLAYER_W};
use crate::rng::splitmix64;

pub const OBS_WIDTH: usize = 320;
pub const OBS_HEIGHT: usize = 224;

/// A 320x224 24-bit RGB frame, row-major, three bytes per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct Observation {
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Observation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Observation({}x{})", OBS_WIDTH, OBS_HEIGHT)
    }
}

impl Observation {
    pub fn width(&self) -> usize {
        OBS_WIDTH
    }

    pub fn height(&self) -> usize {
        OBS_HEIGHT
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * OBS_WIDTH + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Mean luminance of each `block`x`block` cell, scaled to [0, 1].
    pub fn downsample_gray(&self, block: usize) -> Vec<f64> {
        let (bw, bh) = (OBS_WIDTH / block, OBS_HEIGHT / block);
        let mut sums = vec![0u64; bw * bh];
        for y in 0..bh * block {
            let row = &self.pixels[y * OBS_WIDTH * 3..(y + 1) * OBS_WIDTH * 3];
            for (x, px) in row.chunks_exact(3).enumerate().take(bw * block) {
                // Integer BT.601 luma weights.
                let luma = 299 * px[0] as u64 + 587 * px[1] as u64 + 114 * px[2] as u64;
                sums[(y / block) * bw + x / block] += luma;
            }
        }
        let denom = (block * block) as f64 * 255.0 * 1000.0;
        sums.into_iter().map(|s| s as f64 / denom).collect()
    }
}

/// Zone colours, derived from the zone's palette seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Palette {
    pub sky: [u8; 3],
    pub sky_band: [u8; 3],
    pub ground: [u8; 3],
    pub ground_alt: [u8; 3],
    pub grass: [u8; 3],
    pub block: [u8; 3],
    pub spike: [u8; 3],
    pub player: [u8; 3],
    pub star: [u8; 3],
}

impl Palette {
    pub fn from_seed(seed: u64) -> Self {
        let mut state = seed;
        let mut next = |lo: u8, hi: u8| -> [u8; 3] {
            let (s, word) = splitmix64(state);
            state = s;
            let span = (hi - lo) as u64 + 1;
            [
                lo + (word % span) as u8,
                lo + ((word >> 16) % span) as u8,
                lo + ((word >> 32) % span) as u8,
            ]
        };
        let sky = next(120, 230);
        let ground = next(60, 160);
        let block = next(90, 200);
        let grass = next(40, 220);
        let darken = |c: [u8; 3]| c.map(|v| v - v / 5);
        Self {
            sky,
            sky_band: darken(sky),
            ground,
            ground_alt: darken(ground),
            grass,
            block,
            spike: [220, 220, 230],
            player: [30, 60, 230],
            star: [255, 255, 255],
        }
    }
}

/// Horizontal camera offset: centred on the player, clamped to the level.
pub fn camera_x(state: &WorldState) -> i32 {
    let level_w = state.level().tiles.width_px();
    let centre = state.x_px() + PLAYER_W / 2;
    (centre - OBS_WIDTH as i32 / 2).clamp(0, (level_w - OBS_WIDTH as i32).max(0))
}

pub fn render(state: &WorldState) -> Observation {
    let level = state.level();
    let palette = Palette::from_seed(level.palette_seed);
    let tiles = &level.tiles;
    let cam = camera_x(state);
    let mut pixels = vec![0u8; OBS_WIDTH * OBS_HEIGHT * 3];

    for sy in 0..OBS_HEIGHT {
        let row = sy as i32 / TILE_PX;
        let in_tile_y = sy as i32 % TILE_PX;
        let line = &mut pixels[sy * OBS_WIDTH * 3..(sy + 1) * OBS_WIDTH * 3];
        for (sx, px) in line.chunks_exact_mut(3).enumerate() {
            let wx = cam + sx as i32;
            let col = wx.div_euclid(TILE_PX);
            let in_tile_x = wx.rem_euclid(TILE_PX);
            let colour = match tiles.at(col, row) {
                Tile::Empty => {
                    if (sy / 28) % 2 == 0 {
                        palette.sky
                    } else {
                        palette.sky_band
                    }
                }
                Tile::Ground => {
                    let exposed = !tiles.at(col, row - 1).is_solid();
                    if exposed && in_tile_y < 3 {
                        palette.grass
                    } else if (col + row) % 2 == 0 {
                        palette.ground
                    } else {
                        palette.ground_alt
                    }
                }
                Tile::Block => {
                    if in_tile_x == 0 || in_tile_y == 0 {
                        palette.ground_alt
                    } else {
                        palette.block
                    }
                }
                Tile::Spike => {
                    // Triangle: wider toward the bottom of the tile.
                    let half = in_tile_y / 2;
                    if (in_tile_x - 8).abs() <= half {
                        palette.spike
                    } else {
                        palette.sky
                    }
                }
            };
            px.copy_from_slice(&colour);
        }
    }

    // A twinkling star driven by the simulation generator.
    let (_, word) = splitmix64(state.sim_rng);
    let star_x = (word % (OBS_WIDTH as u64 - 2)) as usize;
    let star_y = ((word >> 32) % 48) as usize;
    for dy in 0..2 {
        for dx in 0..2 {
            let (x, y) = (star_x + dx, star_y + dy);
            let world_col = (cam + x as i32).div_euclid(TILE_PX);
            if tiles.at(world_col, y as i32 / TILE_PX) == Tile::Empty {
                let i = (y * OBS_WIDTH + x) * 3;
                pixels[i..i + 3].copy_from_slice(&palette.star);
            }
        }
    }

    let p = &state.player;
    let height = if p.crouching { PLAYER_H * 2 / 3 } else { PLAYER_H };
    let top = p.y.to_px() + PLAYER_H - height;
    let left = p.x.to_px() - cam;
    for y in top.max(0)..(top + height).min(OBS_HEIGHT as i32) {
        for x in left.max(0)..(left + PLAYER_W).min(OBS_WIDTH as i32) {
            let i = (y as usize * OBS_WIDTH + x as usize) * 3;
            pixels[i..i + 3].copy_from_slice(&palette.player);
        }
    }

    Observation { pixels }
}
