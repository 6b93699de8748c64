use std::sync::Arc;

use super::level::LevelSpec;
use super::tiles::{Tile, TILE_PX};
use super::{PLAYER_H, PLAYER_W};
use crate::buttons::{Button, Buttons};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::rng::splitmix64;

// Per-frame constants in raw fixed-point units (1/256 px).
const GROUND_ACCEL: i32 = 48;
const AIR_ACCEL: i32 = 40;
const GROUND_FRICTION: i32 = 48;
const AIR_DRAG: i32 = 8;
const MAX_SPEED: i32 = 6 * 256;
const GRAVITY: i32 = 56;
const JUMP_SPEED: i32 = 1408;
/// Kept below one tile per frame so falls cannot tunnel through floors.
const MAX_FALL: i32 = 12 * 256;

const MAGIC: &[u8; 4] = b"RBSS";
pub const WORLD_BLOB_VERSION: u16 = 1;
const KIND_WORLD: u8 = 0;
const BLOB_LEN: usize = 4 + 2 + 1 + 8 + 4 * 4 + 1 + 1 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Player {
    pub x: Fixed,
    pub y: Fixed,
    pub vx: Fixed,
    pub vy: Fixed,
    pub grounded: bool,
    /// Cosmetic only; set while DOWN is held on the ground.
    pub crouching: bool,
}

/// Complete simulation state of one level. Cheap to clone; the level itself
/// is shared.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub player: Player,
    pub lives: u8,
    pub frame_counter: u64,
    pub sim_rng: u64,
    /// Set on the frame a life is lost (pit fall or hazard contact).
    pub life_lost: bool,
    level: Arc<LevelSpec>,
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.player == other.player
            && self.lives == other.lives
            && self.frame_counter == other.frame_counter
            && self.sim_rng == other.sim_rng
            && self.life_lost == other.life_lost
            && self.level.fingerprint() == other.level.fingerprint()
    }
}

impl WorldState {
    /// Player standing at the level's spawn point.
    pub fn at_spawn(level: Arc<LevelSpec>, sim_seed: u64) -> Self {
        let mut state = Self {
            player: Player {
                x: level.spawn.0,
                y: level.spawn.1,
                vx: Fixed::ZERO,
                vy: Fixed::ZERO,
                grounded: false,
                crouching: false,
            },
            lives: 3,
            frame_counter: 0,
            sim_rng: sim_seed,
            life_lost: false,
            level,
        };
        state.player.grounded = state.standing_on_floor();
        state
    }

    pub fn level(&self) -> &Arc<LevelSpec> {
        &self.level
    }

    pub fn x_px(&self) -> i32 {
        self.player.x.to_px()
    }

    pub fn y_px(&self) -> i32 {
        self.player.y.to_px()
    }

    /// Puts the player back at the spawn point after a lost life, keeping
    /// counters.
    pub fn respawn(&mut self) {
        self.player = WorldState::at_spawn(self.level.clone(), 0).player;
        self.life_lost = false;
    }

    fn standing_on_floor(&self) -> bool {
        let p = &self.player;
        let bottom = p.y.raw() + PLAYER_H * 256;
        if bottom % (TILE_PX * 256) != 0 {
            return false;
        }
        let row = bottom / (TILE_PX * 256);
        let (c0, c1) = columns(p.x);
        (c0..=c1).any(|c| self.level.tiles.at(c, row).is_solid())
    }

    /// Advances one raw frame in place.
    pub fn step_in_place(&mut self, buttons: Buttons) {
        let tiles = &self.level.tiles;
        let p = &mut self.player;
        let right = buttons.pressed(Button::Right) && !buttons.pressed(Button::Left);
        let left = buttons.pressed(Button::Left) && !buttons.pressed(Button::Right);

        let (accel, decel) = if p.grounded {
            (GROUND_ACCEL, GROUND_FRICTION)
        } else {
            (AIR_ACCEL, AIR_DRAG)
        };
        let mut vx = p.vx.raw();
        if right {
            vx = (vx + accel).min(MAX_SPEED);
        } else if left {
            vx = (vx - accel).max(-MAX_SPEED);
        } else if vx > 0 {
            vx = (vx - decel).max(0);
        } else {
            vx = (vx + decel).min(0);
        }

        let mut vy = p.vy.raw();
        if buttons.pressed(Button::B) && p.grounded {
            vy = -JUMP_SPEED;
        }
        vy = (vy + GRAVITY).min(MAX_FALL);

        // Horizontal sweep.
        let mut x = p.x.raw() + vx;
        let (r0, r1) = rows(p.y);
        if vx > 0 {
            let right_col = (x + PLAYER_W * 256 - 1) >> 12;
            if (r0..=r1).any(|r| tiles.at(right_col, r).is_solid()) {
                x = (right_col * TILE_PX - PLAYER_W) * 256;
                vx = 0;
            }
        } else if vx < 0 {
            let left_col = x >> 12;
            if (r0..=r1).any(|r| tiles.at(left_col, r).is_solid()) {
                x = (left_col + 1) * TILE_PX * 256;
                vx = 0;
            }
        }
        p.x = Fixed::from_raw(x);

        // Vertical sweep.
        let mut y = p.y.raw() + vy;
        let (c0, c1) = columns(p.x);
        let mut grounded = false;
        if vy > 0 {
            let feet_row = (y + PLAYER_H * 256 - 1) >> 12;
            if (c0..=c1).any(|c| tiles.at(c, feet_row).is_solid()) {
                y = (feet_row * TILE_PX - PLAYER_H) * 256;
                vy = 0;
                grounded = true;
            }
        } else if vy < 0 {
            let head_row = y >> 12;
            if (c0..=c1).any(|c| tiles.at(c, head_row).is_solid()) {
                y = (head_row + 1) * TILE_PX * 256;
                vy = 0;
            }
        }
        p.y = Fixed::from_raw(y);
        p.vx = Fixed::from_raw(vx);
        p.vy = Fixed::from_raw(vy);
        p.grounded = grounded;
        p.crouching = grounded && buttons.pressed(Button::Down);

        let fell = p.y.to_px() >= tiles.height_px();
        let (r0, r1) = rows(p.y);
        let touched_hazard = (r0..=r1).any(|r| (c0..=c1).any(|c| tiles.at(c, r) == Tile::Spike));
        if fell || touched_hazard {
            self.life_lost = true;
            self.lives = self.lives.saturating_sub(1);
        }

        self.frame_counter += 1;
        self.sim_rng = splitmix64(self.sim_rng).0;
    }

    /// Canonical little-endian blob: magic `RBSS`, u16 version, kind byte,
    /// level fingerprint, then the player and counters.
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.player;
        let mut out = Vec::with_capacity(BLOB_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&WORLD_BLOB_VERSION.to_le_bytes());
        out.push(KIND_WORLD);
        out.extend_from_slice(&self.level.fingerprint().to_le_bytes());
        for v in [p.x, p.y, p.vx, p.vy] {
            out.extend_from_slice(&v.raw().to_le_bytes());
        }
        let flags = p.grounded as u8 | (p.crouching as u8) << 1 | (self.life_lost as u8) << 2;
        out.push(flags);
        out.push(self.lives);
        out.extend_from_slice(&self.frame_counter.to_le_bytes());
        out.extend_from_slice(&self.sim_rng.to_le_bytes());
        out
    }

    /// Decodes a blob produced by [`WorldState::to_bytes`] against `level`.
    pub fn from_bytes(bytes: &[u8], level: Arc<LevelSpec>) -> Result<Self> {
        if bytes.len() < 7 || &bytes[..4] != MAGIC {
            return Err(Error::Corrupt("world blob: bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != WORLD_BLOB_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "world state",
                found: version,
                expected: WORLD_BLOB_VERSION,
            });
        }
        if bytes.len() != BLOB_LEN {
            return Err(Error::Corrupt(format!(
                "world blob: {} bytes, expected {BLOB_LEN}",
                bytes.len()
            )));
        }
        if bytes[6] != KIND_WORLD {
            return Err(Error::Corrupt(format!("world blob: kind {}", bytes[6])));
        }
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let i32_at = |i: usize| i32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        if u64_at(7) != level.fingerprint() {
            return Err(Error::Corrupt("world blob belongs to a different level".into()));
        }
        let flags = bytes[31];
        if flags & !0b111 != 0 {
            return Err(Error::Corrupt(format!("world blob: unknown flags {flags:#04x}")));
        }
        Ok(Self {
            player: Player {
                x: Fixed::from_raw(i32_at(15)),
                y: Fixed::from_raw(i32_at(19)),
                vx: Fixed::from_raw(i32_at(23)),
                vy: Fixed::from_raw(i32_at(27)),
                grounded: flags & 1 != 0,
                crouching: flags & 2 != 0,
            },
            life_lost: flags & 4 != 0,
            lives: bytes[32],
            frame_counter: u64_at(33),
            sim_rng: u64_at(41),
            level,
        })
    }
}

/// Tile columns overlapped by a hitbox whose left edge is `x`.
#[inline]
fn columns(x: Fixed) -> (i32, i32) {
    let x = x.raw();
    (x >> 12, (x + PLAYER_W * 256 - 1) >> 12)
}

#[inline]
fn rows(y: Fixed) -> (i32, i32) {
    let y = y.raw();
    (y >> 12, (y + PLAYER_H * 256 - 1) >> 12)
}

/// Pure one-frame transition.
pub fn physics_step(state: &WorldState, buttons: Buttons) -> WorldState {
    let mut next = state.clone();
    next.step_in_place(buttons);
    next
}
