//! Coarse jump-reachability search over standable tile cells.
//!
//! A cell `(col, row)` is standable when the tile is solid and the two cells
//! above it (the player's height) are empty. Edges cover walking, stepping
//! off ledges and a conservative jump envelope (rise of at most four tiles,
//! at most six columns across, with three rows of head room above the higher
//! of the two floors along the whole arc).

use std::collections::VecDeque;

use super::level::LevelSpec;
use super::tiles::{Tile, TileGrid, TILE_PX};
use super::PLAYER_W;

const MAX_RISE: i32 = 4;
const MAX_ACROSS: i32 = 6;
const HEADROOM: i32 = 3;

fn open(g: &TileGrid, c: i32, r: i32) -> bool {
    g.at(c, r) == Tile::Empty
}

fn standable(g: &TileGrid, c: i32, r: i32) -> bool {
    r >= 2 && g.at(c, r).is_solid() && open(g, c, r - 1) && open(g, c, r - 2)
}

fn landing_below(g: &TileGrid, c: i32, from_row: i32) -> Option<i32> {
    for r in from_row..g.height() as i32 {
        match g.at(c, r) {
            Tile::Empty => continue,
            Tile::Spike => return None,
            _ => return standable(g, c, r).then_some(r),
        }
    }
    None
}

fn arc_clear(g: &TileGrid, c: i32, r: i32, c2: i32, r2: i32) -> bool {
    let top = r.min(r2) - HEADROOM;
    if top < 0 {
        return false;
    }
    let (lo, hi) = (c.min(c2), c.max(c2));
    (lo..=hi).all(|k| {
        let bottom = if k == c {
            r - 1
        } else if k == c2 {
            r2 - 1
        } else {
            r.min(r2) - 1
        };
        (top..=bottom).all(|row| open(g, k, row))
    })
}

fn neighbours(g: &TileGrid, c: i32, r: i32, out: &mut Vec<(i32, i32)>) {
    out.clear();
    let h = g.height() as i32;
    for dir in [-1, 1] {
        let c1 = c + dir;
        if open(g, c1, r - 1) && open(g, c1, r - 2) {
            if standable(g, c1, r) {
                out.push((c1, r));
            } else if open(g, c1, r) {
                if let Some(r2) = landing_below(g, c1, r) {
                    out.push((c1, r2));
                }
            }
        }
        for across in 1..=MAX_ACROSS {
            let c2 = c + dir * across;
            for r2 in (r - MAX_RISE).max(2)..h {
                if standable(g, c2, r2) && arc_clear(g, c, r, c2, r2) {
                    out.push((c2, r2));
                }
            }
        }
    }
}

/// Rightmost column reachable from the spawn cell, or `None` if the spawn is
/// not standable.
pub fn coarse_reachable_columns(level: &LevelSpec) -> Option<i32> {
    let g = &level.tiles;
    let (w, h) = (g.width() as i32, g.height() as i32);
    let spawn_col = (level.spawn.0.to_px() + PLAYER_W / 2) / TILE_PX;
    let spawn_row = (level.spawn.1.to_px() + super::PLAYER_H) / TILE_PX;
    if !standable(g, spawn_col, spawn_row) {
        return None;
    }
    let mut seen = vec![false; (w * h) as usize];
    let mut queue = VecDeque::from([(spawn_col, spawn_row)]);
    seen[(spawn_row * w + spawn_col) as usize] = true;
    let mut best = spawn_col;
    let mut buf = Vec::new();
    while let Some((c, r)) = queue.pop_front() {
        best = best.max(c);
        neighbours(g, c, r, &mut buf);
        for &(c2, r2) in &buf {
            let i = (r2 * w + c2) as usize;
            if !seen[i] {
                seen[i] = true;
                queue.push_back((c2, r2));
            }
        }
    }
    Some(best)
}

/// Whether the completion offset can be reached from the spawn point.
pub fn coarse_reachable(level: &LevelSpec) -> bool {
    let goal_col = level.end_x_px().div_euclid(TILE_PX);
    coarse_reachable_columns(level).is_some_and(|best| best >= goal_col)
}
