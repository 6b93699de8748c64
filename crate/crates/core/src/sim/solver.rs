use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;

use super::level::LevelSpec;
use super::physics::WorldState;
use super::probe::FRAMES_PER_TIMESTEP;
use crate::buttons::{Button, Buttons};

const MOVES: [Buttons; 6] = [
    Buttons::NONE.with(Button::Right),
    Buttons::NONE.with(Button::Right).with(Button::B),
    Buttons::NONE.with(Button::Left),
    Buttons::NONE.with(Button::Left).with(Button::B),
    Buttons::NONE.with(Button::B),
    Buttons::NONE,
];

struct Node {
    world: WorldState,
    parent: usize,
    action: Buttons,
    depth: u32,
}

/// Finds a button sequence (one entry per timestep, no frame skip
/// randomness) that reaches the level's end without losing a life.
///
/// Greedy best-first search on horizontal progress over a coarse state
/// grid; complete with respect to that grid, so it also finds routes that
/// must first move left. Gives up after `max_expansions` nodes or when
/// every route exceeds `max_timesteps`.
pub fn solve_level(level: &Arc<LevelSpec>, max_timesteps: u32, max_expansions: usize) -> Option<Vec<Buttons>> {
    let start = WorldState::at_spawn(level.clone(), 0);
    let end = level.end_x_px();
    let mut nodes = vec![Node {
        world: start,
        parent: usize::MAX,
        action: Buttons::NONE,
        depth: 0,
    }];
    let mut seen = HashSet::new();
    seen.insert(cell(&nodes[0].world));
    // Max-heap on (x, -depth, -index): furthest right first, then shallowest.
    let mut open = BinaryHeap::new();
    open.push((nodes[0].world.x_px(), 0i64, 0i64));

    let mut expanded = 0;
    while let Some((_, _, neg_idx)) = open.pop() {
        let idx = (-neg_idx) as usize;
        expanded += 1;
        if expanded > max_expansions {
            return None;
        }
        if nodes[idx].depth >= max_timesteps {
            continue;
        }
        for &action in &MOVES {
            let mut w = nodes[idx].world.clone();
            for _ in 0..FRAMES_PER_TIMESTEP {
                w.step_in_place(action);
                if w.life_lost {
                    break;
                }
            }
            if w.life_lost || !seen.insert(cell(&w)) {
                continue;
            }
            let depth = nodes[idx].depth + 1;
            let reached = w.x_px() >= end;
            let x = w.x_px();
            nodes.push(Node {
                world: w,
                parent: idx,
                action,
                depth,
            });
            let child = nodes.len() - 1;
            if reached {
                return Some(path(&nodes, child));
            }
            open.push((x, -(depth as i64), -(child as i64)));
        }
    }
    None
}

fn cell(w: &WorldState) -> (i32, i32, i32, i32, bool) {
    let p = &w.player;
    (
        p.x.raw() >> 10,
        p.y.raw() >> 10,
        p.vx.raw() >> 7,
        p.vy.raw() >> 8,
        p.grounded,
    )
}

fn path(nodes: &[Node], mut i: usize) -> Vec<Buttons> {
    let mut out = Vec::with_capacity(nodes[i].depth as usize);
    while nodes[i].parent != usize::MAX {
        out.push(nodes[i].action);
        i = nodes[i].parent;
    }
    out.reverse();
    out
}
