use std::sync::Arc;

use super::level::LevelSpec;
use super::physics::WorldState;
use crate::buttons::{Button, Buttons};

/// Frames simulated per agent timestep.
pub(crate) const FRAMES_PER_TIMESTEP: usize = 4;

/// Decision logic of the scripted right-runner: hold RIGHT, and add a jump
/// burst whenever horizontal position has not increased for a while.
#[derive(Clone, Debug)]
pub struct RightRunnerPolicy {
    jump_hold: u32,
    stall_limit: u32,
    last_x: Option<i32>,
    stalled: u32,
    burst_left: u32,
}

impl Default for RightRunnerPolicy {
    fn default() -> Self {
        Self::new(4, 8)
    }
}

impl RightRunnerPolicy {
    pub fn new(jump_hold: u32, stall_limit: u32) -> Self {
        Self {
            jump_hold: jump_hold.max(1),
            stall_limit: stall_limit.max(1),
            last_x: None,
            stalled: 0,
            burst_left: 0,
        }
    }

    /// Chooses the buttons for the next timestep given the current x.
    pub fn act(&mut self, x_px: i32) -> Buttons {
        match self.last_x {
            Some(prev) if x_px <= prev => self.stalled += 1,
            _ => self.stalled = 0,
        }
        self.last_x = Some(x_px);

        let run = Buttons::NONE.with(Button::Right);
        if self.burst_left > 0 {
            self.burst_left -= 1;
            return run.with(Button::B);
        }
        if self.stalled >= self.stall_limit {
            self.stalled = 0;
            self.burst_left = self.jump_hold - 1;
            return run.with(Button::B);
        }
        run
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub reached_end: bool,
    pub life_lost: bool,
    pub timesteps: u32,
    pub max_x_px: i32,
}

/// Runs the right-runner on a bare world (no sticky skip) for at most
/// `max_timesteps`.
pub fn run_right_runner(level: &Arc<LevelSpec>, max_timesteps: u32) -> ProbeOutcome {
    let mut world = WorldState::at_spawn(level.clone(), 0);
    let mut policy = RightRunnerPolicy::default();
    let end = level.end_x_px();
    let mut max_x = world.x_px();
    for t in 0..max_timesteps {
        let buttons = policy.act(world.x_px());
        for _ in 0..FRAMES_PER_TIMESTEP {
            world.step_in_place(buttons);
            if world.life_lost {
                return ProbeOutcome {
                    reached_end: false,
                    life_lost: true,
                    timesteps: t + 1,
                    max_x_px: max_x.max(world.x_px()),
                };
            }
        }
        max_x = max_x.max(world.x_px());
        if world.x_px() >= end {
            return ProbeOutcome {
                reached_end: true,
                life_lost: false,
                timesteps: t + 1,
                max_x_px: max_x,
            };
        }
    }
    ProbeOutcome {
        reached_end: false,
        life_lost: false,
        timesteps: max_timesteps,
        max_x_px: max_x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_level, ZoneParams};

    #[test]
    fn right_runner_finishes_flat_corridor() {
        let level = Arc::new(generate_level(&ZoneParams::flat(0, 3200, 5), 0).unwrap());
        let out = run_right_runner(&level, 4500);
        assert!(out.reached_end);
        assert!(out.timesteps < 200, "{out:?}");
    }

    #[test]
    fn policy_bursts_after_stall() {
        let mut p = RightRunnerPolicy::new(4, 8);
        let b = Button::B;
        let mut seq = Vec::new();
        for _ in 0..14 {
            seq.push(p.act(100).pressed(b));
        }
        // Stall counter reaches 8 on the 9th call; burst covers 4 timesteps.
        assert_eq!(&seq[..8], &[false; 8]);
        assert_eq!(&seq[8..12], &[true; 4]);
        assert!(!seq[12]);
    }
}
