use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Agent, Episode, EpisodeKind};
use crate::buttons::Buttons;
use crate::error::Result;
use crate::rng::chacha;
use crate::sim::RightRunnerPolicy;
use crate::wrappers::{DiscreteActionMap, StickyEnv};

/// Runs `choose` every timestep until done or the cap.
pub(crate) fn play<F>(env: &mut StickyEnv, max_timesteps: u32, kind: EpisodeKind, mut choose: F) -> Result<Episode>
where
    F: FnMut(&StickyEnv) -> Buttons,
{
    let mut total = 0.0;
    let mut t = 0;
    while t < max_timesteps {
        let buttons = choose(env);
        let step = env.step(buttons)?;
        total += step.result.reward;
        t += 1;
        if step.result.done {
            return Ok(Episode {
                kind,
                total_return: total,
                timesteps: t,
                done_reason: step.result.done_reason,
                truncated: false,
            });
        }
    }
    Ok(Episode {
        kind,
        total_return: total,
        timesteps: t,
        done_reason: env.env().done_reason(),
        truncated: true,
    })
}

/// Holds RIGHT, jumping in bursts when progress stalls.
#[derive(Clone, Debug)]
pub struct RightRunner {
    jump_hold: u32,
    stall_limit: u32,
}

impl Default for RightRunner {
    fn default() -> Self {
        Self {
            jump_hold: 4,
            stall_limit: 8,
        }
    }
}

impl Agent for RightRunner {
    fn name(&self) -> &str {
        "right"
    }

    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode> {
        let mut policy = RightRunnerPolicy::new(self.jump_hold, self.stall_limit);
        play(env, max_timesteps, EpisodeKind::Policy, |e| {
            policy.act(e.env().world().x_px())
        })
    }
}

/// Uniformly random actions from a discrete map.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    map: DiscreteActionMap,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(map: DiscreteActionMap, seed: u64) -> Self {
        Self { map, rng: chacha(seed) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode> {
        let Self { map, rng } = self;
        play(env, max_timesteps, EpisodeKind::Policy, |_| {
            map.combos()[rng.gen_range(0..map.len())]
        })
    }
}

/// Presses nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoopAgent;

impl Agent for NoopAgent {
    fn name(&self) -> &str {
        "noop"
    }

    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode> {
        play(env, max_timesteps, EpisodeKind::Policy, |_| Buttons::NONE)
    }
}
