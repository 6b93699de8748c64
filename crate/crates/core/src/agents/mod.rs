//! The agent interface and scripted baselines.
//!
//! An agent plays one episode at a time on an environment the caller has
//! already reset. Agents keep their own state between episodes of the same
//! level; evaluation builds a fresh agent per level.

mod jerk;
mod scripted;

use serde::{Deserialize, Serialize};

use crate::env::DoneReason;
use crate::error::Result;
use crate::wrappers::StickyEnv;

pub use jerk::{harvest, Jerk, JerkConfig, TrajectoryRecord, JERK_ACTIONS};
pub use scripted::{NoopAgent, RandomAgent, RightRunner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeKind {
    Explore,
    Exploit,
    Policy,
    /// Played by a person through the session server.
    Human,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub kind: EpisodeKind,
    /// Raw return: offset rewards plus completion bonus.
    pub total_return: f64,
    pub timesteps: u32,
    pub done_reason: DoneReason,
    /// Stopped by the caller's timestep cap before the episode ended.
    pub truncated: bool,
}

pub trait Agent: Send {
    fn name(&self) -> &str;

    /// Plays from the current (freshly reset) state until the episode ends
    /// or `max_timesteps` have been taken.
    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode>;
}

/// Agent names accepted by [`make_agent`].
pub const AGENT_NAMES: [&str; 4] = ["jerk", "right", "random", "noop"];

/// Builds a named baseline. `t_max` is the JERK horizon (the evaluation
/// budget).
pub fn make_agent(name: &str, seed: u64, t_max: u64) -> Result<Box<dyn Agent>> {
    use crate::error::Error;
    use crate::wrappers::DiscreteActionMap;
    Ok(match name {
        "jerk" => Box::new(Jerk::new(
            JerkConfig {
                t_max,
                ..JerkConfig::default()
            },
            seed,
        )?),
        "right" => Box::new(RightRunner::default()),
        "random" => Box::new(RandomAgent::new(DiscreteActionMap::eight_essential(), seed)),
        "noop" => Box::new(NoopAgent),
        other => {
            return Err(Error::config(format!(
                "unknown agent {other:?} (expected one of {})",
                AGENT_NAMES.join(", ")
            )))
        }
    })
}
