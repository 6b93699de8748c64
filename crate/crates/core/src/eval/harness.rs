use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, EpisodeKind};
use crate::env::{EnvOptions, GamePackage};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::wrappers::StickyEnv;

/// Builds a fresh agent for one (level, seed) run.
pub type AgentFactory<'a> = dyn Fn(u64) -> Result<Box<dyn Agent>> + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub budget: u64,
    pub env_copies: u32,
    pub seeds: Vec<u64>,
    /// Cut the last episode off at the budget (and count its partial
    /// return). When off, the last episode plays to its natural end.
    pub include_partial_final_episode: bool,
    /// Fraction of the budget, at the end, whose episodes form the final
    /// score.
    pub final_window: f64,
    pub sticky: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            env_copies: 1,
            seeds: vec![0, 1, 2],
            include_partial_final_episode: true,
            final_window: 0.1,
            sticky: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::config("timestep budget must be at least 1"));
        }
        if self.env_copies == 0 || self.env_copies as u64 > self.budget {
            return Err(Error::config("env_copies must lie in 1..=budget"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if !(self.final_window > 0.0 && self.final_window <= 1.0) {
            return Err(Error::config("final_window must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub copy: u32,
    pub kind: EpisodeKind,
    pub total_return: f64,
    pub timesteps: u32,
    /// Level timesteps consumed (over all copies) when this episode ended.
    pub end_timestep: u64,
    pub done_reason: String,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: String,
    pub seed: u64,
    pub budget: u64,
    pub episodes: Vec<EpisodeRecord>,
    pub timesteps_used: u64,
    pub mean_score: f64,
    pub final_score: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl LevelResult {
    /// Computes the scores from a finished episode list. The final score
    /// averages episodes ending in the last `window` of the budget (the
    /// last episode alone if none do).
    pub fn from_episodes(level: &str, seed: u64, budget: u64, window: f64, episodes: Vec<EpisodeRecord>) -> Self {
        let timesteps_used = episodes.iter().map(|e| e.timesteps as u64).sum();
        let mean_score = mean(episodes.iter().map(|e| e.total_return));
        let cutoff = budget as f64 * (1.0 - window);
        let late: Vec<f64> = episodes
            .iter()
            .filter(|e| e.end_timestep as f64 > cutoff)
            .map(|e| e.total_return)
            .collect();
        let final_score = if late.is_empty() {
            episodes.last().map_or(0.0, |e| e.total_return)
        } else {
            mean(late.into_iter())
        };
        Self {
            level: level.to_string(),
            seed,
            budget,
            episodes,
            timesteps_used,
            mean_score,
            final_score,
        }
    }

    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.total_return).collect()
    }
}

/// Plays `level` with a fresh agent until the budget is spent.
///
/// Copies split the budget evenly (earlier copies take the remainder) and
/// start episodes in round-robin order. Seeds for the agent, each copy's
/// sticky-skip stream and each copy's simulation are derived from `seed`.
pub fn evaluate_level(
    pkg: &GamePackage,
    level: &str,
    scenario: &str,
    cfg: &EvalConfig,
    seed: u64,
    factory: &AgentFactory<'_>,
) -> Result<LevelResult> {
    cfg.validate()?;
    let mut agent = factory(derive_seed(seed, 1))?;
    let copies = cfg.env_copies as u64;
    let mut envs = Vec::with_capacity(copies as usize);
    let mut remaining = Vec::with_capacity(copies as usize);
    for c in 0..copies {
        let env = pkg.environment(level, scenario, EnvOptions::headless(derive_seed(seed, 200 + c)))?;
        let sticky = cfg
            .sticky
            .then(|| crate::wrappers::StickySkip::new(derive_seed(seed, 100 + c)));
        envs.push(StickyEnv::with_skip(env, sticky));
        remaining.push(cfg.budget / copies + u64::from(c < cfg.budget % copies));
    }

    let mut episodes = Vec::new();
    let mut used = 0u64;
    while remaining.iter().any(|&r| r > 0) {
        for c in 0..copies as usize {
            if remaining[c] == 0 {
                continue;
            }
            let env = &mut envs[c];
            env.reset()?;
            let cap = if cfg.include_partial_final_episode {
                remaining[c].min(u32::MAX as u64) as u32
            } else {
                u32::MAX
            };
            let ep = agent.run_episode(env, cap).map_err(|e| match e {
                Error::Protocol(msg) => Error::Protocol(format!("agent {} on {level}: {msg}", agent.name())),
                other => other,
            })?;
            if ep.timesteps == 0 {
                return Err(Error::Protocol(format!(
                    "agent {} played an empty episode",
                    agent.name()
                )));
            }
            remaining[c] = remaining[c].saturating_sub(ep.timesteps as u64);
            used += ep.timesteps as u64;
            episodes.push(EpisodeRecord {
                copy: c as u32,
                kind: ep.kind,
                total_return: ep.total_return,
                timesteps: ep.timesteps,
                end_timestep: used,
                done_reason: ep.done_reason.name().to_string(),
                truncated: ep.truncated,
            });
        }
    }
    Ok(LevelResult::from_episodes(
        level,
        seed,
        cfg.budget,
        cfg.final_window,
        episodes,
    ))
}

/// Evaluates every (level, seed) pair in parallel. Results come back in
/// level-major, seed-minor order regardless of scheduling.
pub fn evaluate_matrix(
    pkg: &GamePackage,
    levels: &[String],
    scenario: &str,
    cfg: &EvalConfig,
    factory: &AgentFactory<'_>,
) -> Result<Vec<LevelResult>> {
    cfg.validate()?;
    let jobs: Vec<(&String, u64)> = levels
        .iter()
        .flat_map(|l| cfg.seeds.iter().map(move |&s| (l, s)))
        .collect();
    jobs.par_iter()
        .map(|&(level, seed)| evaluate_level(pkg, level, scenario, cfg, seed, factory))
        .collect()
}
