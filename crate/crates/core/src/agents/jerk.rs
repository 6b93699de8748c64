use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Agent, Episode, EpisodeKind};
use crate::buttons::{Button, Buttons};
use crate::env::DoneReason;
use crate::error::{Error, Result};
use crate::rng::chacha;
use crate::wrappers::StickyEnv;

const NOOP: u8 = 0;
const RIGHT: u8 = 1;
const RIGHT_JUMP: u8 = 2;
const LEFT: u8 = 3;
const LEFT_JUMP: u8 = 4;

/// Action indices used in stored trajectories.
pub const JERK_ACTIONS: [Buttons; 5] = [
    Buttons::NONE,
    Buttons::NONE.with(Button::Right),
    Buttons::NONE.with(Button::Right).with(Button::B),
    Buttons::NONE.with(Button::Left),
    Buttons::NONE.with(Button::Left).with(Button::B),
];

#[derive(Clone, Debug, PartialEq)]
pub struct JerkConfig {
    /// Base exploitation probability.
    pub beta: f64,
    /// Timesteps per jump burst.
    pub jump_hold: u32,
    /// Per-timestep chance of starting a burst while running right.
    pub jump_prob: f64,
    pub right_run: u32,
    pub left_run: u32,
    pub t_max: u64,
}

impl Default for JerkConfig {
    fn default() -> Self {
        Self {
            beta: 0.25,
            jump_hold: 4,
            jump_prob: 0.1,
            right_run: 100,
            left_run: 70,
            t_max: 1_000_000,
        }
    }
}

impl JerkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) || !(0.0..=1.0).contains(&self.jump_prob) {
            return Err(Error::config("beta and jump_prob must lie in [0, 1]"));
        }
        if self.jump_hold == 0 || self.right_run == 0 || self.left_run == 0 || self.t_max == 0 {
            return Err(Error::config("JERK counts and t_max must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub actions: Vec<u8>,
    pub mean_reward: f64,
    pub replay_count: u32,
    pub insertion_order: u64,
}

impl TrajectoryRecord {
    /// Folds one more episode reward into the running mean.
    pub fn update(&mut self, reward: f64) {
        let n = self.replay_count as f64 + 1.0;
        self.mean_reward = (self.mean_reward * n + reward) / (n + 1.0);
        self.replay_count += 1;
    }
}

/// Best prefix of an episode: the earliest timestep with the highest
/// cumulative reward. Returns `(prefix_len, reward)`.
pub fn harvest(cumulative: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (t, &c) in cumulative.iter().enumerate() {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((t, c));
        }
    }
    best.map(|(t, c)| (t + 1, c))
}

/// Per-episode log line for a JERK run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JerkLogEntry {
    pub episode: u64,
    pub branch: EpisodeKind,
    pub reward: f64,
    pub timesteps: u32,
    #[serde(rename = "T_after")]
    pub t_after: u64,
}

/// Explore by running right with random jumps, backing off left when stuck;
/// keep the best action prefixes and replay them more often as the budget
/// is spent.
#[derive(Clone, Debug)]
pub struct Jerk {
    cfg: JerkConfig,
    rng: ChaCha8Rng,
    records: Vec<TrajectoryRecord>,
    elapsed: u64,
    episodes: u64,
}

struct Rollout {
    actions: Vec<u8>,
    cumulative: Vec<f64>,
    done_reason: DoneReason,
    truncated: bool,
}

impl Rollout {
    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

impl Jerk {
    pub fn new(cfg: JerkConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            rng: chacha(seed),
            records: Vec::new(),
            elapsed: 0,
            episodes: 0,
        })
    }

    pub fn config(&self) -> &JerkConfig {
        &self.cfg
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    /// Timesteps consumed so far.
    pub fn elapsed(&self) -> u64 {
        self.elapsed
    }

    pub fn set_elapsed(&mut self, t: u64) {
        self.elapsed = t;
    }

    pub fn insert(&mut self, actions: Vec<u8>, reward: f64) {
        let insertion_order = self.records.len() as u64;
        self.records.push(TrajectoryRecord {
            actions,
            mean_reward: reward,
            replay_count: 0,
            insertion_order,
        });
    }

    /// Index of the record with the highest mean, latest insertion on ties.
    pub fn best(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.records.iter().enumerate() {
            match best {
                Some(b) if r.mean_reward < self.records[b].mean_reward => {}
                _ => best = Some(i),
            }
        }
        best
    }

    pub fn exploit_probability(&self) -> f64 {
        (self.cfg.beta + self.elapsed as f64 / self.cfg.t_max as f64).min(1.0)
    }

    /// Whether the next episode replays a stored trajectory.
    pub fn decide_exploit(&mut self) -> bool {
        !self.records.is_empty() && self.rng.gen::<f64>() < self.cfg.beta + self.elapsed as f64 / self.cfg.t_max as f64
    }

    fn step(env: &mut StickyEnv, action: u8, out: &mut Rollout) -> Result<bool> {
        let step = env.step(JERK_ACTIONS[action as usize])?;
        let prev = out.total();
        out.actions.push(action);
        out.cumulative.push(prev + step.result.reward);
        if step.result.done {
            out.done_reason = step.result.done_reason;
        }
        Ok(step.result.done)
    }

    fn explore(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Rollout> {
        let cfg = self.cfg.clone();
        let mut out = Rollout {
            actions: Vec::new(),
            cumulative: Vec::new(),
            done_reason: DoneReason::None,
            truncated: false,
        };
        let mut burst = 0;
        loop {
            let block_start = out.total();
            for _ in 0..cfg.right_run {
                if out.actions.len() as u32 >= max_timesteps {
                    out.truncated = true;
                    return Ok(out);
                }
                if burst == 0 && self.rng.gen_bool(cfg.jump_prob) {
                    burst = cfg.jump_hold;
                }
                let action = if burst > 0 {
                    burst -= 1;
                    RIGHT_JUMP
                } else {
                    RIGHT
                };
                if Self::step(env, action, &mut out)? {
                    return Ok(out);
                }
            }
            if out.total() > block_start {
                continue;
            }
            burst = 0;
            for j in 0..cfg.left_run {
                if out.actions.len() as u32 >= max_timesteps {
                    out.truncated = true;
                    return Ok(out);
                }
                let action = if j % (2 * cfg.jump_hold) < cfg.jump_hold {
                    LEFT_JUMP
                } else {
                    LEFT
                };
                if Self::step(env, action, &mut out)? {
                    return Ok(out);
                }
            }
        }
    }

    fn replay(&mut self, env: &mut StickyEnv, index: usize, max_timesteps: u32) -> Result<Rollout> {
        let mut out = Rollout {
            actions: Vec::new(),
            cumulative: Vec::new(),
            done_reason: DoneReason::None,
            truncated: false,
        };
        let mut t = 0;
        loop {
            if t >= max_timesteps {
                out.truncated = true;
                return Ok(out);
            }
            let action = self.records[index].actions.get(t as usize).copied().unwrap_or(NOOP);
            if Self::step(env, action, &mut out)? {
                return Ok(out);
            }
            t += 1;
        }
    }

    /// Plays whole episodes until at least `t_max` timesteps have elapsed.
    pub fn run(&mut self, env: &mut StickyEnv) -> Result<Vec<JerkLogEntry>> {
        let mut log = Vec::new();
        while self.elapsed < self.cfg.t_max {
            env.reset()?;
            let ep = self.run_episode(env, u32::MAX)?;
            log.push(JerkLogEntry {
                episode: self.episodes - 1,
                branch: ep.kind,
                reward: ep.total_return,
                timesteps: ep.timesteps,
                t_after: self.elapsed,
            });
        }
        Ok(log)
    }
}

impl Agent for Jerk {
    fn name(&self) -> &str {
        "jerk"
    }

    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode> {
        let (kind, rollout) = if self.decide_exploit() {
            let best = self.best().expect("exploit requires a stored trajectory");
            let rollout = self.replay(env, best, max_timesteps)?;
            if !rollout.truncated {
                self.records[best].update(rollout.total());
            }
            (EpisodeKind::Exploit, rollout)
        } else {
            let rollout = self.explore(env, max_timesteps)?;
            if !rollout.truncated {
                if let Some((len, reward)) = harvest(&rollout.cumulative) {
                    self.insert(rollout.actions[..len].to_vec(), reward);
                }
            }
            (EpisodeKind::Explore, rollout)
        };
        let timesteps = rollout.actions.len() as u32;
        self.elapsed += timesteps as u64;
        self.episodes += 1;
        Ok(Episode {
            kind,
            total_return: rollout.total(),
            timesteps,
            done_reason: rollout.done_reason,
            truncated: rollout.truncated,
        })
    }
}
