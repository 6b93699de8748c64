use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::adam::{Adam, AdamConfig};
use super::learner::{features, LinearQ, FEATURE_DIM};
use super::replay::{PrioritizedReplay, Transition};
use crate::agents::{Agent, Episode, EpisodeKind};
use crate::error::{Error, Result};
use crate::rng::chacha;
use crate::wrappers::{DiscreteActionMap, MaxX, StickyEnv};

#[derive(Clone, Debug, PartialEq)]
pub struct QAgentConfig {
    pub epsilon: f64,
    /// Keep training on the level being played.
    pub learn: bool,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub priority_alpha: f64,
    pub gamma: f64,
    pub adam: AdamConfig,
    pub reward_scale: f64,
}

impl Default for QAgentConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            learn: true,
            batch_size: 32,
            replay_capacity: 50_000,
            priority_alpha: 0.5,
            gamma: 0.99,
            adam: AdamConfig::default(),
            reward_scale: 0.005,
        }
    }
}

/// Epsilon-greedy linear Q policy, optionally fine-tuned online from a
/// jointly trained initialization.
pub struct QAgent {
    cfg: QAgentConfig,
    q: LinearQ,
    map: DiscreteActionMap,
    params: Vec<f64>,
    adam: Adam,
    replay: PrioritizedReplay,
    rng: ChaCha8Rng,
}

impl QAgent {
    pub fn new(params: Vec<f64>, cfg: QAgentConfig, seed: u64) -> Result<Self> {
        let map = DiscreteActionMap::seven_dqn();
        let q = LinearQ::new(FEATURE_DIM, map.len(), cfg.gamma)?;
        if params.len() != q.param_count() {
            return Err(Error::ShapeMismatch {
                expected: q.param_count(),
                found: params.len(),
            });
        }
        Ok(Self {
            adam: Adam::new(cfg.adam.clone(), params.len()),
            replay: PrioritizedReplay::new(cfg.replay_capacity, cfg.priority_alpha)?,
            rng: chacha(seed),
            q,
            map,
            params,
            cfg,
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn learn_step(&mut self) -> Result<()> {
        if !self.cfg.learn || self.replay.len() < self.cfg.batch_size {
            return Ok(());
        }
        let slots = self.replay.sample(self.cfg.batch_size, &mut self.rng)?;
        let batch: Vec<&Transition> = slots
            .iter()
            .map(|&s| self.replay.get(s).expect("sampled slot"))
            .collect();
        let (losses, grad) = self.q.loss_and_grad(&self.params, &batch)?;
        self.replay.update_priorities(&slots, &losses)?;
        self.adam.update(&mut self.params, &grad)
    }
}

impl Agent for QAgent {
    fn name(&self) -> &str {
        "q"
    }

    fn run_episode(&mut self, env: &mut StickyEnv, max_timesteps: u32) -> Result<Episode> {
        let mut maxx = MaxX::new();
        let mut f = features(env.env().world());
        let mut total = 0.0;
        let mut t = 0;
        while t < max_timesteps {
            let a = if self.rng.gen::<f64>() < self.cfg.epsilon {
                self.rng.gen_range(0..self.map.len())
            } else {
                self.q.greedy(&self.params, &f)
            };
            let r = env.step(self.map.combos()[a])?.result;
            total += r.reward;
            t += 1;
            let next = features(env.env().world());
            if self.cfg.learn {
                let shaped = (maxx.transform(r.cumulative_offset) + r.bonus) * self.cfg.reward_scale;
                self.replay.push(Transition {
                    features: f,
                    action: a,
                    reward: shaped,
                    next_features: next.clone(),
                    done: r.done,
                });
                self.learn_step()?;
            }
            f = next;
            if r.done {
                return Ok(Episode {
                    kind: EpisodeKind::Policy,
                    total_return: total,
                    timesteps: t,
                    done_reason: r.done_reason,
                    truncated: false,
                });
            }
        }
        Ok(Episode {
            kind: EpisodeKind::Policy,
            total_return: total,
            timesteps: t,
            done_reason: env.env().done_reason(),
            truncated: true,
        })
    }
}
