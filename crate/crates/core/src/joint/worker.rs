use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::adam::{Adam, AdamConfig};
use super::allreduce::AllReduceGroup;
use super::learner::{features, LinearQ, FEATURE_DIM};
use super::replay::{PrioritizedReplay, Transition};
use super::sampler::LevelSampler;
use crate::buttons::Buttons;
use crate::env::{EnvOptions, Environment, GamePackage, DEFAULT_SCENARIO};
use crate::error::{Error, Result};
use crate::rng::{chacha, derive_seed};
use crate::wrappers::{DiscreteActionMap, MaxX, StickySkip};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointTrainConfig {
    pub workers: usize,
    pub envs_per_worker: usize,
    pub batch_size: usize,
    pub iterations: u64,
    pub replay_capacity: usize,
    pub priority_alpha: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Probability of a uniformly random action.
    pub epsilon: f64,
    pub reward_scale: f64,
    pub sticky: bool,
    pub seed: u64,
    pub scenario: String,
    /// Give every worker worker 0's seeds (used to check that the
    /// reduction does not change the result).
    pub identical_workers: bool,
}

impl Default for JointTrainConfig {
    fn default() -> Self {
        Self {
            workers: 4,
            envs_per_worker: 2,
            batch_size: 256,
            iterations: 2000,
            replay_capacity: super::replay::DEFAULT_CAPACITY,
            priority_alpha: super::replay::DEFAULT_ALPHA,
            gamma: super::learner::DEFAULT_GAMMA,
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            epsilon: 0.1,
            reward_scale: 0.005,
            sticky: true,
            seed: 0,
            scenario: DEFAULT_SCENARIO.to_string(),
            identical_workers: false,
        }
    }
}

impl JointTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 || self.envs_per_worker == 0 || self.batch_size == 0 {
            return Err(Error::config(
                "workers, envs_per_worker and batch_size must be at least 1",
            ));
        }
        if self.batch_size > self.replay_capacity {
            return Err(Error::config("batch_size cannot exceed replay_capacity"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon must lie in [0, 1]"));
        }
        if !(self.reward_scale > 0.0) {
            return Err(Error::config("reward_scale must be positive"));
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(self.learning_rate > 0.0) {
            return Err(Error::config("gamma must lie in [0, 1] and learning_rate be positive"));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: u64,
    /// Mean TD loss of worker 0's batch; absent while the buffer fills.
    pub loss: Option<f64>,
    pub replay_size: usize,
    /// Episodes finished by worker 0 so far.
    pub episodes: u64,
    /// Raw return of worker 0's most recently finished episode.
    pub last_return: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct WorkerOutput {
    pub rank: usize,
    pub params: Vec<f64>,
    /// SHA-256 of the parameter bytes after every iteration.
    pub digests: Vec<[u8; 32]>,
    pub metrics: Vec<IterationMetrics>,
    pub episode_returns: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct JointTrainResult {
    pub params: Vec<f64>,
    pub workers: Vec<WorkerOutput>,
}

impl JointTrainResult {
    /// True when every worker held byte-identical parameters after every
    /// iteration.
    pub fn synchronized(&self) -> bool {
        self.workers.windows(2).all(|w| w[0].digests == w[1].digests)
    }

    pub fn metrics(&self) -> &[IterationMetrics] {
        &self.workers[0].metrics
    }
}

pub fn params_digest(params: &[f64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in params {
        h.update(p.to_le_bytes());
    }
    h.finalize().into()
}

/// One environment slot: plays episodes back to back, drawing a fresh
/// training level at every episode start.
struct JointEnv {
    env: Option<Environment>,
    skip: Option<StickySkip>,
    maxx: MaxX,
    features: Arc<[f64]>,
    sim_seed: u64,
}

impl JointEnv {
    fn new(sticky: bool, seed: u64) -> Self {
        Self {
            env: None,
            skip: sticky.then(|| StickySkip::new(derive_seed(seed, 1))),
            maxx: MaxX::new(),
            features: Arc::from(Vec::new()),
            sim_seed: derive_seed(seed, 2),
        }
    }

    fn ensure_episode(&mut self, pkg: &GamePackage, scenario: &str, sampler: &mut LevelSampler) -> Result<()> {
        if self.env.as_ref().is_some_and(|e| !e.is_done()) {
            return Ok(());
        }
        let level = sampler.next_level().to_string();
        let env = pkg.environment(&level, scenario, EnvOptions::headless(self.sim_seed))?;
        self.features = features(env.world());
        self.env = Some(env);
        self.maxx.reset();
        if let Some(skip) = &mut self.skip {
            skip.reset_episode();
        }
        Ok(())
    }

    /// Returns the transition and, if the episode ended, its raw return.
    fn step(&mut self, action: usize, buttons: Buttons, scale: f64) -> Result<(Transition, Option<f64>)> {
        let env = self.env.as_mut().expect("episode started");
        let schedule = match &mut self.skip {
            Some(skip) => skip.schedule(buttons).0,
            None => [buttons; 4],
        };
        let r = env.step_frames(schedule)?;
        let shaped = (self.maxx.transform(r.cumulative_offset) + r.bonus) * scale;
        let next = features(env.world());
        let t = Transition {
            features: self.features.clone(),
            action,
            reward: shaped,
            next_features: next.clone(),
            done: r.done,
        };
        self.features = next;
        Ok((t, r.done.then(|| env.episode_return())))
    }
}

fn choose<R: Rng>(q: &LinearQ, params: &[f64], f: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.actions)
    } else {
        q.greedy(params, f)
    }
}

#[allow(clippy::too_many_arguments)]
fn worker(
    rank: usize,
    cfg: &JointTrainConfig,
    pkg: &GamePackage,
    train: &[String],
    init: &[f64],
    group: &AllReduceGroup,
    q: &LinearQ,
    map: &DiscreteActionMap,
) -> Result<WorkerOutput> {
    let seed_rank = if cfg.identical_workers { 0 } else { rank as u64 };
    let base = derive_seed(cfg.seed, 0x5EED_0000 + seed_rank);
    let mut rng: ChaCha8Rng = chacha(derive_seed(base, 0));
    let mut sampler = LevelSampler::new(train.to_vec(), derive_seed(base, 1))?;
    let mut envs: Vec<JointEnv> = (0..cfg.envs_per_worker)
        .map(|e| JointEnv::new(cfg.sticky, derive_seed(base, 100 + e as u64)))
        .collect();
    let mut replay = PrioritizedReplay::new(cfg.replay_capacity, cfg.priority_alpha)?;
    let mut params = init.to_vec();
    let mut adam = Adam::new(cfg.adam(), params.len());
    let mut out = WorkerOutput {
        rank,
        params: Vec::new(),
        digests: Vec::with_capacity(cfg.iterations as usize),
        metrics: Vec::new(),
        episode_returns: Vec::new(),
    };

    for iteration in 0..cfg.iterations {
        for env in envs.iter_mut() {
            env.ensure_episode(pkg, &cfg.scenario, &mut sampler)?;
            let a = choose(q, &params, &env.features, cfg.epsilon, &mut rng);
            let (t, finished) = env.step(a, map.combos()[a], cfg.reward_scale)?;
            replay.push(t);
            if let Some(ret) = finished {
                out.episode_returns.push(ret);
            }
        }
        // Every worker holds the same number of transitions, so all of them
        // start learning on the same iteration.
        let mut loss = None;
        if replay.len() >= cfg.batch_size {
            let slots = replay.sample(cfg.batch_size, &mut rng)?;
            let batch: Vec<&Transition> = slots.iter().map(|&s| replay.get(s).expect("sampled slot")).collect();
            let (losses, grad) = q.loss_and_grad(&params, &batch)?;
            loss = Some(losses.iter().sum::<f64>() / losses.len() as f64);
            replay.update_priorities(&slots, &losses)?;
            let agg = group.all_reduce_mean(rank, &grad)?;
            adam.update(&mut params, &agg)?;
        }
        out.digests.push(params_digest(&params));
        if rank == 0 {
            out.metrics.push(IterationMetrics {
                iteration,
                loss,
                replay_size: replay.len(),
                episodes: out.episode_returns.len() as u64,
                last_return: out.episode_returns.last().copied(),
            });
        }
    }
    out.params = params;
    Ok(out)
}

/// Runs `cfg.workers` synchronous workers, one thread each, sharing only
/// the gradient all-reduce. Every worker starts from `init` (zeros when
/// `None`).
pub fn joint_train(
    pkg: &GamePackage,
    train: &[String],
    cfg: &JointTrainConfig,
    init: Option<&[f64]>,
) -> Result<JointTrainResult> {
    cfg.validate()?;
    let map = DiscreteActionMap::seven_dqn();
    let q = LinearQ::new(FEATURE_DIM, map.len(), cfg.gamma)?;
    let init = match init {
        Some(p) if p.len() != q.param_count() => {
            return Err(Error::ShapeMismatch {
                expected: q.param_count(),
                found: p.len(),
            })
        }
        Some(p) => p.to_vec(),
        None => vec![0.0; q.param_count()],
    };
    for id in train {
        pkg.level(id)?;
    }
    pkg.scenario(&cfg.scenario)?;
    let group = AllReduceGroup::new(cfg.workers, q.param_count())?;

    let results: Vec<Result<WorkerOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|rank| {
                let (group, q, map, init) = (&group, &q, &map, &init);
                s.spawn(move || {
                    let r = worker(rank, cfg, pkg, train, init, group, q, map);
                    if let Err(e) = &r {
                        group.abort(&format!("worker {rank}: {e}"));
                    }
                    r
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Aborted("worker panicked".into())))
            })
            .collect()
    });
    // Report the root cause rather than the aborts it triggered.
    let mut workers = Vec::with_capacity(results.len());
    let mut first_abort = None;
    for r in results {
        match r {
            Ok(w) => workers.push(w),
            Err(Error::Aborted(msg)) => {
                first_abort.get_or_insert(Error::Aborted(msg));
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = first_abort {
        return Err(e);
    }
    Ok(JointTrainResult {
        params: workers[0].params.clone(),
        workers,
    })
}
