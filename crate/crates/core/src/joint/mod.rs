//! Joint training across many levels: prioritized replay, a linear
//! Q-learner over downsampled observations, gradient all-reduce between
//! synchronous workers and Adam updates.

mod adam;
mod allreduce;
mod checkpoint;
mod finetune;
mod learner;
mod replay;
mod sampler;
mod sumtree;
mod worker;

pub use adam::{Adam, AdamConfig};
pub use allreduce::AllReduceGroup;
pub use checkpoint::{feature_spec_hash, Checkpoint, CHECKPOINT_VERSION};
pub use finetune::{QAgent, QAgentConfig};
pub use learner::{features, LinearQ, DEFAULT_GAMMA, FEATURE_BLOCK, FEATURE_DIM, FEATURE_SPEC};
pub use replay::{PrioritizedReplay, Transition, DEFAULT_ALPHA, DEFAULT_CAPACITY, PRIORITY_FLOOR};
pub use sampler::LevelSampler;
pub use sumtree::SumTree;
pub use worker::{joint_train, params_digest, IterationMetrics, JointTrainConfig, JointTrainResult, WorkerOutput};
