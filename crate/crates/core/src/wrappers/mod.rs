//! Action-space and reward transformations layered over [`Environment`].
//!
//! [`Environment`]: crate::env::Environment

mod actions;
mod reward;
mod sticky;

pub use actions::{ActionMapKind, DiscreteActionMap};
pub use reward::{scale_reward, MaxX};
pub use sticky::{StickyEnv, StickySkip, StickyStep, DEFAULT_DELAY_PROBABILITY};
