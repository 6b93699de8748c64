//! Deterministic side-scrolling platformer benchmark.
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: fixed-point world simulation, procedural zones/acts, rendering.
//! - [`env`]: game packages, scenarios, data files and the step/reset API.
//! - [`wrappers`]: sticky frame skip, discrete action maps, reward transforms.
//! - [`agents`]: the JERK explore/replay baseline plus scripted baselines.
//! - [`eval`]: budgeted per-level evaluation, aggregation, learning curves.
//! - [`joint`]: prioritized replay, gradient all-reduce, Adam and the
//!   synchronous worker loop used for joint training.
//! - [`record`]: replay files for bit-exact episode verification.

pub mod agents;
pub mod buttons;
pub mod env;
pub mod error;
pub mod eval;
pub mod fixed;
pub mod joint;
pub mod record;
pub mod rng;
pub mod sim;
pub mod wrappers;

pub use buttons::{Button, Buttons};
pub use error::{Error, Result};
pub use fixed::Fixed;
