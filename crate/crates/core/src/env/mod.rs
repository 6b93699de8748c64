//! Game packages, data files, scenarios and the step/reset environment.
//!
//! A [`GamePackage`] bundles generated levels (one save state per act), a
//! [`DataFile`] naming the variables that can be read from the world, and
//! one or more [`Scenario`]s defining done conditions and rewards over those
//! variables. [`Environment`] runs one level under one scenario.

mod datafile;
mod environment;
mod ini;
mod package;
mod scenario;

pub use datafile::{DataFile, Extractor};
pub use environment::{DoneReason, EnvOptions, Environment, StepResult, FRAMES_PER_TIMESTEP, SAVE_STATE_VERSION};
pub use package::{
    save_state_id, split_levels, GamePackage, Manifest, SaveStateEntry, Split, DEFAULT_SCENARIO, DEFAULT_TEST_ZONES,
    MANIFEST_FILE,
};
pub use scenario::{DoneSpec, RewardSpec, Scenario};
