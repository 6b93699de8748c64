use std::collections::BTreeMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::datafile::{DataFile, Extractor};
use super::scenario::Scenario;
use crate::buttons::Buttons;
use crate::error::{Error, Result};
use crate::sim::{render, LevelSpec, Observation, WorldState};

/// Physics frames per agent timestep.
pub const FRAMES_PER_TIMESTEP: usize = 4;

/// Version of the environment save-state header.
pub const SAVE_STATE_VERSION: u16 = 1;

const MAGIC: &[u8; 4] = b"RBSS";
const KIND_ENV: u8 = 1;
const HEADER_LEN: usize = 4 + 2 + 1 + 8 + 4 + 8 + 8 + 1 + 4;

/// Cumulative offset reward is kept on a 2^-20 grid so that per-timestep
/// differences telescope exactly.
const QUANTUM: f64 = (1u64 << 20) as f64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DoneReason {
    #[default]
    None,
    Completed,
    LifeLost,
    Timeout,
}

impl DoneReason {
    pub fn code(self) -> u8 {
        match self {
            DoneReason::None => 0,
            DoneReason::Completed => 1,
            DoneReason::LifeLost => 2,
            DoneReason::Timeout => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => DoneReason::None,
            1 => DoneReason::Completed,
            2 => DoneReason::LifeLost,
            3 => DoneReason::Timeout,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            DoneReason::None => "none",
            DoneReason::Completed => "completed",
            DoneReason::LifeLost => "life_lost",
            DoneReason::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// `None` when rendering is disabled.
    pub observation: Option<Observation>,
    /// Offset reward plus completion bonus.
    pub reward: f64,
    pub offset_reward: f64,
    pub bonus: f64,
    /// Cumulative offset reward after this timestep.
    pub cumulative_offset: f64,
    pub done: bool,
    pub done_reason: DoneReason,
    /// Every data-file variable, read after the timestep.
    pub info: BTreeMap<String, i64>,
    /// Physics frames simulated (fewer than 4 only when a life was lost).
    pub frames: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvOptions {
    pub render: bool,
    pub sim_seed: u64,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            render: true,
            sim_seed: 0,
        }
    }
}

impl EnvOptions {
    pub fn headless(sim_seed: u64) -> Self {
        Self {
            render: false,
            sim_seed,
        }
    }
}

/// One level under one scenario: the step/reset API.
#[derive(Clone, Debug)]
pub struct Environment {
    level_id: String,
    scenario: Scenario,
    data: DataFile,
    offset_var: Extractor,
    completion_var: Extractor,
    initial: WorldState,
    world: WorldState,
    options: EnvOptions,
    timestep: u32,
    cumulative: f64,
    episode_return: f64,
    done: DoneReason,
}

fn quantize(v: f64) -> f64 {
    (v * QUANTUM).round() / QUANTUM
}

fn scenario_hash(scenario: &Scenario) -> u64 {
    let digest = Sha256::digest(scenario.to_text().as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

impl Environment {
    pub fn new(
        level_id: impl Into<String>,
        level: Arc<LevelSpec>,
        scenario: Scenario,
        data: DataFile,
        options: EnvOptions,
    ) -> Result<Self> {
        scenario.validate(&data)?;
        let lookup = |name: &str| {
            data.get(name)
                .ok_or_else(|| Error::config(format!("undeclared variable {name:?}")))
        };
        let offset_var = lookup(&scenario.reward.offset_variable)?;
        let completion_var = lookup(&scenario.done.completion_offset_variable)?;
        if level.end_x_px() <= level.start_x_px() {
            return Err(Error::config("level end must lie right of its start"));
        }
        let initial = WorldState::at_spawn(level, options.sim_seed);
        Ok(Self {
            level_id: level_id.into(),
            scenario,
            data,
            offset_var,
            completion_var,
            world: initial.clone(),
            initial,
            options,
            timestep: 0,
            cumulative: 0.0,
            episode_return: 0.0,
            done: DoneReason::None,
        })
    }

    pub fn level_id(&self) -> &str {
        &self.level_id
    }

    pub fn level(&self) -> &Arc<LevelSpec> {
        self.world.level()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn data_file(&self) -> &DataFile {
        &self.data
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn options(&self) -> EnvOptions {
        self.options
    }

    pub fn timestep(&self) -> u32 {
        self.timestep
    }

    pub fn cumulative_offset(&self) -> f64 {
        self.cumulative
    }

    /// Raw return (offset plus bonus) accumulated this episode.
    pub fn episode_return(&self) -> f64 {
        self.episode_return
    }

    pub fn is_done(&self) -> bool {
        self.done != DoneReason::None
    }

    pub fn done_reason(&self) -> DoneReason {
        self.done
    }

    pub fn set_rendering(&mut self, on: bool) {
        self.options.render = on;
    }

    pub fn render(&self) -> Observation {
        render(&self.world)
    }

    pub fn info(&self) -> BTreeMap<String, i64> {
        self.data.extract_all(&self.world)
    }

    /// Starts a new episode from the save state. Allowed before the first
    /// step or once the current episode is done; resetting a running episode
    /// is a protocol violation.
    pub fn reset(&mut self) -> Result<Option<Observation>> {
        if self.timestep > 0 && !self.is_done() {
            return Err(Error::Protocol(format!(
                "reset requested at timestep {} of a running episode",
                self.timestep
            )));
        }
        self.world = self.initial.clone();
        self.timestep = 0;
        self.cumulative = 0.0;
        self.episode_return = 0.0;
        self.done = DoneReason::None;
        Ok(self.options.render.then(|| self.render()))
    }

    fn offset_value(&self) -> f64 {
        let level = self.world.level();
        let start = level.start_x_px() as f64;
        let span = (level.end_x_px() - level.start_x_px()) as f64;
        let v = self.offset_var.read(&self.world) as f64;
        quantize(self.scenario.reward.total_at_completion * (v - start) / span)
    }

    /// Holds `buttons` for a whole timestep.
    pub fn step(&mut self, buttons: Buttons) -> Result<StepResult> {
        self.step_frames([buttons; FRAMES_PER_TIMESTEP])
    }

    /// Advances one timestep applying `schedule[i]` on frame `i`.
    pub fn step_frames(&mut self, schedule: [Buttons; FRAMES_PER_TIMESTEP]) -> Result<StepResult> {
        if self.is_done() {
            return Err(Error::Protocol(format!(
                "step on a finished episode ({}); reset first",
                self.done.name()
            )));
        }
        let t = self.timestep;
        let mut frames = 0;
        let mut life_lost = false;
        for b in schedule {
            self.world.step_in_place(b);
            frames += 1;
            if self.world.life_lost {
                life_lost = true;
                break;
            }
        }
        self.timestep += 1;

        let mut reason = DoneReason::None;
        if life_lost {
            if self.scenario.done.life_lost || self.world.lives == 0 {
                reason = DoneReason::LifeLost;
            } else {
                self.world.respawn();
            }
        }
        let completed =
            reason == DoneReason::None && self.completion_var.read(&self.world) >= self.world.level().end_x_px() as i64;
        let mut next = self.offset_value();
        let mut bonus = 0.0;
        if completed {
            reason = DoneReason::Completed;
            next = self.scenario.reward.total_at_completion;
            bonus = self.scenario.completion_bonus(t);
        } else if reason == DoneReason::None && self.timestep >= self.scenario.done.timestep_limit {
            reason = DoneReason::Timeout;
        }
        let offset_reward = next - self.cumulative;
        self.cumulative = next;
        self.done = reason;
        let reward = offset_reward + bonus;
        self.episode_return += reward;

        Ok(StepResult {
            observation: self.options.render.then(|| self.render()),
            reward,
            offset_reward,
            bonus,
            cumulative_offset: next,
            done: reason != DoneReason::None,
            done_reason: reason,
            info: self.info(),
            frames,
        })
    }

    /// Serializes the episode position and world state.
    ///
    /// Layout (little-endian): `RBSS`, u16 version, kind byte 1, u64
    /// scenario hash, u32 timestep, f64 cumulative offset, f64 episode
    /// return, u8 done code, u32 world-blob length, world blob.
    pub fn snapshot(&self) -> Vec<u8> {
        let world = self.world.to_bytes();
        let mut out = Vec::with_capacity(HEADER_LEN + world.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&SAVE_STATE_VERSION.to_le_bytes());
        out.push(KIND_ENV);
        out.extend_from_slice(&scenario_hash(&self.scenario).to_le_bytes());
        out.extend_from_slice(&self.timestep.to_le_bytes());
        out.extend_from_slice(&self.cumulative.to_le_bytes());
        out.extend_from_slice(&self.episode_return.to_le_bytes());
        out.push(self.done.code());
        out.extend_from_slice(&(world.len() as u32).to_le_bytes());
        out.extend_from_slice(&world);
        out
    }

    /// Restores a [`snapshot`](Self::snapshot). On error the environment is
    /// left untouched.
    pub fn restore(&mut self, bytes: &[u8]) -> Result<()> {
        if bytes.len() < 7 || &bytes[..4] != MAGIC {
            return Err(Error::Corrupt("save state: bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != SAVE_STATE_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "save state",
                found: version,
                expected: SAVE_STATE_VERSION,
            });
        }
        if bytes[6] != KIND_ENV {
            return Err(Error::Corrupt(format!(
                "save state: kind {} is not an environment",
                bytes[6]
            )));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Corrupt("save state: truncated header".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        if u64_at(7) != scenario_hash(&self.scenario) {
            return Err(Error::Corrupt("save state was taken under a different scenario".into()));
        }
        let timestep = u32_at(15);
        let cumulative = f64::from_bits(u64_at(19));
        let episode_return = f64::from_bits(u64_at(27));
        let done = DoneReason::from_code(bytes[35])
            .ok_or_else(|| Error::Corrupt(format!("save state: done code {}", bytes[35])))?;
        let world_len = u32_at(36) as usize;
        if bytes.len() != HEADER_LEN + world_len {
            return Err(Error::Corrupt(format!(
                "save state: {} bytes, header implies {}",
                bytes.len(),
                HEADER_LEN + world_len
            )));
        }
        if timestep > self.scenario.done.timestep_limit || !cumulative.is_finite() || !episode_return.is_finite() {
            return Err(Error::Corrupt("save state: counters out of range".into()));
        }
        let world = WorldState::from_bytes(&bytes[HEADER_LEN..], self.world.level().clone())?;
        self.world = world;
        self.timestep = timestep;
        self.cumulative = cumulative;
        self.episode_return = episode_return;
        self.done = done;
        Ok(())
    }
}
