use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use retrobench::agents::EpisodeKind;
use retrobench::env::{DoneReason, EnvOptions, GamePackage, Split, DEFAULT_SCENARIO};
use retrobench::eval::{EpisodeRecord, LevelResult};
use retrobench::record::ReplayFile;
use retrobench::rng::derive_seed;
use retrobench::wrappers::{StickyEnv, StickySkip};
use retrobench::Buttons;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServeError};
use crate::protocol::{rle_encode, ClientMessage, EndReason, FrameEncoding, Mode, ServerMessage};

/// Session time advances by one tick per timestep at this rate, whatever
/// pace the server actually ticks at.
pub const NOMINAL_HZ: f64 = 15.0;
pub const PRACTICE_SECS: f64 = 2.0 * 3600.0;
pub const TEST_SECS_PER_LEVEL: f64 = 3600.0;
pub const FINAL_WINDOW: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub mode: Mode,
    /// Total practice time, spread over the training levels in turn.
    pub practice_secs: f64,
    pub test_secs_per_level: f64,
    /// Restricts the level queue. Every entry must belong to the split side
    /// the mode plays.
    pub levels: Option<Vec<String>>,
    /// Real ticks per second; 0 ticks as fast as possible.
    pub tick_hz: f64,
    pub sticky: bool,
    pub seed: u64,
    pub scenario: String,
    pub frame_encoding: FrameEncoding,
    /// Where to write per-session transcripts.
    pub transcript_dir: Option<PathBuf>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Practice,
            practice_secs: PRACTICE_SECS,
            test_secs_per_level: TEST_SECS_PER_LEVEL,
            levels: None,
            tick_hz: NOMINAL_HZ,
            sticky: true,
            seed: 0,
            scenario: DEFAULT_SCENARIO.to_string(),
            frame_encoding: FrameEncoding::Rle,
            transcript_dir: None,
        }
    }
}

impl SessionConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ServeError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let budget = match self.mode {
            Mode::Practice => self.practice_secs,
            Mode::Test => self.test_secs_per_level,
        };
        if !(budget.is_finite() && budget * NOMINAL_HZ >= 1.0) {
            return Err(ServeError::Config(format!(
                "session time {budget}s is shorter than one tick"
            )));
        }
        if !(self.tick_hz.is_finite() && self.tick_hz >= 0.0) {
            return Err(ServeError::Config("tick_hz must be a non-negative number".into()));
        }
        if self.levels.as_ref().is_some_and(|l| l.is_empty()) {
            return Err(ServeError::Config("levels must not be empty".into()));
        }
        Ok(())
    }

    fn budget_ticks(&self) -> u64 {
        let secs = match self.mode {
            Mode::Practice => self.practice_secs,
            Mode::Test => self.test_secs_per_level,
        };
        (secs * NOMINAL_HZ).round() as u64
    }

    /// Level queue for this mode: test levels for test sessions, training
    /// levels for practice.
    pub fn level_queue(&self, split: &Split) -> Result<Vec<String>> {
        let pool = match self.mode {
            Mode::Practice => &split.train,
            Mode::Test => &split.test,
        };
        match &self.levels {
            None if pool.is_empty() => Err(ServeError::Config("the split has no levels for this mode".into())),
            None => Ok(pool.clone()),
            Some(levels) => {
                if let Some(bad) = levels.iter().find(|l| !pool.contains(l)) {
                    let side = match self.mode {
                        Mode::Practice => "training",
                        Mode::Test => "test",
                    };
                    return Err(ServeError::Config(format!("level {bad} is not a {side} level")));
                }
                Ok(levels.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    /// Ended by the environment; counts toward scores.
    Finished,
    /// The client disconnected mid-episode.
    Abandoned,
    /// The level's session time ran out mid-episode.
    OutOfTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub index: u32,
    pub level: String,
    pub sticky_seed: Option<u64>,
    pub sim_seed: u64,
    pub status: EpisodeStatus,
    pub total_return: f64,
    pub timesteps: u32,
    pub done_reason: String,
    /// Session ticks on this level's clock when the episode ended.
    pub end_tick: u64,
    #[serde(skip)]
    pub actions: Vec<Buttons>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub mode: Mode,
    pub seed: u64,
    pub sticky: bool,
    pub scenario: String,
    pub episodes: Vec<EpisodeLog>,
    /// Scores per level over finished episodes only.
    pub levels: Vec<LevelResult>,
}

struct Live {
    env: StickyEnv,
    level: String,
    sticky_seed: Option<u64>,
    sim_seed: u64,
}

/// One player's session: a level queue, a clock and the live episode.
/// Drive it with [`Session::handle`] and [`Session::tick`].
pub struct Session {
    pkg: Arc<GamePackage>,
    cfg: SessionConfig,
    seed: u64,
    queue: Vec<String>,
    /// Level being played in test mode.
    level_index: usize,
    budget_ticks: u64,
    used_ticks: u64,
    live: Option<Live>,
    next_episode: u32,
    input: Buttons,
    paused: bool,
    started: bool,
    finished: bool,
    tick: u32,
    episodes: Vec<EpisodeLog>,
}

impl Session {
    pub fn new(pkg: Arc<GamePackage>, split: &Split, cfg: SessionConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let queue = cfg.level_queue(split)?;
        for id in &queue {
            pkg.level(id)?;
        }
        pkg.scenario(&cfg.scenario)?;
        Ok(Self {
            budget_ticks: cfg.budget_ticks(),
            pkg,
            cfg,
            seed,
            queue,
            level_index: 0,
            used_ticks: 0,
            live: None,
            next_episode: 0,
            input: Buttons::NONE,
            paused: false,
            started: false,
            finished: false,
            tick: 0,
            episodes: Vec::new(),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn queue(&self) -> &[String] {
        &self.queue
    }

    /// True while ticks advance the game.
    pub fn is_running(&self) -> bool {
        self.started && !self.paused && !self.finished
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn episodes(&self) -> &[EpisodeLog] {
        &self.episodes
    }

    pub fn remaining_secs(&self) -> f64 {
        self.budget_ticks.saturating_sub(self.used_ticks) as f64 / NOMINAL_HZ
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Result<Vec<ServerMessage>> {
        match msg {
            ClientMessage::Input(b) => self.input = b,
            ClientMessage::Pause(on) => self.paused = on,
            ClientMessage::Ready if !self.started => {
                self.started = true;
                self.begin_episode()?;
                return Ok(vec![self.session_message()]);
            }
            ClientMessage::Ready => {}
        }
        Ok(Vec::new())
    }

    fn current_level(&self) -> &str {
        match self.cfg.mode {
            Mode::Practice => &self.queue[self.next_episode as usize % self.queue.len()],
            Mode::Test => &self.queue[self.level_index],
        }
    }

    fn begin_episode(&mut self) -> Result<()> {
        let level = self.current_level().to_string();
        let index = self.next_episode as u64;
        let sticky_seed = self.cfg.sticky.then(|| derive_seed(self.seed, 2 * index));
        let sim_seed = derive_seed(self.seed, 2 * index + 1);
        let opts = EnvOptions { render: true, sim_seed };
        let env = self.pkg.environment(&level, &self.cfg.scenario, opts)?;
        let mut env = StickyEnv::with_skip(env, sticky_seed.map(StickySkip::new));
        env.reset()?;
        env.start_recording();
        self.live = Some(Live {
            env,
            level,
            sticky_seed,
            sim_seed,
        });
        Ok(())
    }

    fn session_message(&self) -> ServerMessage {
        let (level, level_index) = match &self.live {
            Some(l) => (
                l.level.clone(),
                self.queue.iter().position(|q| *q == l.level).unwrap_or(0),
            ),
            None => (String::new(), self.level_index.min(self.queue.len())),
        };
        ServerMessage::Session {
            mode: self.cfg.mode,
            level,
            remaining_secs: self.remaining_secs(),
            level_index: level_index as u16,
            level_count: self.queue.len() as u16,
            episode: self.next_episode,
        }
    }

    fn close_episode(&mut self, status: EpisodeStatus) -> Option<EpisodeLog> {
        let mut live = self.live.take()?;
        let env = live.env.env();
        let log = EpisodeLog {
            index: self.next_episode,
            level: live.level,
            sticky_seed: live.sticky_seed,
            sim_seed: live.sim_seed,
            status,
            total_return: env.episode_return(),
            timesteps: env.timestep(),
            done_reason: env.done_reason().name().to_string(),
            end_tick: self.used_ticks,
            actions: live.env.take_recording(),
        };
        self.next_episode += 1;
        self.episodes.push(log.clone());
        Some(log)
    }

    fn finished_count(&self) -> u32 {
        self.episodes
            .iter()
            .filter(|e| e.status == EpisodeStatus::Finished)
            .count() as u32
    }

    /// Advances one timestep with the latest input. Does nothing unless
    /// running.
    pub fn tick(&mut self) -> Result<Vec<ServerMessage>> {
        if !self.is_running() {
            return Ok(Vec::new());
        }
        let live = self.live.as_mut().expect("running sessions have a live episode");
        let step = live.env.step(self.input)?.result;
        self.tick += 1;
        self.used_ticks += 1;
        let mut out = Vec::with_capacity(4);
        let obs = step.observation.expect("session environments render");
        let (encoding, data) = match self.cfg.frame_encoding {
            FrameEncoding::Raw => (FrameEncoding::Raw, obs.into_pixels()),
            FrameEncoding::Rle => (FrameEncoding::Rle, rle_encode(obs.pixels())),
        };
        out.push(ServerMessage::Frame {
            tick: self.tick,
            timestep: live.env.env().timestep(),
            encoding,
            width: retrobench::sim::OBS_WIDTH as u16,
            height: retrobench::sim::OBS_HEIGHT as u16,
            data,
        });

        let mut ended = None;
        if step.done {
            let reason = match step.done_reason {
                DoneReason::Completed => EndReason::Completed,
                DoneReason::LifeLost => EndReason::LifeLost,
                _ => EndReason::Timeout,
            };
            ended = self.close_episode(EpisodeStatus::Finished).map(|log| (reason, log));
        }
        let out_of_time = self.used_ticks >= self.budget_ticks;
        if out_of_time && ended.is_none() {
            ended = self
                .close_episode(EpisodeStatus::OutOfTime)
                .map(|log| (EndReason::OutOfTime, log));
        }
        let (episode_return, timestep) = match (&ended, &self.live) {
            (Some((_, log)), _) => (log.total_return, log.timesteps),
            (None, Some(l)) => (l.env.env().episode_return(), l.env.env().timestep()),
            (None, None) => (0.0, 0),
        };
        out.push(ServerMessage::Score {
            episode_return,
            timestep,
            episodes: self.finished_count(),
        });
        if let Some((reason, log)) = ended {
            out.push(ServerMessage::EpisodeEnd {
                reason,
                total_return: log.total_return,
                timesteps: log.timesteps,
            });
            if out_of_time {
                self.advance_level();
            }
            if !self.finished {
                self.begin_episode()?;
            }
            out.push(self.session_message());
        }
        Ok(out)
    }

    fn advance_level(&mut self) {
        match self.cfg.mode {
            Mode::Practice => self.finished = true,
            Mode::Test => {
                self.level_index += 1;
                if self.level_index >= self.queue.len() {
                    self.finished = true;
                } else {
                    self.used_ticks = 0;
                }
            }
        }
    }

    /// Records the running episode, if it has started, as abandoned.
    pub fn disconnect(&mut self) {
        if self.live.as_ref().is_some_and(|l| l.env.env().timestep() > 0) {
            self.close_episode(EpisodeStatus::Abandoned);
        }
        self.live = None;
        self.finished = true;
    }

    /// Per-level scores over finished episodes, through the same scoring
    /// code as agent evaluation.
    pub fn record(&self) -> SessionRecord {
        let mut levels = Vec::new();
        for level in &self.queue {
            let eps: Vec<EpisodeRecord> = self
                .episodes
                .iter()
                .filter(|e| e.level == *level && e.status == EpisodeStatus::Finished)
                .map(|e| EpisodeRecord {
                    copy: 0,
                    kind: EpisodeKind::Human,
                    total_return: e.total_return,
                    timesteps: e.timesteps,
                    end_timestep: e.end_tick,
                    done_reason: e.done_reason.clone(),
                    truncated: false,
                })
                .collect();
            if !eps.is_empty() {
                levels.push(LevelResult::from_episodes(
                    level,
                    self.seed,
                    self.budget_ticks,
                    FINAL_WINDOW,
                    eps,
                ));
            }
        }
        SessionRecord {
            mode: self.cfg.mode,
            seed: self.seed,
            sticky: self.cfg.sticky,
            scenario: self.cfg.scenario.clone(),
            episodes: self.episodes.clone(),
            levels,
        }
    }

    /// Writes one replay file per played episode, then `session.json`.
    pub fn write_transcript(&self, dir: &Path) -> Result<SessionRecord> {
        fs::create_dir_all(dir).map_err(|e| ServeError::io(dir, e))?;
        for e in &self.episodes {
            let replay = ReplayFile::record(
                &self.pkg,
                &e.level,
                &self.cfg.scenario,
                e.sticky_seed,
                e.sim_seed,
                e.actions.clone(),
            )?;
            replay.save(&dir.join(replay_file_name(e.index)))?;
        }
        let record = self.record();
        let json = serde_json::to_string_pretty(&record)?;
        let tmp = dir.join("session.json.tmp");
        fs::write(&tmp, json).map_err(|e| ServeError::io(&tmp, e))?;
        let path = dir.join("session.json");
        fs::rename(&tmp, &path).map_err(|e| ServeError::io(&path, e))?;
        Ok(record)
    }
}

pub fn replay_file_name(episode: u32) -> String {
    format!("episode-{episode:05}.rbrp")
}
