//! Replay files: the inputs of one episode plus a digest of the states it
//! produced, for bit-exact re-verification.
//!
//! Layout (little-endian):
//!
//! ```text
//! "RBRP" | u16 version | u16 len, level id | u16 len, scenario id
//! | u8 sticky flag | u64 sticky seed | u64 sim seed
//! | u32 n | n x u16 button mask
//! | 32-byte trace digest | f64 total return | u32 timesteps | u8 done code
//! ```
//!
//! The trace digest is SHA-256 over, for every timestep, the world-state
//! blob after the step followed by the step's reward as f64.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::buttons::Buttons;
use crate::env::{DoneReason, EnvOptions, GamePackage};
use crate::error::{Error, Result};
use crate::wrappers::{StickyEnv, StickySkip};

const MAGIC: &[u8; 4] = b"RBRP";
pub const REPLAY_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySummary {
    pub digest: [u8; 32],
    pub total_return: f64,
    pub timesteps: u32,
    pub done_reason: DoneReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayFile {
    pub level_id: String,
    pub scenario_id: String,
    /// `None` when sticky frame skip was off.
    pub sticky_seed: Option<u64>,
    pub sim_seed: u64,
    pub actions: Vec<Buttons>,
    pub summary: ReplaySummary,
}

/// Environment exactly as a replay of these settings sees it.
pub fn replay_env(
    pkg: &GamePackage,
    level_id: &str,
    scenario_id: &str,
    sticky_seed: Option<u64>,
    sim_seed: u64,
) -> Result<StickyEnv> {
    let env = pkg.environment(level_id, scenario_id, EnvOptions::headless(sim_seed))?;
    Ok(StickyEnv::with_skip(env, sticky_seed.map(StickySkip::new)))
}

/// Plays `actions` from the episode start and summarizes the trace.
/// Playing stops at the first done step; leftover actions are an error.
pub fn play_actions(
    pkg: &GamePackage,
    level_id: &str,
    scenario_id: &str,
    sticky_seed: Option<u64>,
    sim_seed: u64,
    actions: &[Buttons],
) -> Result<ReplaySummary> {
    let mut env = replay_env(pkg, level_id, scenario_id, sticky_seed, sim_seed)?;
    env.reset()?;
    let mut h = Sha256::new();
    let mut total = 0.0;
    let mut done_reason = DoneReason::None;
    for (i, &a) in actions.iter().enumerate() {
        if done_reason != DoneReason::None {
            return Err(Error::Verification(format!(
                "episode ended at timestep {i} but {} actions remain",
                actions.len() - i
            )));
        }
        let r = env.step(a)?.result;
        h.update(env.env().world().to_bytes());
        h.update(r.reward.to_le_bytes());
        total += r.reward;
        done_reason = r.done_reason;
    }
    Ok(ReplaySummary {
        digest: h.finalize().into(),
        total_return: total,
        timesteps: actions.len() as u32,
        done_reason,
    })
}

impl ReplayFile {
    /// Builds a replay file, summarizing by playing the actions.
    pub fn record(
        pkg: &GamePackage,
        level_id: &str,
        scenario_id: &str,
        sticky_seed: Option<u64>,
        sim_seed: u64,
        actions: Vec<Buttons>,
    ) -> Result<Self> {
        let summary = play_actions(pkg, level_id, scenario_id, sticky_seed, sim_seed, &actions)?;
        Ok(Self {
            level_id: level_id.to_string(),
            scenario_id: scenario_id.to_string(),
            sticky_seed,
            sim_seed,
            actions,
            summary,
        })
    }

    /// Replays and compares against the stored summary.
    pub fn verify(&self, pkg: &GamePackage) -> Result<ReplaySummary> {
        let got = play_actions(
            pkg,
            &self.level_id,
            &self.scenario_id,
            self.sticky_seed,
            self.sim_seed,
            &self.actions,
        )?;
        let want = &self.summary;
        if got.digest != want.digest {
            return Err(Error::Verification("state trace digest differs".into()));
        }
        if got.total_return.to_bits() != want.total_return.to_bits() {
            return Err(Error::Verification(format!(
                "return {} differs from recorded {}",
                got.total_return, want.total_return
            )));
        }
        if got.timesteps != want.timesteps || got.done_reason != want.done_reason {
            return Err(Error::Verification(format!(
                "episode ended at {} ({}) instead of {} ({})",
                got.timesteps,
                got.done_reason.name(),
                want.timesteps,
                want.done_reason.name()
            )));
        }
        Ok(got)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(64 + 2 * self.actions.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&REPLAY_VERSION.to_le_bytes());
        for s in [&self.level_id, &self.scenario_id] {
            let len = u16::try_from(s.len()).map_err(|_| Error::config("id longer than 65535 bytes"))?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        out.push(self.sticky_seed.is_some() as u8);
        out.extend_from_slice(&self.sticky_seed.unwrap_or(0).to_le_bytes());
        out.extend_from_slice(&self.sim_seed.to_le_bytes());
        out.extend_from_slice(&(self.actions.len() as u32).to_le_bytes());
        for a in &self.actions {
            out.extend_from_slice(&a.mask().to_le_bytes());
        }
        let s = &self.summary;
        out.extend_from_slice(&s.digest);
        out.extend_from_slice(&s.total_return.to_le_bytes());
        out.extend_from_slice(&s.timesteps.to_le_bytes());
        out.push(s.done_reason.code());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Corrupt("replay: bad magic".into()));
        }
        let version = r.u16()?;
        if version != REPLAY_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "replay file",
                found: version,
                expected: REPLAY_VERSION,
            });
        }
        let level_id = r.string()?;
        let scenario_id = r.string()?;
        let sticky = match r.take(1)?[0] {
            0 => false,
            1 => true,
            other => return Err(Error::Corrupt(format!("replay: sticky flag {other}"))),
        };
        let sticky_seed = r.u64()?;
        let sim_seed = r.u64()?;
        let n = r.u32()? as usize;
        let mut actions = Vec::with_capacity(n.min(bytes.len() / 2));
        for _ in 0..n {
            let mask = r.u16()?;
            actions.push(Buttons::from_mask(mask).ok_or_else(|| Error::Corrupt(format!("replay: mask {mask:#06x}")))?);
        }
        let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let total_return = f64::from_bits(r.u64()?);
        let timesteps = r.u32()?;
        let code = r.take(1)?[0];
        let done_reason =
            DoneReason::from_code(code).ok_or_else(|| Error::Corrupt(format!("replay: done code {code}")))?;
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!(
                "replay: {} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Self {
            level_id,
            scenario_id,
            sticky_seed: sticky.then_some(sticky_seed),
            sim_seed,
            actions,
            summary: ReplaySummary {
                digest,
                total_return,
                timesteps,
                done_reason,
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Corrupt("replay: truncated".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Corrupt("replay: id is not UTF-8".into()))
    }
}
