use std::fmt::Write as _;

use super::datafile::DataFile;
use super::ini;
use crate::error::{Error, Result};

/// Episode termination rules.
#[derive(Clone, Debug, PartialEq)]
pub struct DoneSpec {
    /// Variable compared against the level's completion offset.
    pub completion_offset_variable: String,
    pub timestep_limit: u32,
    /// Whether losing a life ends the episode (otherwise the player respawns).
    pub life_lost: bool,
}

/// Reward rules: a normalized horizontal offset plus a time-decaying bonus.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardSpec {
    pub offset_variable: String,
    pub total_at_completion: f64,
    pub completion_bonus_max: f64,
    pub bonus_zero_at: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub done: DoneSpec,
    pub reward: RewardSpec,
}

pub const DEFAULT_TIMESTEP_LIMIT: u32 = 4500;
pub const DEFAULT_TOTAL_AT_COMPLETION: f64 = 9000.0;
pub const DEFAULT_COMPLETION_BONUS: f64 = 1000.0;
pub const DEFAULT_BONUS_ZERO_AT: u32 = 4500;

impl Default for Scenario {
    fn default() -> Self {
        Self::with_offset_variable("x_pixels")
    }
}

impl Scenario {
    pub fn with_offset_variable(var: &str) -> Self {
        Self {
            done: DoneSpec {
                completion_offset_variable: var.to_string(),
                timestep_limit: DEFAULT_TIMESTEP_LIMIT,
                life_lost: true,
            },
            reward: RewardSpec {
                offset_variable: var.to_string(),
                total_at_completion: DEFAULT_TOTAL_AT_COMPLETION,
                completion_bonus_max: DEFAULT_COMPLETION_BONUS,
                bonus_zero_at: DEFAULT_BONUS_ZERO_AT,
            },
        }
    }

    /// Completion bonus for finishing at (0-based) timestep `t_c`: the full
    /// bonus at 0, falling linearly to zero at `bonus_zero_at`.
    pub fn completion_bonus(&self, t_c: u32) -> f64 {
        let frac = 1.0 - t_c as f64 / self.reward.bonus_zero_at as f64;
        self.reward.completion_bonus_max * frac.max(0.0)
    }

    pub fn validate(&self, data: &DataFile) -> Result<()> {
        if self.done.timestep_limit == 0 {
            return Err(Error::config("timestep_limit must be positive"));
        }
        if !(self.reward.total_at_completion > 0.0) || !self.reward.total_at_completion.is_finite() {
            return Err(Error::config("total_at_completion must be positive"));
        }
        if !(self.reward.completion_bonus_max >= 0.0) || !self.reward.completion_bonus_max.is_finite() {
            return Err(Error::config("completion_bonus_max must be non-negative"));
        }
        if self.reward.bonus_zero_at == 0 {
            return Err(Error::config("bonus_zero_at must be positive"));
        }
        for var in [&self.done.completion_offset_variable, &self.reward.offset_variable] {
            if !data.contains(var) {
                return Err(Error::config(format!(
                    "scenario references undeclared variable {var:?}"
                )));
            }
        }
        Ok(())
    }

    /// Parses against the built-in data file.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &DataFile::default())
    }

    pub fn parse_with(text: &str, data: &DataFile) -> Result<Self> {
        let sections = ini::parse(text)?;
        let mut offset_variable = None;
        let mut completion_variable = None;
        let mut s = Scenario::default();
        for section in &sections {
            for e in &section.entries {
                match (section.name.as_str(), e.key.as_str()) {
                    ("done", "completion_offset_variable") => completion_variable = Some(e.parse_ident()?),
                    ("done", "timestep_limit") => s.done.timestep_limit = e.parse_u32()?,
                    ("done", "life_lost") => s.done.life_lost = e.parse_bool()?,
                    ("reward", "offset_variable") => offset_variable = Some(e.parse_ident()?),
                    ("reward", "total_at_completion") => s.reward.total_at_completion = e.parse_f64()?,
                    ("reward", "completion_bonus_max") => s.reward.completion_bonus_max = e.parse_f64()?,
                    ("reward", "bonus_zero_at") => s.reward.bonus_zero_at = e.parse_u32()?,
                    ("done" | "reward", key) => {
                        return Err(Error::Syntax {
                            line: e.line,
                            column: e.key_column,
                            message: format!("unknown key {key} in [{}]", section.name),
                        })
                    }
                    (other, _) => {
                        return Err(Error::Syntax {
                            line: section.line,
                            column: 2,
                            message: format!("unknown section [{other}]"),
                        })
                    }
                }
            }
            if !matches!(section.name.as_str(), "done" | "reward") {
                return Err(Error::Syntax {
                    line: section.line,
                    column: 2,
                    message: format!("unknown section [{}]", section.name),
                });
            }
        }
        let offset_variable = offset_variable.ok_or_else(|| Error::config("[reward] offset_variable is required"))?;
        s.done.completion_offset_variable = completion_variable.unwrap_or_else(|| offset_variable.clone());
        s.reward.offset_variable = offset_variable;
        s.validate(data)?;
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let d = &self.done;
        let r = &self.reward;
        let _ = writeln!(out, "[done]");
        let _ = writeln!(out, "completion_offset_variable = {}", d.completion_offset_variable);
        let _ = writeln!(out, "timestep_limit = {}", d.timestep_limit);
        let _ = writeln!(out, "life_lost = {}", d.life_lost);
        let _ = writeln!(out);
        let _ = writeln!(out, "[reward]");
        let _ = writeln!(out, "offset_variable = {}", r.offset_variable);
        let _ = writeln!(out, "total_at_completion = {:?}", r.total_at_completion);
        let _ = writeln!(out, "completion_bonus_max = {:?}", r.completion_bonus_max);
        let _ = writeln!(out, "bonus_zero_at = {}", r.bonus_zero_at);
        out
    }
}
