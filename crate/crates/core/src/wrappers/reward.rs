use crate::error::{Error, Result};

/// Pays only increases of the episode's best cumulative offset reward.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MaxX {
    max_cumulative: f64,
}

impl MaxX {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.max_cumulative = 0.0;
    }

    pub fn max_cumulative(&self) -> f64 {
        self.max_cumulative
    }

    /// Returns `max(0, cumulative - best)` and raises the best.
    pub fn transform(&mut self, cumulative_raw: f64) -> f64 {
        let gain = (cumulative_raw - self.max_cumulative).max(0.0);
        self.max_cumulative = self.max_cumulative.max(cumulative_raw);
        gain
    }
}

pub fn scale_reward(r: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::config(format!("reward scale must be positive, got {scale}")));
    }
    Ok(r * scale)
}
