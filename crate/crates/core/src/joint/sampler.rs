use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::chacha;

/// Uniform i.i.d. choice of the next training level.
#[derive(Clone, Debug)]
pub struct LevelSampler {
    levels: Vec<String>,
    rng: ChaCha8Rng,
}

impl LevelSampler {
    pub fn new(levels: Vec<String>, seed: u64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::config("training set is empty"));
        }
        Ok(Self {
            levels,
            rng: chacha(seed),
        })
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn next_level(&mut self) -> &str {
        let i = self.rng.gen_range(0..self.levels.len());
        &self.levels[i]
    }
}
