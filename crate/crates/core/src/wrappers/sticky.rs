use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::buttons::Buttons;
use crate::env::{Environment, StepResult, FRAMES_PER_TIMESTEP};
use crate::error::{Error, Result};
use crate::rng::chacha;

pub const DEFAULT_DELAY_PROBABILITY: f64 = 0.25;

/// Sticky frame skip: each timestep holds its action for four frames, except
/// that with some probability the first frame still applies the previous
/// timestep's action.
#[derive(Clone, Debug)]
pub struct StickySkip {
    rng: ChaCha8Rng,
    previous: Buttons,
    delay_probability: f64,
}

impl StickySkip {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: chacha(seed),
            previous: Buttons::NONE,
            delay_probability: DEFAULT_DELAY_PROBABILITY,
        }
    }

    pub fn with_probability(seed: u64, delay_probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delay_probability) {
            return Err(Error::config(format!(
                "delay probability {delay_probability} outside [0, 1]"
            )));
        }
        Ok(Self {
            delay_probability,
            ..Self::new(seed)
        })
    }

    pub fn delay_probability(&self) -> f64 {
        self.delay_probability
    }

    pub fn previous(&self) -> Buttons {
        self.previous
    }

    /// Forgets the held action. The random stream carries on.
    pub fn reset_episode(&mut self) {
        self.previous = Buttons::NONE;
    }

    /// Draws this timestep's delay and returns the per-frame schedule.
    pub fn schedule(&mut self, action: Buttons) -> ([Buttons; FRAMES_PER_TIMESTEP], bool) {
        let delayed = self.rng.gen_bool(self.delay_probability);
        let mut frames = [action; FRAMES_PER_TIMESTEP];
        if delayed {
            frames[0] = self.previous;
        }
        self.previous = action;
        (frames, delayed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StickyStep {
    pub result: StepResult,
    pub delayed: bool,
    pub schedule: [Buttons; FRAMES_PER_TIMESTEP],
}

/// An environment driven through sticky frame skip. With `skip` set to
/// `None` every frame of a timestep applies the chosen action.
#[derive(Clone, Debug)]
pub struct StickyEnv {
    env: Environment,
    skip: Option<StickySkip>,
    recording: Option<Vec<Buttons>>,
}

impl StickyEnv {
    pub fn new(env: Environment, sticky_seed: u64) -> Self {
        Self::with_skip(env, Some(StickySkip::new(sticky_seed)))
    }

    pub fn with_skip(env: Environment, skip: Option<StickySkip>) -> Self {
        Self {
            env,
            skip,
            recording: None,
        }
    }

    /// Starts logging every accepted action.
    pub fn start_recording(&mut self) {
        self.recording = Some(Vec::new());
    }

    pub fn take_recording(&mut self) -> Vec<Buttons> {
        self.recording.take().unwrap_or_default()
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut Environment {
        &mut self.env
    }

    pub fn skip(&self) -> Option<&StickySkip> {
        self.skip.as_ref()
    }

    pub fn into_inner(self) -> Environment {
        self.env
    }

    pub fn reset(&mut self) -> Result<()> {
        self.env.reset()?;
        if let Some(skip) = &mut self.skip {
            skip.reset_episode();
        }
        Ok(())
    }

    pub fn step(&mut self, action: Buttons) -> Result<StickyStep> {
        if self.env.is_done() {
            // Let the environment produce the protocol error without
            // consuming a draw.
            return Err(self.env.step(action).expect_err("done environment rejects steps"));
        }
        let (schedule, delayed) = match &mut self.skip {
            Some(skip) => skip.schedule(action),
            None => ([action; FRAMES_PER_TIMESTEP], false),
        };
        let result = self.env.step_frames(schedule)?;
        if let Some(log) = &mut self.recording {
            log.push(action);
        }
        Ok(StickyStep {
            result,
            delayed,
            schedule,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buttons::Button;

    #[test]
    fn delayed_block_starts_with_previous_action() {
        let mut s = StickySkip::with_probability(0, 1.0).unwrap();
        let a1 = Buttons::NONE.with(Button::Right);
        let a2 = Buttons::NONE.with(Button::B);
        assert_eq!(s.schedule(a1), ([Buttons::NONE, a1, a1, a1], true));
        assert_eq!(s.schedule(a2), ([a1, a2, a2, a2], true));
        s.reset_episode();
        assert_eq!(s.schedule(a2).0[0], Buttons::NONE);
    }

    #[test]
    fn zero_probability_never_delays() {
        let mut s = StickySkip::with_probability(0, 0.0).unwrap();
        let a = Buttons::NONE.with(Button::Left);
        for _ in 0..100 {
            assert_eq!(s.schedule(a), ([a; 4], false));
        }
        assert!(StickySkip::with_probability(0, 1.5).is_err());
    }
}
