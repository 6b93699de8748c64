use std::sync::Arc;

use super::replay::Transition;
use crate::error::{Error, Result};
use crate::sim::{render, WorldState};

pub const DEFAULT_GAMMA: f64 = 0.99;
/// Observation block size for features: 320x224 shrinks to 20x14.
pub const FEATURE_BLOCK: usize = 16;
/// 20 * 14 gray cells plus a bias.
pub const FEATURE_DIM: usize = 20 * 14 + 1;
/// Identifies the feature layout in checkpoints.
pub const FEATURE_SPEC: &str = "gray20x14+bias/seven_dqn";

/// Downsampled grayscale observation in `[0, 1]` followed by a constant 1.
pub fn features(world: &WorldState) -> Arc<[f64]> {
    let mut f = render(world).downsample_gray(FEATURE_BLOCK);
    f.push(1.0);
    debug_assert_eq!(f.len(), FEATURE_DIM);
    Arc::from(f)
}

/// Q(s, a) = w_a · φ(s): one weight block per action.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearQ {
    pub dim: usize,
    pub actions: usize,
    pub gamma: f64,
}

impl LinearQ {
    pub fn new(dim: usize, actions: usize, gamma: f64) -> Result<Self> {
        if dim == 0 || actions == 0 {
            return Err(Error::config("learner needs positive feature and action counts"));
        }
        Ok(Self { dim, actions, gamma })
    }

    pub fn param_count(&self) -> usize {
        self.dim * self.actions
    }

    fn check(&self, params: &[f64], f: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::config(format!(
                "parameter vector has {} entries, learner expects {}",
                params.len(),
                self.param_count()
            )));
        }
        if f.len() != self.dim {
            return Err(Error::config(format!(
                "feature vector has {} entries, learner expects {}",
                f.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn q(&self, params: &[f64], f: &[f64], action: usize) -> f64 {
        let w = &params[action * self.dim..(action + 1) * self.dim];
        w.iter().zip(f).map(|(a, b)| a * b).sum()
    }

    pub fn q_values(&self, params: &[f64], f: &[f64]) -> Vec<f64> {
        (0..self.actions).map(|a| self.q(params, f, a)).collect()
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, params: &[f64], f: &[f64]) -> usize {
        let qs = self.q_values(params, f);
        let mut best = 0;
        for (a, &q) in qs.iter().enumerate() {
            if q > qs[best] {
                best = a;
            }
        }
        best
    }

    /// Per-transition squared TD errors and the gradient of their mean, with
    /// the bootstrap target held constant.
    pub fn loss_and_grad(&self, params: &[f64], batch: &[&Transition]) -> Result<(Vec<f64>, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::config("empty batch"));
        }
        let mut grad = vec![0.0; self.param_count()];
        let mut losses = Vec::with_capacity(batch.len());
        let n = batch.len() as f64;
        for t in batch {
            self.check(params, &t.features)?;
            self.check(params, &t.next_features)?;
            if t.action >= self.actions {
                return Err(Error::config(format!("action {} out of range", t.action)));
            }
            let bootstrap = if t.done {
                0.0
            } else {
                let qs = self.q_values(params, &t.next_features);
                qs.into_iter().fold(f64::NEG_INFINITY, f64::max)
            };
            let delta = t.reward + self.gamma * bootstrap - self.q(params, &t.features, t.action);
            losses.push(delta * delta);
            let block = &mut grad[t.action * self.dim..(t.action + 1) * self.dim];
            for (g, &x) in block.iter_mut().zip(t.features.iter()) {
                *g += -2.0 * delta * x / n;
            }
        }
        Ok((losses, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(f: &[f64], a: usize, r: f64, nf: &[f64], done: bool) -> Transition {
        Transition {
            features: Arc::from(f.to_vec()),
            action: a,
            reward: r,
            next_features: Arc::from(nf.to_vec()),
            done,
        }
    }

    #[test]
    fn terminal_unit_reward() {
        let q = LinearQ::new(3, 2, 0.99).unwrap();
        let t = tr(&[1.0, 2.0, 3.0], 1, 1.0, &[0.0; 3], true);
        let (l, g) = q.loss_and_grad(&[0.0; 6], &[&t]).unwrap();
        assert_eq!(l, vec![1.0]);
        assert_eq!(g, vec![0.0, 0.0, 0.0, -2.0, -4.0, -6.0]);
    }

    #[test]
    fn zero_everything() {
        let q = LinearQ::new(2, 3, 0.99).unwrap();
        let t = tr(&[0.3, 1.0], 2, 0.0, &[0.5, 1.0], false);
        let (l, g) = q.loss_and_grad(&[0.0; 6], &[&t, &t]).unwrap();
        assert_eq!(l, vec![0.0, 0.0]);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let q = LinearQ::new(2, 3, 0.99).unwrap();
        let t = tr(&[0.3], 0, 0.0, &[0.5], false);
        assert!(q.loss_and_grad(&[0.0; 6], &[&t]).is_err());
        assert!(q.loss_and_grad(&[0.0; 5], &[]).is_err());
    }
}
