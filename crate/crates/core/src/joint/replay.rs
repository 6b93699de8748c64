use std::sync::Arc;

use rand::Rng;

use super::sumtree::SumTree;
use crate::error::{Error, Result};

pub const DEFAULT_CAPACITY: usize = 50_000;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const PRIORITY_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub features: Arc<[f64]>,
    pub action: usize,
    /// Preprocessed and scaled reward.
    pub reward: f64,
    pub next_features: Arc<[f64]>,
    pub done: bool,
}

/// Proportional prioritized replay: item `i` is drawn with probability
/// `p_i^alpha / sum_j p_j^alpha`. New items get the largest priority seen
/// so far; the oldest item is overwritten once full.
#[derive(Clone, Debug)]
pub struct PrioritizedReplay {
    capacity: usize,
    alpha: f64,
    items: Vec<Transition>,
    /// Insertion sequence number of each slot.
    seq: Vec<u64>,
    priorities: Vec<f64>,
    tree: SumTree,
    next: usize,
    pushed: u64,
    max_priority: f64,
}

impl PrioritizedReplay {
    pub fn new(capacity: usize, alpha: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("replay capacity must be at least 1"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config("priority exponent must be non-negative"));
        }
        Ok(Self {
            capacity,
            alpha,
            items: Vec::new(),
            seq: Vec::new(),
            priorities: Vec::new(),
            tree: SumTree::new(capacity),
            next: 0,
            pushed: 0,
            max_priority: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, slot: usize) -> Option<&Transition> {
        self.items.get(slot)
    }

    pub fn priority(&self, slot: usize) -> Option<f64> {
        self.priorities.get(slot).copied()
    }

    /// Insertion number of the item in `slot` (0 for the first push).
    pub fn sequence(&self, slot: usize) -> Option<u64> {
        self.seq.get(slot).copied()
    }

    /// Sampling probability of `slot`.
    pub fn probability(&self, slot: usize) -> f64 {
        self.tree.get(slot) / self.tree.total()
    }

    pub fn push(&mut self, t: Transition) {
        let slot = self.next;
        if slot == self.items.len() {
            self.items.push(t);
            self.seq.push(self.pushed);
            self.priorities.push(self.max_priority);
        } else {
            self.items[slot] = t;
            self.seq[slot] = self.pushed;
            self.priorities[slot] = self.max_priority;
        }
        self.tree
            .set(slot, self.max_priority.powf(self.alpha))
            .expect("max priority is positive");
        self.pushed += 1;
        self.next = (slot + 1) % self.capacity;
    }

    /// Sets a priority directly (no floor applied).
    pub fn set_priority(&mut self, slot: usize, priority: f64) -> Result<()> {
        if slot >= self.items.len() {
            return Err(Error::config(format!("replay slot {slot} is empty")));
        }
        self.tree.set(slot, priority.powf(self.alpha))?;
        self.priorities[slot] = priority;
        if priority > self.max_priority {
            self.max_priority = priority;
        }
        Ok(())
    }

    /// Stores `loss + floor` as the priority of each sampled slot.
    pub fn update_priorities(&mut self, slots: &[usize], losses: &[f64]) -> Result<()> {
        if slots.len() != losses.len() {
            return Err(Error::ShapeMismatch {
                expected: slots.len(),
                found: losses.len(),
            });
        }
        for (&slot, &loss) in slots.iter().zip(losses) {
            self.set_priority(slot, loss + PRIORITY_FLOOR)?;
        }
        Ok(())
    }

    /// `n` slots drawn with replacement in proportion to priority^alpha.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.items.len() < n || n == 0 {
            return Err(Error::NotReady {
                have: self.items.len(),
                need: n.max(1),
            });
        }
        (0..n)
            .map(|_| {
                self.draw(rng)
                    .ok_or_else(|| Error::config("every replay priority is zero"))
            })
            .collect()
    }

    /// One slot drawn in proportion to priority^alpha, `None` when empty or
    /// all priorities are zero.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let mass = rng.gen::<f64>() * self.tree.total();
        self.tree.find(mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chacha;

    fn t(i: usize) -> Transition {
        let f: Arc<[f64]> = Arc::from(vec![i as f64]);
        Transition {
            features: f.clone(),
            action: 0,
            reward: 0.0,
            next_features: f,
            done: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut r = PrioritizedReplay::new(3, 0.5).unwrap();
        for i in 0..5 {
            r.push(t(i));
        }
        assert_eq!(r.len(), 3);
        let mut seqs: Vec<u64> = (0..3).map(|s| r.sequence(s).unwrap()).collect();
        seqs.sort();
        assert_eq!(seqs, vec![2, 3, 4]);
        assert_eq!(r.get(0).unwrap().features[0], 3.0);
    }

    #[test]
    fn zero_priority_is_never_sampled() {
        let mut r = PrioritizedReplay::new(4, 1.0).unwrap();
        for i in 0..4 {
            r.push(t(i));
        }
        r.set_priority(2, 0.0).unwrap();
        let mut rng = chacha(1);
        assert!((0..10_000).all(|_| r.draw(&mut rng) != Some(2)));
    }

    #[test]
    fn not_ready() {
        let mut r = PrioritizedReplay::new(4, 1.0).unwrap();
        r.push(t(0));
        assert!(matches!(
            r.sample(2, &mut chacha(0)),
            Err(Error::NotReady { have: 1, need: 2 })
        ));
    }

    #[test]
    fn new_items_take_the_max_priority() {
        let mut r = PrioritizedReplay::new(4, 1.0).unwrap();
        r.push(t(0));
        r.update_priorities(&[0], &[5.0]).unwrap();
        r.push(t(1));
        assert_eq!(r.priority(1), Some(5.0 + PRIORITY_FLOOR));
    }
}
