use std::sync::{Arc, Condvar, Mutex};

use crate::error::{Error, Result};

#[derive(Debug)]
struct State {
    contributions: Vec<Option<Vec<f64>>>,
    arrived: usize,
    generation: u64,
    result: Arc<Vec<f64>>,
    aborted: Option<String>,
}

/// In-process all-reduce over a fixed set of ranks. Every call is a
/// barrier; the result is the pairwise sum in rank order divided by the group size,
/// so all ranks receive the same bits.
#[derive(Debug)]
pub struct AllReduceGroup {
    size: usize,
    dim: usize,
    state: Mutex<State>,
    cv: Condvar,
}

impl AllReduceGroup {
    pub fn new(size: usize, dim: usize) -> Result<Arc<Self>> {
        if size == 0 {
            return Err(Error::config("all-reduce group needs at least one rank"));
        }
        Ok(Arc::new(Self {
            size,
            dim,
            state: Mutex::new(State {
                contributions: vec![None; size],
                arrived: 0,
                generation: 0,
                result: Arc::new(Vec::new()),
                aborted: None,
            }),
            cv: Condvar::new(),
        }))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Marks the group failed; current and future reductions return
    /// [`Error::Aborted`].
    pub fn abort(&self, reason: &str) {
        let mut s = self.state.lock().expect("all-reduce lock");
        if s.aborted.is_none() {
            s.aborted = Some(reason.to_string());
        }
        self.cv.notify_all();
    }

    pub fn all_reduce_mean(&self, rank: usize, grad: &[f64]) -> Result<Vec<f64>> {
        if rank >= self.size {
            return Err(Error::config(format!("rank {rank} outside group of {}", self.size)));
        }
        let mut s = self.state.lock().expect("all-reduce lock");
        if let Some(reason) = &s.aborted {
            return Err(Error::Aborted(reason.clone()));
        }
        if grad.len() != self.dim {
            let reason = format!("rank {rank} sent {} values, expected {}", grad.len(), self.dim);
            s.aborted = Some(reason);
            self.cv.notify_all();
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                found: grad.len(),
            });
        }
        if s.contributions[rank].is_some() {
            return Err(Error::Protocol(format!("rank {rank} joined the same reduction twice")));
        }
        s.contributions[rank] = Some(grad.to_vec());
        s.arrived += 1;
        let generation = s.generation;
        if s.arrived == self.size {
            let parts: Vec<Vec<f64>> = s
                .contributions
                .iter_mut()
                .map(|c| c.take().expect("every rank contributed"))
                .collect();
            let mut sum = pairwise_sum(parts);
            let w = self.size as f64;
            sum.iter_mut().for_each(|x| *x /= w);
            s.result = Arc::new(sum);
            s.arrived = 0;
            s.generation += 1;
            self.cv.notify_all();
            return Ok(s.result.as_ref().clone());
        }
        while s.generation == generation && s.aborted.is_none() {
            s = self.cv.wait(s).expect("all-reduce lock");
        }
        if s.generation == generation {
            return Err(Error::Aborted(s.aborted.clone().unwrap_or_default()));
        }
        Ok(s.result.as_ref().clone())
    }
}

/// Sums vectors by combining neighbours level by level. The order depends
/// only on rank, and identical inputs from a power-of-two group sum exactly.
fn pairwise_sum(mut parts: Vec<Vec<f64>>) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposite_gradients_cancel() {
        let g = AllReduceGroup::new(2, 3).unwrap();
        let out = std::thread::scope(|s| {
            let a = s.spawn(|| g.all_reduce_mean(0, &[1.0, -2.0, 3.5]).unwrap());
            let b = s.spawn(|| g.all_reduce_mean(1, &[-1.0, 2.0, -3.5]).unwrap());
            (a.join().unwrap(), b.join().unwrap())
        });
        assert_eq!(out.0, vec![0.0; 3]);
        assert_eq!(out.0, out.1);
    }

    #[test]
    fn shape_mismatch_aborts_everyone() {
        let g = AllReduceGroup::new(2, 3).unwrap();
        let (a, b) = std::thread::scope(|s| {
            let a = s.spawn(|| g.all_reduce_mean(0, &[1.0, 2.0, 3.0]));
            let b = s.spawn(|| g.all_reduce_mean(1, &[1.0]));
            (a.join().unwrap(), b.join().unwrap())
        });
        assert!(matches!(b, Err(Error::ShapeMismatch { expected: 3, found: 1 })));
        // Rank 0 either saw the abort while waiting or arrived after it.
        assert!(matches!(a, Err(Error::Aborted(_))));
        assert!(g.all_reduce_mean(0, &[0.0; 3]).is_err());
    }
}
