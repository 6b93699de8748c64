use crate::error::{Error, Result};

/// Binary sum tree over a fixed number of non-negative weights, supporting
/// O(log n) updates and prefix-sum lookups.
#[derive(Clone, Debug)]
pub struct SumTree {
    capacity: usize,
    /// Heap layout: node 1 is the root, leaves start at `capacity`.
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1).next_power_of_two();
        Self {
            capacity,
            nodes: vec![0.0; 2 * capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.nodes[self.capacity + index]
    }

    pub fn set(&mut self, index: usize, weight: f64) -> Result<()> {
        if index >= self.capacity {
            return Err(Error::config(format!("sum tree index {index} out of range")));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::config(format!(
                "sum tree weight {weight} must be finite and non-negative"
            )));
        }
        let mut node = self.capacity + index;
        self.nodes[node] = weight;
        // Parents are recomputed from both children rather than adjusted by
        // a delta, so rounding error cannot accumulate.
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
        Ok(())
    }

    /// Leaf whose cumulative weight interval contains `mass`, for `mass` in
    /// `[0, total)`. Never returns a zero-weight leaf while any leaf has
    /// positive weight.
    pub fn find(&self, mut mass: f64) -> Option<usize> {
        if self.total() <= 0.0 {
            return None;
        }
        let mut node = 1;
        while node < self.capacity {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            if (mass < left && left > 0.0) || right <= 0.0 {
                node *= 2;
            } else {
                mass -= left;
                node = 2 * node + 1;
            }
        }
        Some(node - self.capacity)
    }
}
