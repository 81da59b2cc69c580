//! Complete binary tree over sampling masses with O(log N) prefix-sum
//! descent.

/// Sum tree with a power-of-two leaf count. Internal nodes hold the sum of
/// their children; leaves hold sampling masses (priorities raised to the
/// prioritization exponent).
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    /// 1-indexed heap layout: root at 1, leaves at `capacity..2*capacity`.
    nodes: Vec<f64>,
}

impl SumTree {
    /// `capacity` is rounded up to the next power of two.
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

    pub fn mass(&self, leaf: usize) -> f64 {
        self.nodes[self.capacity + leaf]
    }

    /// Set the mass of `leaf` and recompute sums on the root path.
    pub fn set_mass(&mut self, leaf: usize, mass: f64) {
        assert!(leaf < self.capacity, "leaf index out of range");
        assert!(mass >= 0.0 && mass.is_finite(), "mass must be finite and >= 0");
        let mut node = self.capacity + leaf;
        self.nodes[node] = mass;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Find the leaf holding the prefix mass `q`: the first leaf whose
    /// cumulative mass exceeds `q`. Callers keep `q` in `[0, total)`; values
    /// at or above the total land on the last positive-mass leaf.
    pub fn descend(&self, q: f64) -> usize {
        let mut q = q;
        let mut node = 1;
        while node < self.capacity {
            let left = 2 * node;
            if q < self.nodes[left] {
                node = left;
            } else {
                q -= self.nodes[left];
                node = left + 1;
            }
        }
        let mut leaf = node - self.capacity;
        // q >= total lands past the mass; back up to a positive-mass leaf.
        while self.nodes[self.capacity + leaf] <= 0.0 && leaf > 0 {
            leaf -= 1;
        }
        leaf
    }

    /// Check the parent = left + right invariant everywhere.
    pub fn is_consistent(&self, rel_tol: f64) -> bool {
        for node in 1..self.capacity {
            let sum = self.nodes[2 * node] + self.nodes[2 * node + 1];
            let diff = (self.nodes[node] - sum).abs();
            if diff > rel_tol * self.nodes[node].abs().max(1.0) {
                return false;
            }
        }
        true
    }
}
