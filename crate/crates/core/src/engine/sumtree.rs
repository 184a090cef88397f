/// Complete binary tree of partial sums over non-negative weights.
///
/// Every internal node is recomputed as the sum of its two children rather
/// than adjusted by deltas, so the stored sums never drift from the leaves.
#[derive(Debug, Clone)]
pub struct SumTree {
    len: usize,
    base: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(len: usize) -> Self {
        let base = len.max(1).next_power_of_two();
        Self { len, base, nodes: vec![0.0; 2 * base] }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        let mut tree = Self::new(weights.len());
        tree.nodes[tree.base..tree.base + weights.len()].copy_from_slice(weights);
        tree.rebuild();
        tree
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.nodes[self.base + i]
    }

    /// Sets one weight and refreshes its ancestors, `O(log n)`.
    pub fn set(&mut self, i: usize, w: f64) {
        debug_assert!(i < self.len && w >= 0.0);
        let mut k = self.base + i;
        self.nodes[k] = w;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Sets one weight without touching ancestors; call [`SumTree::rebuild`]
    /// before the next query.
    #[inline]
    pub fn set_deferred(&mut self, i: usize, w: f64) {
        debug_assert!(i < self.len && w >= 0.0);
        self.nodes[self.base + i] = w;
    }

    /// Recomputes all internal nodes from the leaves, `O(n)`.
    pub fn rebuild(&mut self) {
        for k in (1..self.base).rev() {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Index `i` such that the prefix sum before `i` is `<= u` and the prefix
    /// through `i` exceeds it. `u` must lie in `[0, total)`; a zero-weight
    /// leaf is never returned while `total > 0`.
    pub fn sample(&self, mut u: f64) -> usize {
        debug_assert!(self.total() > 0.0);
        let mut k = 1;
        while k < self.base {
            let left = self.nodes[2 * k];
            if (u < left && left > 0.0) || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        k - self.base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sums_and_search() {
        let mut t = SumTree::new(8);
        for i in 0..8 {
            t.set(i, i as f64);
        }
        assert_eq!(t.total(), 28.0);
        assert_eq!(t.sample(0.0), 1);
        assert_eq!(t.sample(3.5), 3);
        assert_eq!(t.sample(18.0), 6);
        assert_eq!(t.sample(27.999), 7);
    }

    #[test]
    fn non_power_of_two_and_deferred() {
        let mut t = SumTree::from_weights(&[1.0, 0.0, 2.0]);
        assert_eq!(t.total(), 3.0);
        assert_eq!(t.sample(1.0), 2);
        t.set_deferred(1, 5.0);
        t.set_deferred(0, 0.0);
        t.rebuild();
        assert_eq!(t.total(), 7.0);
        assert_eq!(t.sample(0.0), 1);
        assert_eq!(t.sample(6.5), 2);
    }

    #[test]
    fn zero_weights_never_sampled_at_boundaries() {
        let t = SumTree::from_weights(&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(t.sample(0.0), 1);
        assert_eq!(t.sample(1.0), 4);
        assert_eq!(t.sample(1.9999999), 4);
        // out-of-range u from rounding still lands on a positive leaf
        assert_eq!(t.sample(2.0), 4);
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            weights in proptest::collection::vec(0.0f64..10.0, 1..40),
            frac in 0.0f64..1.0,
        ) {
            let t = SumTree::from_weights(&weights);
            let total: f64 = weights.iter().sum();
            prop_assert!((t.total() - total).abs() <= 1e-9 * total.max(1.0));
            if t.total() > 0.0 {
                let u = frac * t.total();
                let i = t.sample(u);
                prop_assert!(weights[i] > 0.0);
                let before: f64 = weights[..i].iter().sum();
                prop_assert!(before <= u + 1e-9 && u < before + weights[i] + 1e-9);
            }
        }
    }
}
