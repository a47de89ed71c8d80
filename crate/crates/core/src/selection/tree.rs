/// Segment tree over `d` nonnegative scores.
///
/// Every internal node caches the sum of its subtree and the maximum with
/// the lowest leaf index attaining it, so point updates, `sum`, `argmax`
/// and proportional sampling all cost `O(log d)`.
#[derive(Debug, Clone)]
pub struct ScoreTree {
    len: usize,
    size: usize,
    sum: Vec<f64>,
    max: Vec<f64>,
    arg: Vec<usize>,
}

impl ScoreTree {
    pub fn new(len: usize) -> Self {
        let size = len.max(1).next_power_of_two();
        let mut tree = Self {
            len,
            size,
            sum: vec![0.0; 2 * size],
            max: vec![f64::NEG_INFINITY; 2 * size],
            arg: vec![usize::MAX; 2 * size],
        };
        for i in 0..len {
            tree.max[size + i] = 0.0;
            tree.arg[size + i] = i;
        }
        for node in (1..size).rev() {
            tree.pull(node);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.sum[self.size + i]
    }

    fn pull(&mut self, node: usize) {
        let (l, r) = (2 * node, 2 * node + 1);
        self.sum[node] = self.sum[l] + self.sum[r];
        // left wins ties: it holds the lower indices
        if self.max[l] >= self.max[r] {
            self.max[node] = self.max[l];
            self.arg[node] = self.arg[l];
        } else {
            self.max[node] = self.max[r];
            self.arg[node] = self.arg[r];
        }
    }

    /// Sets leaf `i`; `score` must be finite and nonnegative.
    pub fn set(&mut self, i: usize, score: f64) {
        assert!(i < self.len, "leaf {i} out of range");
        debug_assert!(score >= 0.0 && score.is_finite(), "bad score {score}");
        let mut node = self.size + i;
        self.sum[node] = score;
        self.max[node] = score;
        node /= 2;
        while node >= 1 {
            self.pull(node);
            node /= 2;
        }
    }

    /// Overwrites every leaf and rebuilds the aggregates in `O(d)`.
    pub fn rebuild(&mut self, scores: &[f64]) {
        assert_eq!(scores.len(), self.len);
        for (i, &s) in scores.iter().enumerate() {
            self.sum[self.size + i] = s;
            self.max[self.size + i] = s;
        }
        for node in (1..self.size).rev() {
            self.pull(node);
        }
    }

    pub fn sum(&self) -> f64 {
        self.sum[1]
    }

    pub fn max(&self) -> f64 {
        self.max[1]
    }

    /// Index of the largest score, lowest index on ties.
    pub fn argmax(&self) -> usize {
        self.arg[1]
    }

    /// Leaf `i` with probability `score_i / sum`, driven by `u` in `[0, 1)`.
    /// Only leaves with positive score can be returned; `None` if all are zero.
    pub fn sample(&self, u: f64) -> Option<usize> {
        if self.sum() <= 0.0 {
            return None;
        }
        let mut target = u * self.sum();
        let mut node = 1;
        while node < self.size {
            let (l, r) = (2 * node, 2 * node + 1);
            node = if self.sum[r] <= 0.0 || (target < self.sum[l] && self.sum[l] > 0.0) {
                l
            } else {
                target -= self.sum[l];
                r
            };
        }
        Some(node - self.size)
    }
}
