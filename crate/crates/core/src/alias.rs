//! Vose alias table for O(1) draws from a fixed discrete distribution.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct AliasTable {
    // Indices with positive weight; zero-weight entries are excluded up
    // front so floating-point leftovers in the table construction can never
    // make them drawable.
    items: Vec<usize>,
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Builds a table from nonnegative weights. Returns `None` when the total
    /// weight is zero (no distribution to sample from).
    pub fn new(weights: &[f64]) -> Option<AliasTable> {
        let items: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        let total: f64 = items.iter().map(|&i| weights[i]).sum();
        if items.is_empty() || total <= 0.0 {
            return None;
        }
        let n = items.len();
        let mut prob: Vec<f64> = items.iter().map(|&i| weights[i] * n as f64 / total).collect();
        let mut alias: Vec<usize> = (0..n).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s] = l;
            prob[l] += prob[s] - 1.0;
            if prob[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers are within rounding of 1.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Some(AliasTable { items, prob, alias })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        let j = if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        };
        self.items[j]
    }
}
