//! Sparse-table range-minimum queries over f64 arrays.
//!
//! O(n log n) build, O(1) query, argmin with smallest-index tie-breaking.
//! Queries dominate the metric-engine runtime, which is why a sparse table
//! is used instead of a segment tree.

/// Immutable argmin sparse table over a fixed array of finite f64 values.
pub struct SparseTable {
    values: Vec<f64>,
    // table[level][j] = argmin of values[j .. j + 2^level]
    table: Vec<Vec<u32>>,
}

impl SparseTable {
    pub fn new(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "sparse table over empty array");
        assert!(
            values.iter().all(|v| v.is_finite()),
            "sparse table requires finite values"
        );
        let n = values.len();
        let levels = usize::BITS as usize - (n.leading_zeros() as usize);
        let mut table: Vec<Vec<u32>> = Vec::with_capacity(levels);
        table.push((0..n as u32).collect());
        for k in 1..levels {
            let half = 1usize << (k - 1);
            let len = n - (1usize << k) + 1;
            let prev = &table[k - 1];
            let mut row = Vec::with_capacity(len);
            for j in 0..len {
                let a = prev[j];
                let b = prev[j + half];
                // Strict '<' keeps the smaller index on ties.
                row.push(if values[b as usize] < values[a as usize] { b } else { a });
            }
            table.push(row);
        }
        SparseTable {
            values: values.to_vec(),
            table,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the minimum over the inclusive range `[lo, hi]`; smallest
    /// index on ties.
    pub fn argmin(&self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi && hi < self.values.len(), "argmin range out of bounds");
        let len = hi - lo + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let a = self.table[k][lo];
        let b = self.table[k][hi + 1 - (1usize << k)];
        // On equal values prefer the smaller index.
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if self.values[b as usize] < self.values[a as usize] {
            b as usize
        } else {
            a as usize
        }
    }

    /// Minimum value over the inclusive range `[lo, hi]`.
    pub fn min(&self, lo: usize, hi: usize) -> f64 {
        self.values[self.argmin(lo, hi)]
    }

    /// Global argmin (smallest index on ties).
    pub fn global_argmin(&self) -> usize {
        self.argmin(0, self.values.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use rand_chacha::rand_core::SeedableRng;

    fn scan_argmin(v: &[f64], lo: usize, hi: usize) -> usize {
        let mut best = lo;
        for i in lo..=hi {
            if v[i] < v[best] {
                best = i;
            }
        }
        best
    }

    #[test]
    fn matches_linear_scan_on_all_ranges() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 7, 64, 100] {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let st = SparseTable::new(&v);
            for lo in 0..n {
                for hi in lo..n {
                    assert_eq!(st.argmin(lo, hi), scan_argmin(&v, lo, hi), "n={n} lo={lo} hi={hi}");
                }
            }
        }
    }

    #[test]
    fn ties_break_to_smallest_index() {
        let v = vec![2.0, 1.0, 3.0, 1.0, 1.0];
        let st = SparseTable::new(&v);
        assert_eq!(st.argmin(0, 4), 1);
        assert_eq!(st.argmin(2, 4), 3);
        assert_eq!(st.global_argmin(), 1);
    }

    #[test]
    #[should_panic(expected = "out of bounds")]
    fn rejects_bad_range() {
        let st = SparseTable::new(&[1.0, 2.0]);
        st.argmin(0, 2);
    }
}
