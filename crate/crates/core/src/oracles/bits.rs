use alloc::vec;
use alloc::vec::Vec;

/// Fixed-width bit vectors stored row-major, one row per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRows {
    width: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitRows {
    pub fn new(width: usize) -> Self {
        Self { width, stride: width.div_ceil(64), words: Vec::new() }
    }

    pub fn with_capacity(width: usize, rows: usize) -> Self {
        let stride = width.div_ceil(64);
        Self { width, stride, words: Vec::with_capacity(stride * rows) }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.words.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Appends a zeroed row and returns it for filling.
    pub(crate) fn push_zeroed(&mut self) -> &mut [u64] {
        let start = self.words.len();
        self.words.resize(start + self.stride, 0);
        &mut self.words[start..]
    }

    /// Appends a row given as 1-indexed positions of its set bits.
    pub fn push_positions(&mut self, positions: &[usize]) {
        let row = self.push_zeroed();
        for &p in positions {
            row[(p - 1) / 64] |= 1 << ((p - 1) % 64);
        }
    }

    pub fn push_bools(&mut self, bits: &[bool]) {
        assert_eq!(bits.len(), self.width, "row width");
        let row = self.push_zeroed();
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            row[i / 64] |= 1 << (i % 64);
        }
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.words[j * self.stride..(j + 1) * self.stride]
    }

    /// Bit at 1-indexed position `i` of row `j`.
    pub fn get(&self, j: usize, i: usize) -> bool {
        (self.row(j)[(i - 1) / 64] >> ((i - 1) % 64)) & 1 == 1
    }

    pub fn row_bools(&self, j: usize) -> Vec<bool> {
        (1..=self.width).map(|i| self.get(j, i)).collect()
    }

    pub fn row_ones(&self, j: usize) -> usize {
        self.row(j).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of rows with each position set.
    pub fn column_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.width];
        for row in self.words.chunks_exact(self.stride.max(1)) {
            add_set_bits(row, &mut counts, 1);
        }
        counts
    }

    pub fn extend(&mut self, other: &BitRows) {
        assert_eq!(self.width, other.width, "row width");
        self.words.extend_from_slice(&other.words);
    }
}

/// Adds `by` to `acc[i]` for every set bit `i` of `row`.
#[inline]
pub(crate) fn add_set_bits(row: &[u64], acc: &mut [u64], by: u64) {
    for (k, &w) in row.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let t = w.trailing_zeros() as usize;
            acc[k * 64 + t] += by;
            w &= w - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut rows = BitRows::new(70);
        rows.push_positions(&[1, 65, 70]);
        let mut bools = vec![false; 70];
        bools[1] = true;
        rows.push_bools(&bools);
        assert_eq!(rows.len(), 2);
        assert!(rows.get(0, 1) && rows.get(0, 65) && rows.get(0, 70) && !rows.get(0, 2));
        assert_eq!(rows.row_bools(1), bools);
        assert_eq!(rows.row_ones(0), 3);
        let c = rows.column_counts();
        assert_eq!((c[0], c[1], c[64], c[69], c[2]), (1, 1, 1, 1, 0));
    }
}
