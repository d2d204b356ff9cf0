use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::SwParams;

/// `M[j][i] = Pr[report in output cell j | input at the center of bin i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Integrates the SW density over every output cell for every input bin center.
pub fn build_transition(params: &SwParams) -> TransitionMatrix {
    let rows = params.output_cells();
    let cols = params.bins().len();
    let (b, p, q) = (params.b(), params.p(), params.q());
    let mut data = vec![0.0; rows * cols];
    for j in 0..rows {
        let (lo, hi) = (params.cell_start(j), params.cell_end(j));
        for i in 0..cols {
            let c = params.bins().center(i + 1);
            data[j * cols + i] = q * (hi - lo) + (p - q) * overlap(lo, hi, c - b, c + b);
        }
    }
    TransitionMatrix { rows, cols, data }
}

impl TransitionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.data[j * self.cols + i]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, &w) in self.data.chunks_exact(self.cols).zip(r) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * w;
            }
        }
        out
    }
}

/// The same channel as [`TransitionMatrix`] applied in linear time.
///
/// Measured from `-b`, the band of input bin `i` starts half a cell into
/// output cell `i`, so the band overlap with cell `j` depends only on
/// `d = j - i`: a partial first cell, whole cells, then a partial last cell.
#[derive(Debug, Clone)]
pub(crate) struct Channel {
    inputs: usize,
    outputs: usize,
    q: f64,
    band: f64,
    first: f64,
    last: f64,
    reach: usize,
    lens: Vec<f64>,
}

impl Channel {
    pub fn new(params: &SwParams) -> Self {
        let inputs = params.bins().len();
        let outputs = params.output_cells();
        let w = 2.0 * params.b() * inputs as f64;
        let end = 0.5 + w;
        let reach = end.ceil() as usize - 1;
        let first = end.min(1.0) - 0.5;
        let last = if reach == 0 { 0.0 } else { end - reach as f64 };
        let lens = (0..outputs).map(|j| params.cell_end(j) - params.cell_start(j)).collect();
        Self {
            inputs,
            outputs,
            q: params.q(),
            band: (params.p() - params.q()) * params.cell_width(),
            first,
            last,
            reach,
            lens,
        }
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// `M f`.
    pub fn forward(&self, f: &[f64], out: &mut [f64], prefix: &mut Vec<f64>) {
        let total: f64 = f.iter().sum();
        prefix.clear();
        prefix.push(0.0);
        let mut acc = 0.0;
        for &v in f {
            acc += v;
            prefix.push(acc);
        }
        let n = self.inputs as isize;
        let at = |i: isize| if (0..n).contains(&i) { f[i as usize] } else { 0.0 };
        let cum = |i: isize| prefix[i.clamp(0, n) as usize];
        let d = self.reach as isize;
        for (j, o) in out.iter_mut().enumerate() {
            let j = j as isize;
            let mut s = self.first * at(j);
            if d >= 1 {
                s += cum(j) - cum(j - d + 1) + self.last * at(j - d);
            }
            *o = self.q * self.lens[j as usize] * total + self.band * s;
        }
    }

    /// `Mᵀ r`.
    pub fn adjoint(&self, r: &[f64], out: &mut [f64], prefix: &mut Vec<f64>) {
        prefix.clear();
        prefix.push(0.0);
        let mut acc = 0.0;
        let mut weighted = 0.0;
        for (&v, &len) in r.iter().zip(&self.lens) {
            acc += v;
            weighted += v * len;
            prefix.push(acc);
        }
        let n = self.outputs as isize;
        let at = |j: isize| if (0..n).contains(&j) { r[j as usize] } else { 0.0 };
        let cum = |j: isize| prefix[j.clamp(0, n) as usize];
        let d = self.reach as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let i = i as isize;
            let mut s = self.first * at(i);
            if d >= 1 {
                s += cum(i + d) - cum(i + 1) + self.last * at(i + d);
            }
            *o = self.q * weighted + self.band * s;
        }
    }
}
