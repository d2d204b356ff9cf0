#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::{BinSpec, Error, PrivacyBudget, Result};

/// Default aggregation resolution for Square Wave.
pub const DEFAULT_SW_BINS: usize = 512;

/// Square Wave randomizer constants and its output grid.
///
/// An input `x` is reported from density `p` on `[x-b, x+b]` and `q`
/// elsewhere on `[-b, 1+b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwParams {
    epsilon: PrivacyBudget,
    b: f64,
    p: f64,
    q: f64,
    bins: BinSpec,
}

impl SwParams {
    pub fn new(epsilon: PrivacyBudget, bins: BinSpec) -> Self {
        let eps = epsilon.value();
        let e = epsilon.exp();
        let b = (eps * e - e + 1.0) / (2.0 * e * (e - 1.0 - eps));
        let d = 2.0 * b * e + 1.0;
        Self { epsilon, b, p: e / d, q: 1.0 / d, bins }
    }

    pub fn with_default_bins(epsilon: PrivacyBudget) -> Self {
        Self::new(epsilon, BinSpec::new(DEFAULT_SW_BINS).expect("512 bins"))
    }

    pub fn epsilon(&self) -> PrivacyBudget {
        self.epsilon
    }

    /// Half-width of the high-probability band.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Aggregation grid over the input domain (`m_s` bins).
    pub fn bins(&self) -> BinSpec {
        self.bins
    }

    /// Number of output cells `⌈(1+2b)·m_s⌉`.
    pub fn output_cells(&self) -> usize {
        ((1.0 + 2.0 * self.b) * self.bins.len() as f64).ceil() as usize
    }

    pub fn cell_width(&self) -> f64 {
        self.bins.width()
    }

    /// Lower edge of 0-indexed output cell `j`.
    pub fn cell_start(&self, j: usize) -> f64 {
        -self.b + j as f64 * self.cell_width()
    }

    /// Upper edge of 0-indexed output cell `j`; the last cell ends at `1 + b`.
    pub fn cell_end(&self, j: usize) -> f64 {
        if j + 1 == self.output_cells() {
            1.0 + self.b
        } else {
            self.cell_start(j + 1)
        }
    }

    pub fn in_output_domain(&self, v: f64) -> bool {
        v >= -self.b && v <= 1.0 + self.b
    }

    /// 0-indexed output cell of report `v`.
    pub fn cell_of(&self, v: f64) -> Result<usize> {
        if !self.in_output_domain(v) {
            return Err(Error::InvalidReport("SW report outside [-b, 1+b]"));
        }
        let j = ((v + self.b) * self.bins.len() as f64) as usize;
        Ok(j.min(self.output_cells() - 1))
    }

    /// Output density at `v` for input `x`.
    pub fn density(&self, x: f64, v: f64) -> f64 {
        if !self.in_output_domain(v) {
            0.0
        } else if (v - x).abs() <= self.b {
            self.p
        } else {
            self.q
        }
    }

    /// Largest density ratio between two inputs, scanning the given grid of
    /// inputs and outputs.
    pub fn max_output_ratio(&self, grid: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..=grid {
            let v = -self.b + (1.0 + 2.0 * self.b) * k as f64 / grid as f64;
            let mut hi: f64 = 0.0;
            let mut lo = f64::INFINITY;
            for t in 0..=grid {
                let d = self.density(t as f64 / grid as f64, v);
                hi = hi.max(d);
                lo = lo.min(d);
            }
            worst = worst.max(hi / lo);
        }
        worst
    }

    pub fn perturb<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        if rng.random_bool(2.0 * self.b * self.p) {
            x - self.b + 2.0 * self.b * rng.random::<f64>()
        } else {
            // Low region [-b, x-b) ∪ (x+b, 1+b] has total length 1.
            let u: f64 = rng.random();
            if u < x {
                u - self.b
            } else {
                u + self.b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    fn params(eps: f64) -> SwParams {
        SwParams::with_default_bins(PrivacyBudget::new(eps).unwrap())
    }

    #[test]
    fn closed_forms() {
        let s = params(1.0);
        assert!((s.b() - 0.2561).abs() < 1e-4, "{}", s.b());
        assert!((s.p() - 1.1362).abs() < 2e-4, "{}", s.p());
        assert!((s.q() - 0.4180).abs() < 1e-4, "{}", s.q());
        for eps in [0.05, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let s = params(eps);
            assert!((2.0 * s.b() * s.p() + s.q() - 1.0).abs() < 1e-9);
            assert!((s.p() / s.q() - eps.exp()).abs() < 1e-9 * eps.exp());
            assert!(s.b() > 0.0);
        }
    }

    #[test]
    fn output_grid() {
        let s = params(1.0);
        let cells = s.output_cells();
        assert_eq!(cells, ((1.0 + 2.0 * s.b()) * 512.0).ceil() as usize);
        assert!(s.cell_end(cells - 1) - s.cell_start(cells - 1) <= s.cell_width() + 1e-12);
        assert_eq!(s.cell_of(-s.b()).unwrap(), 0);
        assert_eq!(s.cell_of(1.0 + s.b()).unwrap(), cells - 1);
        assert!(s.cell_of(1.0 + s.b() + 1e-9).is_err());
    }

    #[test]
    fn band_mass_and_support() {
        let s = params(1.0);
        let mut rng = RngStream::new(1);
        let n = 100_000;
        let mut inside = 0;
        for _ in 0..n {
            let v = s.perturb(0.5, &mut rng);
            assert!(s.in_output_domain(v));
            inside += ((v - 0.5).abs() <= s.b()) as usize;
        }
        let rate = inside as f64 / n as f64;
        assert!((rate - 0.582).abs() < 0.01, "{rate}");
        assert!((2.0 * s.b() * s.p() - 0.582).abs() < 1e-3);
    }

    #[test]
    fn band_at_left_edge() {
        let s = params(2.0);
        assert_eq!(s.density(0.0, -s.b()), s.p());
        assert_eq!(s.density(0.0, s.b()), s.p());
        assert_eq!(s.density(0.0, s.b() + 1e-6), s.q());
        assert_eq!(s.density(0.0, 1.0 + s.b() + 1e-6), 0.0);
    }

    #[test]
    fn ldp_ratio() {
        for eps in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let r = params(eps).max_output_ratio(200);
            assert!(r <= eps.exp() * (1.0 + 1e-12));
            assert!((r - eps.exp()).abs() < 1e-9);
        }
    }
}
