//! Streaming moments and the estimate type.

use serde::{Deserialize, Serialize};

/// Mean with a normal-approximation 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: u64,
    pub ci95: (f64, f64),
}

impl SimEstimate {
    pub fn new(mean: f64, std_error: f64, n_effective: u64) -> Self {
        let h = 1.959_963_984_540_054 * std_error;
        Self {
            mean,
            std_error,
            n_effective,
            ci95: (mean - h, mean + h),
        }
    }

    /// `(mean − target)/std_error`; zero when both the error and the
    /// difference vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Welford accumulator with Chan's merge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> SimEstimate {
        SimEstimate::new(self.mean, (self.variance() / self.n as f64).sqrt(), self.n)
    }
}

/// Batch-means estimate from equal-sized batch averages.
pub fn batch_means(batches: &[f64]) -> SimEstimate {
    let mut m = Moments::default();
    for &b in batches {
        m.push(b);
    }
    m.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut parts = Moments::default();
        for chunk in xs.chunks(77) {
            let mut c = Moments::default();
            chunk.iter().for_each(|&x| c.push(x));
            parts.merge(&c);
        }
        assert_eq!(all.n, parts.n);
        assert!((all.mean - parts.mean).abs() < 1e-12);
        assert!((all.variance() - parts.variance()).abs() < 1e-10);
    }

    #[test]
    fn estimate_interval() {
        let e = SimEstimate::new(0.5, 0.01, 100);
        assert!(e.ci95.0 < 0.5 && e.ci95.1 > 0.5);
        assert_eq!(e.z_score(0.5), 0.0);
        assert!((e.z_score(0.48) - 2.0).abs() < 1e-12);
    }
}
