//! Estimate bookkeeping shared by the Monte Carlo modules: compensated
//! accumulation, empirical CDFs and Kolmogorov-Smirnov distances.

use serde::Serialize;

use crate::error::{Error, Result};

/// Neumaier-compensated sum; order-stable to the last bit for our sizes.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::invalid("estimate needs at least 2 replicas"));
        }
        let mean = compensated_sum(samples) / n as f64;
        let sq: Vec<f64> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = compensated_sum(&sq) / (n as f64 - 1.0);
        Ok(McEstimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            replicas: n as u64,
            seed,
        })
    }
}

/// Empirical CDF over a finite sample.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("sample contains NaN"));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample at or below x.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.sorted.partition_point(|&v| v <= x);
        idx as f64 / self.sorted.len() as f64
    }

    /// One-sample Kolmogorov-Smirnov distance against a reference CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut worst = 0.0f64;
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            worst = worst.max(((i + 1) as f64 / n - f).abs());
            worst = worst.max((i as f64 / n - f).abs());
        }
        worst
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut worst = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / n - j as f64 / m).abs());
    }
    worst
}

/// Critical value of the two-sample statistic at significance `alpha`.
pub fn ks_two_sample_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Dvoretzky-Kiefer-Wolfowitz band half-width at the given confidence.
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_mean_and_stderr() {
        let e = McEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 9).unwrap();
        assert!((e.mean - 2.5).abs() < 1e-15);
        // sd = sqrt(5/3), stderr = sd/2
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(e.replicas, 4);
        assert!(McEstimate::from_samples(&[1.0], 0).is_err());
    }

    #[test]
    fn ks_against_known_cdf() {
        let cdf = EmpiricalCdf::from_samples(vec![0.25, 0.5, 0.75]).unwrap();
        // uniform CDF on [0,1]: distances are 1/12 at the ends, exact at mid
        let d = cdf.ks_distance(|x| x.clamp(0.0, 1.0));
        assert!((d - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn two_sample_ks_degenerate_and_disjoint() {
        let a = EmpiricalCdf::from_samples(vec![0.0; 8]).unwrap();
        let b = EmpiricalCdf::from_samples(vec![0.0; 4]).unwrap();
        assert_eq!(ks_two_sample(&a, &b), 0.0);
        let c = EmpiricalCdf::from_samples(vec![1.0, 2.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &c), 1.0);
    }

    #[test]
    fn dkw_band_reference_value() {
        // ln(200)/2e4, sqrt
        let eps = dkw_epsilon(10_000, 0.99);
        assert!((eps - 0.016277).abs() < 1e-6);
    }
}
