//! Truncated, renormalized Gaussian quadrature weights for the step kernel.

use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_SIGMAS: f64 = 8.0;

/// Symmetric weights w_j proportional to exp(-(j dx)^2 / 2) for
/// |j dx| <= radius_sigmas, renormalized to unit sum so constants are fixed
/// points of the step.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dx: f64,
    radius_sigmas: f64,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn gaussian(dx: f64, radius_sigmas: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::invalid(format!("kernel spacing must be positive, got {dx}")));
        }
        if !(radius_sigmas > 0.0) {
            return Err(Error::invalid(format!(
                "truncation radius must be positive, got {radius_sigmas}"
            )));
        }
        let half = (radius_sigmas / dx).ceil() as usize;
        let mut weights = vec![0.0; 2 * half + 1];
        for j in 0..=half {
            let y = j as f64 * dx;
            let w = (-0.5 * y * y).exp();
            weights[half + j] = w;
            weights[half - j] = w;
        }
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        // nudge the center weight so the sum is 1 to the last bit
        let resum: f64 = weights.iter().sum();
        weights[half] += 1.0 - resum;
        Ok(Kernel {
            dx,
            radius_sigmas,
            weights,
        })
    }

    pub fn with_default_radius(dx: f64) -> Result<Self> {
        Self::gaussian(dx, DEFAULT_RADIUS_SIGMAS)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn radius_sigmas(&self) -> f64 {
        self.radius_sigmas
    }
    /// Number of cells on each side of the center tap.
    pub fn half_width(&self) -> usize {
        (self.weights.len() - 1) / 2
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at signed offset j (zero outside the truncation radius).
    pub fn weight(&self, j: i64) -> f64 {
        let half = self.half_width() as i64;
        if j.abs() > half {
            0.0
        } else {
            self.weights[(j + half) as usize]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_symmetric_positive_unit_sum() {
        let k = Kernel::gaussian(0.01, 8.0).unwrap();
        assert_eq!(k.half_width(), 800);
        let w = k.weights();
        assert!(w.iter().all(|&v| v > 0.0));
        for j in 0..w.len() {
            assert_eq!(w[j], w[w.len() - 1 - j]);
        }
        let sum: f64 = w.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Kernel::gaussian(0.0, 8.0).is_err());
        assert!(Kernel::gaussian(0.01, 0.0).is_err());
    }
}
