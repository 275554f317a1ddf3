//! Sliding-window correlation kernels, direct and FFT-backed.
//!
//! Everything here computes `out[i] = sum_k taps[k] * input[i + k]`, the
//! "valid" part of a correlation. The FFT path is the hot one; the direct
//! path is the reference the spectral path is tested against.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Reference implementation.
pub fn correlate_direct(taps: &[f64], input: &[f64], n_out: usize) -> Vec<f64> {
    assert!(input.len() >= n_out + taps.len() - 1, "input too short");
    let mut out = vec![0.0; n_out];
    for (i, slot) in out.iter_mut().enumerate() {
        let window = &input[i..i + taps.len()];
        let mut acc = 0.0;
        for (t, v) in taps.iter().zip(window) {
            acc += t * v;
        }
        *slot = acc;
    }
    out
}

/// FFT correlation plan for a fixed tap vector and output length.
pub struct FftCorrelator {
    taps_len: usize,
    n_out: usize,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex<f64>>,
    buf: Vec<Complex<f64>>,
}

impl FftCorrelator {
    pub fn new(taps: &[f64], n_out: usize) -> Self {
        let taps_len = taps.len();
        let size = (n_out + 2 * (taps_len - 1)).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        // correlation = convolution with the reversed taps
        let mut kernel_hat = vec![Complex::new(0.0, 0.0); size];
        for (k, &t) in taps.iter().rev().enumerate() {
            kernel_hat[k] = Complex::new(t, 0.0);
        }
        fwd.process(&mut kernel_hat);
        FftCorrelator {
            taps_len,
            n_out,
            size,
            fwd,
            inv,
            kernel_hat,
            buf: vec![Complex::new(0.0, 0.0); size],
        }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// `input.len()` must equal `n_out + taps_len - 1`.
    pub fn apply(&mut self, input: &[f64], out: &mut [f64]) {
        assert_eq!(input.len(), self.n_out + self.taps_len - 1);
        assert_eq!(out.len(), self.n_out);
        self.buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (c, &v) in self.buf.iter_mut().zip(input) {
            c.re = v;
        }
        self.fwd.process(&mut self.buf);
        for (c, k) in self.buf.iter_mut().zip(&self.kernel_hat) {
            *c *= k;
        }
        self.inv.process(&mut self.buf);
        let scale = 1.0 / self.size as f64;
        let off = self.taps_len - 1;
        for (slot, c) in out.iter_mut().zip(&self.buf[off..off + self.n_out]) {
            *slot = c.re * scale;
        }
    }
}
