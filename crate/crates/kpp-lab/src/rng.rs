//! Seeded, counter-based randomness.
//!
//! Every Monte Carlo operation takes a `StreamRng` derived from an experiment
//! seed plus a stream id (one stream per replica), so replicas are independent
//! and results do not depend on scheduling or replica order. Gaussians come
//! from the inverse CDF so a replica consumes exactly one uniform per draw.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::special::inv_normal_cdf;

pub struct StreamRng {
    inner: ChaCha12Rng,
}

impl StreamRng {
    /// Stream `stream` of the generator family keyed by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    pub fn standard_normal(&mut self) -> f64 {
        inv_normal_cdf(self.uniform_open())
    }
}
