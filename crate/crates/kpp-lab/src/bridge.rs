//! Discrete-time Brownian bridges, positivity probabilities, and the
//! path-weight representation of U_t.
//!
//! Bridges are sampled by exact sequential conditioning (no rejection):
//! given the current point with r steps left to the endpoint, the next point
//! is Gaussian with mean pulled 1/r of the way to the endpoint and variance
//! (r-1)/r. Endpoints are hit exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, InitialData};
use crate::rng::StreamRng;
pub use crate::stats::McEstimate;
use crate::stats::compensated_sum;

/// Bridge endpoints and step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeSpec {
    pub x: f64,
    pub y: f64,
    pub t: u32,
}

impl BridgeSpec {
    pub fn new(x: f64, y: f64, t: u32) -> Result<Self> {
        if t < 1 {
            return Err(Error::invalid("bridge needs at least one step"));
        }
        Ok(BridgeSpec { x, y, t })
    }
}

/// Exact positivity probability of the continuum bridge, 1 - e^{-2xy/t}.
pub fn continuum_positivity(x: f64, y: f64, t: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::invalid("positivity formula needs x, y >= 0"));
    }
    if !(t > 0.0) {
        return Err(Error::invalid("positivity formula needs t > 0"));
    }
    Ok(-(-2.0 * x * y / t).exp_m1())
}

/// Sample one bridge path of length t + 1; both endpoints are exact.
pub fn sample_bridge(spec: &BridgeSpec, rng: &mut StreamRng) -> Vec<f64> {
    let t = spec.t as usize;
    let mut path = Vec::with_capacity(t + 1);
    path.push(spec.x);
    let mut a = spec.x;
    for s in 0..t - 1 {
        let remaining = (t - s) as f64;
        let mean = a + (spec.y - a) / remaining;
        let var = (remaining - 1.0) / remaining;
        a = mean + var.sqrt() * rng.standard_normal();
        path.push(a);
    }
    path.push(spec.y);
    path
}

/// Fraction of bridges staying strictly positive at every integer time.
pub fn discrete_positivity_mc(spec: &BridgeSpec, reps: u64, seed: u64) -> Result<McEstimate> {
    if !(spec.x > 0.0 && spec.y > 0.0) {
        return Err(Error::invalid("positivity estimate needs x, y > 0"));
    }
    if reps < 1000 {
        return Err(Error::invalid("positivity estimate needs at least 1000 replicas"));
    }
    let hits: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::new(seed, r);
            let t = spec.t as usize;
            let mut a = spec.x;
            for s in 0..t - 1 {
                let remaining = (t - s) as f64;
                let mean = a + (spec.y - a) / remaining;
                let var = (remaining - 1.0) / remaining;
                a = mean + var.sqrt() * rng.standard_normal();
                if a <= 0.0 {
                    return 0u64;
                }
            }
            1u64
        })
        .sum();
    let p = hits as f64 / reps as f64;
    Ok(McEstimate {
        mean: p,
        stderr: (p * (1.0 - p) / reps as f64).sqrt(),
        replicas: reps,
        seed,
    })
}

/// Outcome of checking one panel cell against the positivity envelopes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub x: f64,
    pub y: f64,
    pub t: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

/// Verify `estimate` against the product-form upper envelope
/// C (1+x)(1+y)/t and, when x y <= t, the lower envelope
/// (1 - e^{-2}) x y / t implied by the exact continuum formula.
pub fn bound_check(spec: &BridgeSpec, estimate: &McEstimate, c_upper: f64) -> Result<BoundCheck> {
    if spec.x < 0.0 || spec.y < 0.0 {
        return Err(Error::invalid("bound check needs x, y >= 0"));
    }
    let t = spec.t as f64;
    let upper = c_upper * (1.0 + spec.x) * (1.0 + spec.y) / t;
    let upper_margin = upper - (estimate.mean - 3.0 * estimate.stderr);
    let (lower, lower_margin) = if spec.x * spec.y <= t {
        let lo = (1.0 - (-2.0f64).exp()) * spec.x * spec.y / t;
        (lo, estimate.mean + 3.0 * estimate.stderr - lo)
    } else {
        (0.0, estimate.mean)
    };
    Ok(BoundCheck {
        x: spec.x,
        y: spec.y,
        t: spec.t,
        estimate: estimate.mean,
        stderr: estimate.stderr,
        lower,
        upper,
        lower_margin,
        upper_margin,
        pass: lower_margin >= 0.0 && upper_margin >= 0.0,
    })
}

/// Calibrate the upper-envelope constant on a panel: twice the largest
/// compensated ratio, leaving headroom for the slow approach of the ratio to
/// its large-t limit while still falsifiable against a wrong t-power.
pub fn calibrate_upper_constant(cells: &[(BridgeSpec, McEstimate)]) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::invalid("calibration needs at least one cell"));
    }
    let max_ratio = cells
        .iter()
        .map(|(s, e)| e.mean * s.t as f64 / ((1.0 + s.x) * (1.0 + s.y)))
        .fold(0.0f64, f64::max);
    Ok(2.0 * max_ratio)
}

/// Per-step potentials k_s(y) = log sum_{j<K} G_s(y)^j on grid windows.
/// Outside a window the potential takes its boundary limits: 0 where G -> 0,
/// log K where G -> 1.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    k: u32,
    tables: Vec<GridFunction>,
}

impl PotentialTable {
    /// Build from the profiles G_0 .. G_{t-1}.
    pub fn from_profiles(k: u32, profiles: &[GridFunction]) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("branching order must be >= 2"));
        }
        if profiles.is_empty() {
            return Err(Error::invalid("potential table needs at least one profile"));
        }
        Ok(PotentialTable {
            k,
            tables: profiles.to_vec(),
        })
    }

    pub fn steps(&self) -> usize {
        self.tables.len()
    }

    pub fn log_k(&self) -> f64 {
        (self.k as f64).ln()
    }

    /// k_s(y); clamped into [0, log K] by construction.
    pub fn eval(&self, s: usize, y: f64) -> Result<f64> {
        let g = self
            .tables
            .get(s)
            .ok_or_else(|| Error::invalid(format!("potential table has no step {s}")))?;
        let gv = g.eval(y).clamp(0.0, 1.0);
        let mut sum = 1.0;
        let mut pow = 1.0;
        for _ in 1..self.k {
            pow *= gv;
            sum += pow;
        }
        Ok(sum.ln().clamp(0.0, self.log_k()))
    }
}

/// Path-weight estimate of U_t(x): free Gaussian walks from x, weighted by
/// exp(sum_s k_{t-s}(X_s)) and the terminal U_0(X_t).
pub fn feynman_kac_estimate(
    x: f64,
    u0: &InitialData,
    pot: &PotentialTable,
    t: u32,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    if t == 0 {
        let v = u0.u0(x)?;
        return Ok(McEstimate {
            mean: v,
            stderr: 0.0,
            replicas: 0,
            seed,
        });
    }
    if pot.steps() < t as usize {
        return Err(Error::invalid(format!(
            "potential table covers {} steps, need {t}",
            pot.steps()
        )));
    }
    if reps < 10_000 {
        return Err(Error::invalid("path-weight estimate needs at least 1e4 replicas"));
    }
    // fail fast on table initial data etc.
    u0.u0(0.0)?;
    let weights: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::new(seed, r);
            let mut pos = x;
            let mut log_weight = 0.0;
            for s in 1..=t {
                pos += rng.standard_normal();
                log_weight += pot.eval((t - s) as usize, pos)?;
            }
            Ok(u0.u0(pos)? * log_weight.exp())
        })
        .collect::<Result<_>>()?;
    let mean = compensated_sum(&weights) / reps as f64;
    let sq: Vec<f64> = weights.iter().map(|&w| (w - mean) * (w - mean)).collect();
    let var = compensated_sum(&sq) / (reps as f64 - 1.0);
    Ok(McEstimate {
        mean,
        stderr: (var / reps as f64).sqrt(),
        replicas: reps,
        seed,
    })
}
