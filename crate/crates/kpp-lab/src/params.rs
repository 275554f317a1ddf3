//! Model parameters and the closed-form speed functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverse temperature; `Heaviside` is the zero-temperature (step initial
/// data) sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Heaviside,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Heaviside => None,
        }
    }
}

/// Critical inverse temperature sqrt(2 log K).
pub fn critical_beta(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!("branching order must be >= 2, got {k}")));
    }
    Ok((2.0 * (k as f64).ln()).sqrt())
}

/// Front speed: beta/2 + log K / beta below the critical point, frozen at
/// sqrt(2 log K) at and above it (Heaviside included).
pub fn wave_speed(params: &ModelParams) -> f64 {
    params.speed
}

fn speed_of(k: u32, beta: Beta, beta_c: f64) -> f64 {
    match beta {
        Beta::Finite(b) if b < beta_c => b / 2.0 + (k as f64).ln() / b,
        _ => beta_c,
    }
}

/// The unfrozen speed formula f(beta) = beta/2 + log K / beta, defined for
/// every positive beta. `duality_map` leaves it invariant; the physical
/// speed follows it only below the critical point.
pub fn speed_formula(k: u32, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("speed formula needs beta > 0, got {beta}")));
    }
    if k < 2 {
        return Err(Error::invalid(format!("branching order must be >= 2, got {k}")));
    }
    Ok(beta / 2.0 + (k as f64).ln() / beta)
}

/// The map beta -> 2 log K / beta that leaves the subcritical speed invariant.
pub fn duality_map(beta: f64, k: u32) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("duality map needs beta > 0, got {beta}")));
    }
    if k < 2 {
        return Err(Error::invalid(format!("branching order must be >= 2, got {k}")));
    }
    Ok(2.0 * (k as f64).ln() / beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    k: u32,
    beta: Beta,
    beta_c: f64,
    speed: f64,
}

impl ModelParams {
    pub fn new(k: u32, beta: Beta) -> Result<Self> {
        let beta_c = critical_beta(k)?;
        if let Beta::Finite(b) = beta {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::invalid(format!("beta must be positive, got {b}")));
            }
        }
        Ok(ModelParams {
            k,
            beta,
            beta_c,
            speed: speed_of(k, beta, beta_c),
        })
    }

    pub fn heaviside(k: u32) -> Result<Self> {
        Self::new(k, Beta::Heaviside)
    }

    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn beta(&self) -> Beta {
        self.beta
    }
    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Whether the parameters sit in the frozen phase (beta >= beta_c).
    pub fn frozen(&self) -> bool {
        match self.beta {
            Beta::Finite(b) => b >= self.beta_c,
            Beta::Heaviside => true,
        }
    }

    /// Speed at an arbitrary inverse temperature for this branching order.
    pub fn speed_at(&self, beta: f64) -> f64 {
        speed_of(self.k, Beta::Finite(beta), self.beta_c)
    }

    /// Tail decay rate that controls the front: beta below the critical
    /// point, beta_c at and above it.
    pub fn pulled_rate(&self) -> f64 {
        match self.beta {
            Beta::Finite(b) if b < self.beta_c => b,
            _ => self.beta_c,
        }
    }
}

/// Serialization mirror for metadata files ("heaviside" or a number).
#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(untagged)]
pub enum BetaSpec {
    Number(f64),
    Word(BetaWord),
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum BetaWord {
    Heaviside,
}

impl From<Beta> for BetaSpec {
    fn from(b: Beta) -> Self {
        match b {
            Beta::Finite(v) => BetaSpec::Number(v),
            Beta::Heaviside => BetaSpec::Word(BetaWord::Heaviside),
        }
    }
}

impl From<BetaSpec> for Beta {
    fn from(b: BetaSpec) -> Self {
        match b {
            BetaSpec::Number(v) => Beta::Finite(v),
            BetaSpec::Word(BetaWord::Heaviside) => Beta::Heaviside,
        }
    }
}
