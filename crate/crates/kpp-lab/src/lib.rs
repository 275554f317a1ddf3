//! Numerical laboratory for a discrete-time front recursion of KPP type.
//!
//! The lab iterates G_{t+1} = rho * G_t^K for a Gaussian kernel rho on a
//! moving grid window, extracts traveling waves and front asymptotics
//! (including the freezing of the speed at high inverse temperature), and
//! cross-validates the grid dynamics against Monte Carlo simulation of the
//! matching branching random walk and discrete Brownian-bridge estimators.
//!
//! Modules map onto the main subsystems:
//!
//! * [`grid`] — profiles on uniform windows, interpolation, quantiles;
//! * [`kernel`], [`engine`] — the step kernel and the front evolution;
//! * [`waves`] — stationary traveling-wave solver and tail analysis;
//! * [`brw`] — branching random walk Monte Carlo and its martingales;
//! * [`bridge`] — discrete Brownian bridges and the path-weight estimator;
//! * [`analysis`] — speed, log-correction and convergence diagnostics;
//! * [`report`] — the canned verification panels driven by the CLI.

pub mod analysis;
pub mod bridge;
pub mod brw;
pub mod config;
mod conv;
pub mod engine;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod params;
mod propagate;
pub mod report;
pub mod rng;
pub mod special;
pub mod stats;
pub mod waves;

pub use error::{Error, Result};
