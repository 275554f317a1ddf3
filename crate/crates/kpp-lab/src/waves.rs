//! Stationary traveling waves of the recursion and their tail laws.
//!
//! The solver runs the co-moving power/convolve/shift iteration with the
//! two-zone propagator. The grid spacing is snapped so the co-moving shift
//! `c` is a whole number of cells: every state transform is then exact (no
//! resampling), the stationarity residual is measured at nodes with no
//! interpolation error in the loop, and the iteration converges to an exact
//! fixed point of the discrete operator instead of stalling on an
//! interpolation floor. The spacing deviates from the requested one by well
//! under a percent.

use serde::Serialize;

use crate::engine::step;
use crate::error::{Error, Result};
use crate::grid::{make_grid, GridFunction, InitialData};
use crate::kernel::Kernel;
use crate::params::{Beta, ModelParams};
pub use crate::params::{critical_beta, duality_map, speed_formula, wave_speed};
use crate::propagate::Propagator;

#[derive(Debug, Clone)]
pub struct WaveSolution {
    /// Normalized profile: the half level sits within one cell of x = 0.
    pub w: GridFunction,
    pub speed: f64,
    /// Sup-norm of w - T_c w at the returned iterate.
    pub residual: f64,
    pub iterations: u64,
}

#[derive(Debug, Clone, Default)]
pub struct WaveOptions {
    /// Window extents around the front; `None` takes the defaults
    /// (25 to the left, 55 to the right).
    pub left_margin: Option<f64>,
    pub right_margin: Option<f64>,
    /// Override the default initial profile.
    pub start: Option<InitialData>,
}

/// Solve the stationary equation at the speed implied by `params`.
///
/// The kernel fixes the nominal spacing and truncation radius. Iteration
/// stops when the stationarity residual drops below `tol`; exceeding
/// `max_iter` reports the last residual as a non-convergence error.
pub fn solve_wave(
    params: &ModelParams,
    kernel: &Kernel,
    tol: f64,
    max_iter: u64,
) -> Result<WaveSolution> {
    solve_wave_with(params, kernel, tol, max_iter, &WaveOptions::default())
}

pub fn solve_wave_with(
    params: &ModelParams,
    kernel: &Kernel,
    tol: f64,
    max_iter: u64,
    opts: &WaveOptions,
) -> Result<WaveSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let left_margin = opts.left_margin.unwrap_or(25.0);
    let right_margin = opts.right_margin.unwrap_or(55.0);
    let c = params.speed();
    let shift_cells = (c / kernel.dx()).round().max(1.0);
    let h = c / shift_cells;
    let shift = shift_cells as usize;
    let kernel_h = Kernel::gaussian(h, kernel.radius_sigmas())?;
    let n = ((left_margin + right_margin) / h).round() as usize + 1;
    let origin = -left_margin;

    // the start profile must carry the tail that selects this wave: the
    // pulled rate below the critical point, anything steeper at or above it
    let start = match (&opts.start, params.beta()) {
        (Some(init), _) => init.clone(),
        (None, Beta::Finite(b)) if b < params.beta_c() => InitialData::gumbel(b)?,
        _ => InitialData::Heaviside,
    };
    let g0 = make_grid(origin, h, n, &start)?;

    let mut prop = Propagator::new(params, &kernel_h, n)?;
    let mut state = prop.init_state(&g0)?;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let next = prop.step(&state);
        residual = state.g[..n - shift]
            .iter()
            .zip(&next.g[shift..])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let grid = prop.to_grid(&next, origin)?;
        let median = grid.quantile(0.5)?;
        state = next;
        let rc = (median / h).round() as i64;
        if rc != 0 {
            prop.recenter(&mut state, rc);
        }
        if residual < tol {
            return Ok(WaveSolution {
                w: prop.to_grid(&state, origin)?,
                speed: c,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Tail-law fit: the compensated tail and how flat it is over the window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    pub constant: f64,
    pub window: (f64, f64),
    /// max |h / constant - 1| over the window.
    pub flatness: f64,
}

/// Window [x_lo, x_hi] placed by tail magnitude: 1 - w runs from `u_hi`
/// down to `u_lo` across it.
pub fn magnitude_window(w: &GridFunction, u_hi: f64, u_lo: f64) -> Result<(f64, f64)> {
    if !(0.0 < u_lo && u_lo < u_hi && u_hi < 1.0) {
        return Err(Error::invalid("need 0 < u_lo < u_hi < 1"));
    }
    Ok((w.quantile(1.0 - u_hi)?, w.quantile(1.0 - u_lo)?))
}

/// Compensated tail h(x) = e^{rate x} (1 - w(x)), optionally divided by x.
/// The constant is the window mean, flatness the worst relative deviation.
pub fn compensated_tail(
    w: &GridFunction,
    rate: f64,
    with_x_factor: bool,
    window: (f64, f64),
) -> Result<TailFit> {
    let (x_lo, x_hi) = window;
    if !(x_lo < x_hi) || x_lo < w.origin() || x_hi > w.right_edge() {
        return Err(Error::invalid(format!(
            "tail window [{x_lo}, {x_hi}] not inside the grid"
        )));
    }
    if with_x_factor && x_lo <= 0.0 {
        return Err(Error::invalid(
            "x-compensated tail needs a window right of the front",
        ));
    }
    let mut hs = Vec::new();
    for i in 0..w.len() {
        let x = w.x(i);
        if x < x_lo || x > x_hi {
            continue;
        }
        let u = 1.0 - w.values()[i];
        if u < 1e-13 {
            return Err(Error::NumericalUnderflow(format!(
                "1 - w underflows at x = {x}; move the tail window left"
            )));
        }
        let mut hval = (rate * x).exp() * u;
        if with_x_factor {
            hval /= x;
        }
        hs.push(hval);
    }
    if hs.len() < 8 {
        return Err(Error::invalid("tail window contains too few nodes"));
    }
    let constant = hs.iter().sum::<f64>() / hs.len() as f64;
    let flatness = hs
        .iter()
        .map(|h| (h / constant - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TailFit {
        constant,
        window,
        flatness,
    })
}

/// Tail fit in the law matching the phase of `params`: pure exponential
/// below the critical point, exponential with a linear prefactor at and
/// above it.
pub fn tail_constant(
    w: &WaveSolution,
    params: &ModelParams,
    window: (f64, f64),
) -> Result<TailFit> {
    match params.beta() {
        Beta::Finite(b) if b < params.beta_c() => compensated_tail(&w.w, b, false, window),
        _ => compensated_tail(&w.w, params.beta_c(), true, window),
    }
}

/// Residual of an arbitrary profile under one co-moving step, measured with
/// the reference step operator (interpolation only in the read-out).
pub fn stationarity_residual(
    w: &GridFunction,
    params: &ModelParams,
    kernel: &Kernel,
) -> Result<f64> {
    let stepped = step(w, params, kernel)?;
    let c = params.speed();
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        let x = w.x(i) + c;
        if x > stepped.right_edge() {
            break;
        }
        worst = worst.max((w.values()[i] - stepped.eval(x)).abs());
    }
    Ok(worst)
}
