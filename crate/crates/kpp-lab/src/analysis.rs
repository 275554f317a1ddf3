//! Diagnostics on traces and profiles: speed estimates, log-correction
//! coefficients, wave-convergence gaps, and cross-temperature ordering.

use serde::Serialize;

use crate::engine::FrontTrace;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::params::{Beta, ModelParams};
use crate::waves::WaveSolution;

/// Mean one-step displacement over the window [t_lo, t_hi].
pub fn speed_estimate(trace: &FrontTrace, window: (u32, u32)) -> Result<f64> {
    let (lo, hi) = window;
    let deltas: Vec<f64> = trace
        .entries
        .iter()
        .filter(|e| e.t >= lo && e.t <= hi)
        .filter_map(|e| e.delta_m)
        .collect();
    if deltas.len() < 10 {
        return Err(Error::invalid(format!(
            "speed window [{lo}, {hi}] holds {} increments, need at least 10",
            deltas.len()
        )));
    }
    Ok(deltas.iter().sum::<f64>() / deltas.len() as f64)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticsReport {
    pub c_hat: f64,
    /// Fitted coefficient of log t.
    pub b_hat: f64,
    /// Phase prediction: 0 below the critical point, -1/(2 beta_c) at it,
    /// -3/(2 beta_c) above it and for step initial data.
    pub b_expected: f64,
    pub window: (u32, u32),
    pub method: &'static str,
}

/// Phase prediction for the log-correction coefficient.
pub fn expected_log_coefficient(params: &ModelParams) -> f64 {
    let bc = params.beta_c();
    match params.beta() {
        Beta::Finite(b) if b < bc * (1.0 - 1e-12) => 0.0,
        Beta::Finite(b) if b <= bc * (1.0 + 1e-12) => -1.0 / (2.0 * bc),
        _ => -3.0 / (2.0 * bc),
    }
}

/// Dyadic estimate of the log t coefficient:
/// (m(2T) - m(T) - c T) / log 2 cancels both the linear term and the
/// additive constant exactly, so it is exact on m = c t + b log t + a.
/// `c_exact` must come from the closed-form speed, never from a fit.
pub fn log_correction_coefficient(
    trace: &FrontTrace,
    c_exact: f64,
    t_base: u32,
    params: &ModelParams,
) -> Result<AsymptoticsReport> {
    let m1 = trace.m_at(t_base).ok_or_else(|| {
        Error::invalid(format!("trace does not reach t = {t_base}"))
    })?;
    let m2 = trace.m_at(2 * t_base).ok_or_else(|| {
        Error::invalid(format!("trace does not reach t = {}", 2 * t_base))
    })?;
    let b_hat = (m2 - m1 - c_exact * t_base as f64) / std::f64::consts::LN_2;
    Ok(AsymptoticsReport {
        c_hat: c_exact,
        b_hat,
        b_expected: expected_log_coefficient(params),
        window: (t_base, 2 * t_base),
        method: "dyadic",
    })
}

/// Least-squares fit of m(t) = a t + b log t + d over the window; the
/// three-parameter design is ill-conditioned at desk scales, so this is a
/// diagnostic only, never the reported estimator.
pub fn log_correction_lsq(
    trace: &FrontTrace,
    window: (u32, u32),
    params: &ModelParams,
) -> Result<AsymptoticsReport> {
    let pts: Vec<(f64, f64)> = trace
        .entries
        .iter()
        .filter(|e| e.t >= window.0 && e.t <= window.1)
        .map(|e| (e.t as f64, e.m))
        .collect();
    if pts.len() < 10 {
        return Err(Error::invalid("least-squares window too short"));
    }
    // normal equations for columns (t, log t, 1)
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(t, m) in &pts {
        let row = [t, t.ln(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * m;
        }
    }
    let sol = solve3(ata, atb)
        .ok_or_else(|| Error::NumericalUnderflow("singular normal equations".into()))?;
    Ok(AsymptoticsReport {
        c_hat: sol[0],
        b_hat: sol[1],
        b_expected: expected_log_coefficient(params),
        window,
        method: "least-squares",
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Sup-distance between the profile recentered by its front position and a
/// solved wave recentered by its own half level, over the common window.
pub fn wave_convergence_gap(g: &GridFunction, m: f64, w: &WaveSolution) -> Result<f64> {
    let w_shift = w.w.quantile(0.5)?;
    // offsets xi where both evaluations stay inside their windows
    let lo = (w.w.origin() - w_shift).max(g.origin() - m);
    let hi = (w.w.right_edge() - w_shift).min(g.right_edge() - m);
    if !(hi - lo > 1.0) {
        return Err(Error::invalid("profiles share no usable window"));
    }
    let h = w.w.dx();
    let steps = ((hi - lo) / h).floor() as usize;
    let mut worst = 0.0f64;
    for i in 0..=steps {
        let xi = lo + i as f64 * h;
        worst = worst.max((g.eval(xi + m) - w.w.eval(xi + w_shift)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderingCheck {
    pub pass: bool,
    /// Worst violation of g1 >= g2 on xi >= 0 (positive means violated).
    pub right_violation: f64,
    /// Worst violation of g1 <= g2 on xi <= 0.
    pub left_violation: f64,
    pub slack: f64,
}

/// Cross-temperature ordering of recentered profiles: the steeper profile
/// dominates right of the front and is dominated left of it, up to one cell
/// of interpolation slack.
pub fn ordering_check(
    g_steep: &GridFunction,
    m_steep: f64,
    g_shallow: &GridFunction,
    m_shallow: f64,
) -> Result<OrderingCheck> {
    if g_steep.dx() != g_shallow.dx() {
        return Err(Error::invalid("ordering check needs matching grid spacing"));
    }
    let h = g_steep.dx();
    let lo = (g_steep.origin() - m_steep).max(g_shallow.origin() - m_shallow);
    let hi = (g_steep.right_edge() - m_steep).min(g_shallow.right_edge() - m_shallow);
    if !(hi > 0.0 && lo < 0.0) {
        return Err(Error::invalid("recentered windows do not overlap the front"));
    }
    // |G'| <= 1, so one cell of slack absorbs the interpolation error
    let slack = h;
    let mut right_violation = f64::NEG_INFINITY;
    let mut left_violation = f64::NEG_INFINITY;
    let steps = ((hi - lo) / h).floor() as usize;
    for i in 0..=steps {
        let xi = lo + i as f64 * h;
        let a = g_steep.eval(xi + m_steep);
        let b = g_shallow.eval(xi + m_shallow);
        if xi >= 0.0 {
            right_violation = right_violation.max(b - a);
        }
        if xi <= 0.0 {
            left_violation = left_violation.max(a - b);
        }
    }
    Ok(OrderingCheck {
        pass: right_violation <= slack && left_violation <= slack,
        right_violation,
        left_violation,
        slack,
    })
}
