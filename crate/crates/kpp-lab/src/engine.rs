//! The discrete front recursion: single steps, long co-moving evolutions with
//! front tracking, and the comparison structure used by the order-based
//! arguments (crossing counts and the exponential-envelope defect).

use std::io::Write;

use serde::Serialize;

use crate::conv::correlate_direct;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::Kernel;
use crate::params::ModelParams;
use crate::propagate::Propagator;

/// One step of the recursion: pointwise K-th power, then correlation with the
/// kernel. Out-of-window samples use the boundary limits raised to K. This is
/// the reference path (direct correlation); `evolve` uses the spectral
/// two-zone propagator, which is tested to agree with repeated `step`.
pub fn step(g: &GridFunction, params: &ModelParams, kernel: &Kernel) -> Result<GridFunction> {
    if g.dx() != kernel.dx() {
        return Err(Error::invalid(format!(
            "grid spacing {} does not match kernel spacing {}",
            g.dx(),
            kernel.dx()
        )));
    }
    let n = g.len();
    let half = kernel.half_width();
    let k = params.k() as i32;
    let mut ext = vec![0.0; n + 2 * half];
    let lp = g.left_limit().powi(k);
    let rp = g.right_limit().powi(k);
    for j in 0..half {
        ext[j] = lp;
        ext[half + n + j] = rp;
    }
    for (slot, &v) in ext[half..half + n].iter_mut().zip(g.values()) {
        *slot = v.powi(k);
    }
    let mut out = correlate_direct(kernel.weights(), &ext, n);
    for v in out.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let (lp, rp) = (lp.clamp(0.0, 1.0), rp.clamp(0.0, 1.0));
    if g.monotone() {
        GridFunction::from_values_monotone_projected(g.origin(), g.dx(), out, lp, rp)
    } else {
        GridFunction::from_values(g.origin(), g.dx(), out, lp, rp, false)
    }
}

/// Front position series m(t) with one-step increments.
#[derive(Debug, Clone, Serialize)]
pub struct FrontTrace {
    pub level: f64,
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEntry {
    pub t: u32,
    pub m: f64,
    pub delta_m: Option<f64>,
}

impl FrontTrace {
    pub fn new(level: f64) -> Self {
        FrontTrace {
            level,
            entries: Vec::new(),
        }
    }

    /// Synthetic trace from a closed-form m(t), mainly for estimator tests.
    pub fn from_positions(level: f64, first_t: u32, m: &[f64]) -> Self {
        let entries = m
            .iter()
            .enumerate()
            .map(|(i, &mi)| TraceEntry {
                t: first_t + i as u32,
                m: mi,
                delta_m: m.get(i + 1).map(|&next| next - mi),
            })
            .collect();
        FrontTrace { level, entries }
    }

    pub fn m_at(&self, t: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.t == t)
            .map(|e| e.m)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# front trace v1; level={}", self.level)?;
        writeln!(w, "t,m,delta_m")?;
        for e in &self.entries {
            match e.delta_m {
                Some(d) => writeln!(w, "{},{},{}", e.t, e.m, d)?,
                None => writeln!(w, "{},{},", e.t, e.m)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Edge cells must stay this close to their limits, checked per step.
    pub boundary_tol: f64,
    /// Recenter when the front drifts this far from its home position.
    pub recenter_threshold: f64,
    /// Front level used for m(t).
    pub level: f64,
    /// Record the first `record_profiles` stepped profiles (G_1..) plus G_0.
    pub record_profiles: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            boundary_tol: 1e-12,
            recenter_threshold: 1.0,
            level: 0.5,
            record_profiles: 0,
        }
    }
}

#[derive(Debug)]
pub struct EvolveResult {
    pub final_profile: GridFunction,
    pub trace: FrontTrace,
    /// G_0..G_r when profile recording was requested (absolute coordinates).
    pub profiles: Vec<GridFunction>,
}

/// Iterate the recursion `t_steps` times in a co-moving window, tracking the
/// front at the configured level. m is reported in absolute coordinates;
/// recentering is by whole cells only, so the evolution itself never
/// interpolates.
pub fn evolve(
    g0: &GridFunction,
    params: &ModelParams,
    t_steps: u32,
    kernel: &Kernel,
    opts: &EvolveOptions,
) -> Result<EvolveResult> {
    if t_steps < 1 {
        return Err(Error::invalid("evolution needs at least one step"));
    }
    if g0.dx() != kernel.dx() {
        return Err(Error::invalid("grid spacing does not match kernel spacing"));
    }
    let mut prop = Propagator::new(params, kernel, g0.len())?;
    let mut state = prop.init_state(g0)?;
    let mut origin = g0.origin();
    let h = g0.dx();
    let home = g0.quantile(opts.level)? - origin;

    let mut trace = FrontTrace::new(opts.level);
    let mut profiles = Vec::new();
    if opts.record_profiles > 0 {
        profiles.push(g0.clone());
    }

    for t in 1..=t_steps {
        state = prop.step(&state);

        let deviation = (state.g[0] - 0.0)
            .abs()
            .max((state.g[state.g.len() - 1] - 1.0).abs());
        if deviation > opts.boundary_tol {
            return Err(Error::BoundaryContamination {
                t,
                deviation,
                tol: opts.boundary_tol,
            });
        }

        let grid = prop.to_grid(&state, origin)?;
        let m = grid.quantile(opts.level)?;
        trace.entries.push(TraceEntry {
            t,
            m,
            delta_m: None,
        });
        if t >= 2 {
            let prev = trace.entries[(t - 2) as usize].m;
            trace.entries[(t - 2) as usize].delta_m = Some(m - prev);
        }
        if (t as usize) <= opts.record_profiles {
            profiles.push(grid);
        }

        let drift = m - origin - home;
        if drift.abs() > opts.recenter_threshold {
            let rc = (drift / h).round() as i64;
            prop.recenter(&mut state, rc);
            origin += rc as f64 * h;
        }
    }

    Ok(EvolveResult {
        final_profile: prop.to_grid(&state, origin)?,
        trace,
        profiles,
    })
}

/// Number of sign changes of g2 - g1, ignoring zero runs. A maximal run of
/// zeros counts as one crossing only when the signs on its sides differ.
pub fn crossing_count(g1: &GridFunction, g2: &GridFunction) -> Result<usize> {
    if !g1.same_geometry(g2) {
        return Err(Error::invalid("crossing count needs identical window geometry"));
    }
    let mut count = 0;
    let mut last_sign = 0i8;
    for (a, b) in g1.values().iter().zip(g2.values()) {
        let d = b - a;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
    }
    Ok(count)
}

/// Exponential-envelope comparison: evolve both profiles `n` steps with the
/// reference step and return the largest violation of
/// `G~_n(x + nc) - G_n(x + nc) <= A e^{-beta x + n beta (c(beta) - c)}`,
/// evaluated at grid nodes (so x = x_i - n c). Nonpositive means the
/// envelope holds.
#[allow(clippy::too_many_arguments)]
pub fn comparison_defect(
    g0: &GridFunction,
    g0_tilde: &GridFunction,
    a: f64,
    beta: f64,
    c: f64,
    n_steps: u32,
    kernel: &Kernel,
    params: &ModelParams,
) -> Result<f64> {
    if !g0.same_geometry(g0_tilde) {
        return Err(Error::invalid("comparison needs identical window geometry"));
    }
    if a < 0.0 || !(beta > 0.0) {
        return Err(Error::invalid("need A >= 0 and beta > 0"));
    }
    if !(c > params.beta_c()) {
        return Err(Error::invalid(format!(
            "comparison speed must exceed the critical speed, got c = {c}"
        )));
    }
    // precondition: g0 >= g0_tilde - A e^{-beta x} on the window
    for i in 0..g0.len() {
        let envelope = a * (-beta * g0.x(i)).exp();
        if g0.values()[i] < g0_tilde.values()[i] - envelope - 1e-12 {
            return Err(Error::invalid(format!(
                "initial envelope violated at x = {}",
                g0.x(i)
            )));
        }
    }
    let mut g = g0.clone();
    let mut gt = g0_tilde.clone();
    for _ in 0..n_steps {
        g = step(&g, params, kernel)?;
        gt = step(&gt, params, kernel)?;
    }
    let decay = (n_steps as f64 * beta * (params.speed_at(beta) - c)).exp();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..g.len() {
        let x = g.x(i) - n_steps as f64 * c;
        let envelope = a * (-beta * x).exp() * decay;
        if !envelope.is_finite() {
            continue;
        }
        worst = worst.max(gt.values()[i] - g.values()[i] - envelope);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, InitialData};
    use crate::params::Beta;
    use crate::special::normal_cdf;

    fn kernel_coarse() -> Kernel {
        Kernel::gaussian(0.05, 8.0).unwrap()
    }

    #[test]
    fn constants_are_fixed_points_up_to_power() {
        let params = ModelParams::new(3, Beta::Finite(1.0)).unwrap();
        let kernel = kernel_coarse();
        for a in [0.0, 0.3, 1.0] {
            let g = GridFunction::from_values(0.0, 0.05, vec![a; 64], a, a, true).unwrap();
            let out = step(&g, &params, &kernel).unwrap();
            let want = a.powi(3);
            for &v in out.values() {
                assert!((v - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn heaviside_step_matches_normal_cdf() {
        // the jump sits between nodes, so the discrete step reproduces the
        // CDF shifted by half a cell; against the unshifted CDF the error is
        // the half-cell offset itself
        let params = ModelParams::heaviside(2).unwrap();
        let kernel = Kernel::gaussian(0.01, 8.0).unwrap();
        let g0 = make_grid(-12.0, 0.01, 2401, &InitialData::Heaviside).unwrap();
        let g1 = step(&g0, &params, &kernel).unwrap();
        let mut worst_shifted = 0.0f64;
        let mut worst_raw = 0.0f64;
        for i in 0..g1.len() {
            let x = g1.x(i);
            worst_shifted = worst_shifted.max((g1.values()[i] - normal_cdf(x - 0.005)).abs());
            worst_raw = worst_raw.max((g1.values()[i] - normal_cdf(x)).abs());
        }
        assert!(worst_shifted < 1.5e-6, "shift-aware error {worst_shifted}");
        assert!(worst_raw < 2.1e-3, "raw error {worst_raw}");
        assert!(worst_raw > 1e-3, "raw error unexpectedly small: {worst_raw}");
    }

    #[test]
    fn step_rejects_spacing_mismatch() {
        let params = ModelParams::heaviside(2).unwrap();
        let g = make_grid(-1.0, 0.02, 101, &InitialData::Heaviside).unwrap();
        assert!(step(&g, &params, &kernel_coarse()).is_err());
    }

    #[test]
    fn crossing_count_basics() {
        let base = GridFunction::from_values(0.0, 1.0, vec![0.1, 0.2, 0.3, 0.4], 0.0, 1.0, true)
            .unwrap();
        assert_eq!(crossing_count(&base, &base).unwrap(), 0);
        let other =
            GridFunction::from_values(0.0, 1.0, vec![0.05, 0.1, 0.35, 0.5], 0.0, 1.0, true)
                .unwrap();
        assert_eq!(crossing_count(&base, &other).unwrap(), 1);
        // zero run between opposite signs counts once
        let with_run =
            GridFunction::from_values(0.0, 1.0, vec![0.05, 0.2, 0.3, 0.5], 0.0, 1.0, true)
                .unwrap();
        assert_eq!(crossing_count(&base, &with_run).unwrap(), 1);
        let narrow = GridFunction::from_values(0.0, 1.0, vec![0.1, 0.2], 0.0, 1.0, true).unwrap();
        assert!(crossing_count(&base, &narrow).is_err());
    }

    #[test]
    fn evolve_first_step_front_is_near_zero() {
        let params = ModelParams::heaviside(2).unwrap();
        let kernel = Kernel::gaussian(0.01, 8.0).unwrap();
        let g0 = make_grid(-40.0, 0.01, 15001, &InitialData::Heaviside).unwrap();
        let out = evolve(&g0, &params, 1, &kernel, &EvolveOptions::default()).unwrap();
        let m1 = out.trace.m_at(1).unwrap();
        assert!(m1.abs() <= 0.01, "m(1) = {m1}");
    }

    #[test]
    fn evolve_detects_boundary_contamination() {
        let params = ModelParams::heaviside(2).unwrap();
        let kernel = kernel_coarse();
        // recentering is off, so the front escapes through the right edge
        let g0 = make_grid(-20.0, 0.05, 801, &InitialData::Heaviside).unwrap();
        let opts = EvolveOptions {
            recenter_threshold: f64::INFINITY,
            ..EvolveOptions::default()
        };
        let err = evolve(&g0, &params, 40, &kernel, &opts).unwrap_err();
        assert!(matches!(err, Error::BoundaryContamination { .. }), "{err}");
    }

    #[test]
    fn comparison_defect_equality_case() {
        let params = ModelParams::new(2, Beta::Finite(0.8)).unwrap();
        let kernel = kernel_coarse();
        let g0 = make_grid(-16.0, 0.05, 641, &InitialData::gumbel(0.8).unwrap()).unwrap();
        let d = comparison_defect(&g0, &g0, 0.0, 0.8, params.speed(), 3, &kernel, &params)
            .unwrap();
        assert!(d <= 1e-15, "defect {d}");
        let d0 = comparison_defect(&g0, &g0, 0.0, 0.8, params.speed(), 0, &kernel, &params)
            .unwrap();
        assert!(d0 <= 0.0);
    }
}
