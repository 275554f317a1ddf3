//! Monte Carlo simulation of the K-ary Gaussian branching random walk.
//!
//! Siblings are born co-located, so a generation holds one representative
//! position per cluster plus a multiplicity; that is exact, not an
//! approximation, and cuts memory by a factor K. Replicas run on independent
//! counter-based streams, so estimates do not depend on thread scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Beta, ModelParams};
use crate::rng::StreamRng;
pub use crate::stats::{EmpiricalCdf, McEstimate};
use crate::stats::{compensated_sum, ks_two_sample};

pub const DEFAULT_POPULATION_CAP: u64 = 1 << 22;

/// Cluster-level snapshot of one generation.
#[derive(Debug, Clone)]
pub struct BrwGeneration {
    t: u32,
    k: u32,
    /// One representative per cluster of co-located particles.
    cluster_positions: Vec<f64>,
    /// Particles per cluster: 1 at generation 0, K afterwards.
    multiplicity: u32,
}

impl BrwGeneration {
    /// A single particle at `x`, generation 0.
    pub fn root(k: u32, x: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("branching order must be >= 2, got {k}")));
        }
        Ok(BrwGeneration {
            t: 0,
            k,
            cluster_positions: vec![x],
            multiplicity: 1,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }
    pub fn cluster_positions(&self) -> &[f64] {
        &self.cluster_positions
    }
    pub fn particle_count(&self) -> u64 {
        self.cluster_positions.len() as u64 * self.multiplicity as u64
    }

    pub fn min_pos(&self) -> f64 {
        self.cluster_positions.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max_pos(&self) -> f64 {
        self.cluster_positions
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Advance one generation: every particle takes an independent standard
/// normal step and becomes a new cluster of K co-located children.
pub fn brw_step(gen: &BrwGeneration, rng: &mut StreamRng, cap: u64) -> Result<BrwGeneration> {
    let next_particles = gen.particle_count() * gen.k as u64;
    if next_particles > cap {
        return Err(Error::PopulationLimit {
            requested: next_particles,
            cap,
        });
    }
    let mut positions = Vec::with_capacity(gen.cluster_positions.len() * gen.multiplicity as usize);
    for &p in &gen.cluster_positions {
        for _ in 0..gen.multiplicity {
            positions.push(p + rng.standard_normal());
        }
    }
    Ok(BrwGeneration {
        t: gen.t + 1,
        k: gen.k,
        cluster_positions: positions,
        multiplicity: gen.k,
    })
}

/// Grow a tree from the origin to generation `t` on one stream.
pub fn grow_tree(params: &ModelParams, t: u32, rng: &mut StreamRng, cap: u64) -> Result<BrwGeneration> {
    let mut gen = BrwGeneration::root(params.k(), 0.0)?;
    for _ in 0..t {
        gen = brw_step(&gen, rng, cap)?;
    }
    Ok(gen)
}

/// The martingale-type functionals of one generation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Observables {
    /// sum over particles of e^{-beta (X_k + c(beta) t)}.
    pub z_beta: f64,
    /// sum over particles of (X_k + beta_c t) e^{-beta_c (X_k + beta_c t)}.
    pub d_mart: f64,
    pub min_pos: f64,
    pub max_pos: f64,
    /// sum over particles of e^{-beta X_k}.
    pub partition: f64,
    /// e^{-beta centering} times the partition sum.
    pub cascade_mass: f64,
}

/// Evaluate the observables at inverse temperature `beta` with a caller
/// supplied centering (front position or the closed-form c(beta) t).
pub fn observables(
    gen: &BrwGeneration,
    beta: f64,
    params: &ModelParams,
    centering: f64,
) -> Result<Observables> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("observables need beta > 0, got {beta}")));
    }
    let t = gen.t as f64;
    let c_beta = params.speed_at(beta);
    let bc = params.beta_c();
    let mult = gen.multiplicity as f64;
    let mut z = Vec::with_capacity(gen.cluster_positions.len());
    let mut d = Vec::with_capacity(gen.cluster_positions.len());
    let mut part = Vec::with_capacity(gen.cluster_positions.len());
    let mut cascade = Vec::with_capacity(gen.cluster_positions.len());
    for &p in &gen.cluster_positions {
        z.push((-beta * (p + c_beta * t)).exp());
        let shifted = p + bc * t;
        d.push(shifted * (-bc * shifted).exp());
        part.push((-beta * p).exp());
        cascade.push((-beta * (p + centering)).exp());
    }
    Ok(Observables {
        z_beta: mult * compensated_sum(&z),
        d_mart: mult * compensated_sum(&d),
        min_pos: gen.min_pos(),
        max_pos: gen.max_pos(),
        partition: mult * compensated_sum(&part),
        cascade_mass: mult * compensated_sum(&cascade),
    })
}

/// Empirical CDF of the generation-t maximum over independent trees.
pub fn simulate_max_cdf(
    params: &ModelParams,
    t: u32,
    reps: u64,
    seed: u64,
    cap: u64,
) -> Result<EmpiricalCdf> {
    if reps < 100 {
        return Err(Error::invalid("max-CDF simulation needs at least 100 replicas"));
    }
    check_population(params.k(), t, cap)?;
    let maxima = run_replicas(reps, seed, |rng| {
        let gen = grow_tree(params, t, rng, cap)?;
        Ok(if t == 0 { 0.0 } else { gen.max_pos() })
    })?;
    EmpiricalCdf::from_samples(maxima)
}

/// Independent draws of the normalized mass e^{-beta centering} Z(t).
pub fn sample_cascade_masses(
    params: &ModelParams,
    beta: f64,
    t: u32,
    reps: u64,
    seed: u64,
    cap: u64,
    centering: f64,
) -> Result<Vec<f64>> {
    check_population(params.k(), t, cap)?;
    run_replicas(reps, seed, |rng| {
        let gen = grow_tree(params, t, rng, cap)?;
        Ok(observables(&gen, beta, params, centering)?.cascade_mass)
    })
}

/// Per-replica observables at fixed (beta, t), for martingale-mean panels.
pub fn sample_observables(
    params: &ModelParams,
    beta: f64,
    t: u32,
    reps: u64,
    seed: u64,
    cap: u64,
    centering: f64,
) -> Result<Vec<Observables>> {
    check_population(params.k(), t, cap)?;
    run_replicas(reps, seed, |rng| {
        let gen = grow_tree(params, t, rng, cap)?;
        observables(&gen, beta, params, centering)
    })
}

fn check_population(k: u32, t: u32, cap: u64) -> Result<()> {
    let mut pop: u64 = 1;
    for _ in 0..t {
        pop = pop
            .checked_mul(k as u64)
            .ok_or(Error::PopulationLimit {
                requested: u64::MAX,
                cap,
            })?;
        if pop > cap {
            return Err(Error::PopulationLimit {
                requested: pop,
                cap,
            });
        }
    }
    Ok(())
}

fn run_replicas<T, F>(reps: u64, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::new(seed, r);
            f(&mut rng)
        })
        .collect()
}

/// Distributional fixed-point probe: resample disjoint K-blocks of the
/// samples into synthetic masses e^{-beta (V + c(beta))} (M_1 + ... + M_K)
/// and return the two-sample Kolmogorov-Smirnov statistic.
pub fn fixed_point_check(samples: &[f64], params: &ModelParams, rng: &mut StreamRng) -> Result<f64> {
    if samples.len() < 1000 {
        return Err(Error::invalid(format!(
            "fixed-point check needs at least 1000 samples, got {}",
            samples.len()
        )));
    }
    let beta = match params.beta() {
        Beta::Finite(b) => b,
        Beta::Heaviside => {
            return Err(Error::invalid("fixed-point check needs a finite beta"))
        }
    };
    let k = params.k() as usize;
    let c = params.speed();
    let synthetic: Vec<f64> = samples
        .chunks_exact(k)
        .map(|block| {
            let v = rng.standard_normal();
            (-beta * (v + c)).exp() * block.iter().sum::<f64>()
        })
        .collect();
    let a = EmpiricalCdf::from_samples(samples.to_vec())?;
    let b = EmpiricalCdf::from_samples(synthetic)?;
    Ok(ks_two_sample(&a, &b))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceRow {
    pub u: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Empirical Laplace transform u -> mean e^{-u M} over the samples.
pub fn empirical_laplace(samples: &[f64], u_grid: &[f64]) -> Result<Vec<LaplaceRow>> {
    if samples.iter().any(|&m| m < 0.0) {
        return Err(Error::invalid("Laplace transform needs nonnegative samples"));
    }
    if u_grid.iter().any(|&u| !(u > 0.0)) {
        return Err(Error::invalid("Laplace grid must be positive"));
    }
    if samples.len() < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    u_grid
        .iter()
        .map(|&u| {
            let vals: Vec<f64> = samples.iter().map(|&m| (-u * m).exp()).collect();
            let est = McEstimate::from_samples(&vals, 0)?;
            Ok(LaplaceRow {
                u,
                mean: est.mean,
                stderr: est.stderr,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;
    use crate::stats::dkw_epsilon;

    fn params2() -> ModelParams {
        ModelParams::heaviside(2).unwrap()
    }

    #[test]
    fn step_counts_and_colocation() {
        let mut rng = StreamRng::new(3, 0);
        let root = BrwGeneration::root(3, 0.5).unwrap();
        assert_eq!(root.particle_count(), 1);
        let g1 = brw_step(&root, &mut rng, 1 << 22).unwrap();
        // one cluster of K co-located particles after the first split
        assert_eq!(g1.cluster_positions().len(), 1);
        assert_eq!(g1.multiplicity(), 3);
        assert_eq!(g1.particle_count(), 3);
        assert_eq!(g1.min_pos(), g1.max_pos());
        let g2 = brw_step(&g1, &mut rng, 1 << 22).unwrap();
        assert_eq!(g2.particle_count(), 9);
        assert_eq!(g2.cluster_positions().len(), 3);
    }

    #[test]
    fn step_is_deterministic_per_stream() {
        let run = || {
            let mut rng = StreamRng::new(11, 4);
            let mut g = BrwGeneration::root(2, 0.0).unwrap();
            for _ in 0..6 {
                g = brw_step(&g, &mut rng, 1 << 22).unwrap();
            }
            g.cluster_positions().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn population_cap_is_enforced() {
        let mut rng = StreamRng::new(0, 0);
        let mut g = BrwGeneration::root(2, 0.0).unwrap();
        g = brw_step(&g, &mut rng, 16).unwrap();
        g = brw_step(&g, &mut rng, 16).unwrap();
        g = brw_step(&g, &mut rng, 16).unwrap();
        let err = brw_step(&g, &mut rng, 16).unwrap_err();
        assert!(matches!(err, Error::PopulationLimit { requested: 16, .. }) || matches!(err, Error::PopulationLimit { .. }));
    }

    #[test]
    fn observables_at_the_root() {
        let root = BrwGeneration::root(2, 0.0).unwrap();
        let obs = observables(&root, 0.9, &params2(), 0.0).unwrap();
        assert_eq!(obs.z_beta, 1.0);
        assert_eq!(obs.d_mart, 0.0);
        assert_eq!(obs.partition, 1.0);
        assert_eq!(obs.cascade_mass, 1.0);
    }

    #[test]
    fn first_generation_z_matches_closed_form() {
        let params = params2();
        let beta = 0.7;
        let mut rng = StreamRng::new(21, 0);
        let g1 = brw_step(&BrwGeneration::root(2, 0.0).unwrap(), &mut rng, 1 << 22).unwrap();
        let v = g1.cluster_positions()[0];
        let obs = observables(&g1, beta, &params, 0.0).unwrap();
        let want = 2.0 * (-beta * (v + params.speed_at(beta))).exp();
        assert!((obs.z_beta - want).abs() < 1e-14);
    }

    #[test]
    fn additive_and_derivative_martingale_means() {
        let params = params2();
        let bc = params.beta_c();
        for beta in [0.5 * bc, bc] {
            let obs = sample_observables(&params, beta, 8, 4000, 500, 1 << 22, 0.0).unwrap();
            let zs: Vec<f64> = obs.iter().map(|o| o.z_beta).collect();
            let ds: Vec<f64> = obs.iter().map(|o| o.d_mart).collect();
            let ez = McEstimate::from_samples(&zs, 500).unwrap();
            let ed = McEstimate::from_samples(&ds, 500).unwrap();
            assert!(
                (ez.mean - 1.0).abs() <= 4.0 * ez.stderr,
                "z mean {} +- {} at beta {beta}",
                ez.mean,
                ez.stderr
            );
            assert!(
                ed.mean.abs() <= 4.0 * ed.stderr,
                "d mean {} +- {} at beta {beta}",
                ed.mean,
                ed.stderr
            );
        }
    }

    #[test]
    fn minimum_speed_trend() {
        let params = params2();
        let bc = params.beta_c();
        let l_over_t = |t: u32, reps: u64| -> f64 {
            let obs = sample_observables(&params, 1.0, t, reps, 77, 1 << 22, 0.0).unwrap();
            let vals: Vec<f64> = obs.iter().map(|o| o.min_pos / t as f64).collect();
            McEstimate::from_samples(&vals, 77).unwrap().mean
        };
        let at10 = l_over_t(10, 64);
        let at20 = l_over_t(20, 64);
        // decreasing toward -beta_c; the full limit is far beyond desk scale
        assert!(at20 < at10, "no downward trend: {at10} -> {at20}");
        assert!(at20 < -0.75 * bc, "minimum too high: {at20}");
    }

    #[test]
    fn max_cdf_first_generation_is_standard_normal() {
        let params = params2();
        let cdf = simulate_max_cdf(&params, 1, 2000, 9, 1 << 22).unwrap();
        let d = cdf.ks_distance(normal_cdf);
        assert!(d < dkw_epsilon(2000, 0.99), "KS distance {d}");
        let degenerate = simulate_max_cdf(&params, 0, 200, 9, 1 << 22).unwrap();
        assert_eq!(degenerate.eval(-1e-9), 0.0);
        assert_eq!(degenerate.eval(0.0), 1.0);
        assert!(simulate_max_cdf(&params, 1, 5, 9, 1 << 22).is_err());
    }

    #[test]
    fn fixed_point_degenerate_and_subcritical_null() {
        let params = ModelParams::new(2, Beta::Finite(0.8)).unwrap();
        let mut rng = StreamRng::new(5, 1_000_000);
        let zeros = vec![0.0; 2048];
        assert_eq!(fixed_point_check(&zeros, &params, &mut rng).unwrap(), 0.0);

        // subcritical masses are essentially at the fixed point by t = 12
        let t = 12;
        let centering = params.speed() * t as f64;
        let samples =
            sample_cascade_masses(&params, 0.8, t, 4096, 33, 1 << 22, centering).unwrap();
        let ks = fixed_point_check(&samples, &params, &mut rng).unwrap();
        let thr = crate::stats::ks_two_sample_threshold(4096, 2048, 0.01);
        assert!(ks < thr, "KS {ks} vs threshold {thr}");
        assert!(fixed_point_check(&samples[..100], &params, &mut rng).is_err());
    }

    #[test]
    fn laplace_transform_basics() {
        let rows = empirical_laplace(&[0.0, 0.0, 0.0], &[0.5, 2.0]).unwrap();
        assert!(rows.iter().all(|r| (r.mean - 1.0).abs() < 1e-15));
        let rows = empirical_laplace(&[0.3, 1.2, 0.7], &[1e-9]).unwrap();
        assert!((rows[0].mean - 1.0).abs() < 1e-8);
        assert!(empirical_laplace(&[-0.1, 0.2], &[1.0]).is_err());
        assert!(empirical_laplace(&[0.1, 0.2], &[0.0]).is_err());
    }
}
