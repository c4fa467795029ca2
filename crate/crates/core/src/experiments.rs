//! Ready-made runs: flows from random or four-peak starts.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::cluster::{detect_clusters, ClusterReport};
use crate::flow::{run, FlowConfig, Normalization, Sign, Trajectory};
use crate::interaction::{Ensemble, InteractionMatrix};
use crate::sphere::circle_point;
use crate::{par, rng_from_seed, Result};

/// Flow from `n_particles` uniform points drawn with `cfg.seed`.
pub fn random_start_flow(d: &InteractionMatrix, n_particles: usize, cfg: &FlowConfig) -> Result<Trajectory> {
    let mut rng = rng_from_seed(cfg.seed);
    let init = Ensemble::sample_uniform(n_particles, d.dim(), &mut rng)?;
    run(&init, d, cfg)
}

/// Four particles at `π/4 + kπ/2`, one per quadrant.
pub fn four_peak_init() -> Ensemble {
    let points = (0..4).map(|k| circle_point(k as f64 * FRAC_PI_2 + FRAC_PI_4)).collect();
    Ensemble::uniform(points).expect("four equal weights")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPeakRun {
    pub lambda2: f64,
    /// Mean angle of the particles folded into `[0, π/2]`.
    pub phi_mean: f64,
    /// Mean over particles of `tanh(x²) / tanh(λ2 y²)`.
    pub tanh_ratio: f64,
    pub energy_final: f64,
}

/// Minimizing flow for `D = diag(1, λ2)` from the four-peak start.
pub fn four_peak_flow(lambda2: f64, tau: f64, normalization: Normalization, steps: usize) -> Result<FourPeakRun> {
    let d = InteractionMatrix::diagonal(&[1.0, lambda2])?;
    let cfg = FlowConfig {
        tau,
        steps,
        sign: Sign::Minimize,
        normalization,
        seed: 0,
        record_every: steps,
        early_exit_tol: None,
    };
    let traj = run(&four_peak_init(), &d, &cfg)?;
    let last = traj.last();
    let n = last.len() as f64;
    let (mut phi, mut ratio) = (0.0, 0.0);
    for p in last.points() {
        let (x, y) = (p.as_slice()[0], p.as_slice()[1]);
        phi += y.abs().atan2(x.abs()) / n;
        ratio += (x * x).tanh() / (lambda2 * y * y).tanh() / n;
    }
    Ok(FourPeakRun {
        lambda2,
        phi_mean: phi,
        tanh_ratio: ratio,
        energy_final: traj.final_energy(),
    })
}

/// Four-peak runs over a grid of `λ2`, in parallel.
pub fn four_peak_sweep(
    lambda2: &[f64],
    tau: f64,
    normalization: Normalization,
    steps: usize,
) -> Result<Vec<FourPeakRun>> {
    par::try_map_range(lambda2.len(), |i| four_peak_flow(lambda2[i], tau, normalization, steps))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusteredRun {
    pub trajectory: Trajectory,
    pub clusters: ClusterReport,
}

/// Random-start flow followed by cluster detection with up to `max_k` groups.
pub fn clustered_flow(
    d: &InteractionMatrix,
    n_particles: usize,
    cfg: &FlowConfig,
    max_k: usize,
    radius_tol: f64,
) -> Result<ClusteredRun> {
    let trajectory = random_start_flow(d, n_particles, cfg)?;
    let clusters = detect_clusters(trajectory.last(), max_k, radius_tol, cfg.seed)?;
    Ok(ClusteredRun { trajectory, clusters })
}
