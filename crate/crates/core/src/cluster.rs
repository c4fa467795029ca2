//! Cluster counting for final particle states.

use rand::Rng as _;
use serde::Serialize;

use crate::flow::{run, FlowConfig};
use crate::interaction::{Ensemble, InteractionMatrix};
use crate::linalg::{axpy, norm};
use crate::sphere::UnitVector;
use crate::{derive_seed, par, rng_from_seed, Error, Result};

/// Restarts per candidate `k`.
pub const RESTARTS: usize = 50;
const MAX_ITERS: usize = 100;
/// Default chordal radius under which a group counts as one cluster.
pub const DEFAULT_RADIUS_TOL: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub k: usize,
    /// Sorted lexicographically by coordinates.
    pub centers: Vec<UnitVector>,
    /// Largest chordal distance from a particle to its center.
    pub max_radius: f64,
    pub assignment: Vec<usize>,
    /// No `k <= max_k` met the radius tolerance.
    pub saturated: bool,
}

fn nearest(x: &UnitVector, centers: &[UnitVector]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let r = x.chord(center);
        if r < best.1 {
            best = (c, r);
        }
    }
    best
}

fn assign(points: &[UnitVector], centers: &[UnitVector]) -> (Vec<usize>, f64) {
    let mut radius: f64 = 0.0;
    let assignment = points
        .iter()
        .map(|p| {
            let (c, r) = nearest(p, centers);
            radius = radius.max(r);
            c
        })
        .collect();
    (assignment, radius)
}

fn kmeans_pp(points: &[UnitVector], weights: &[f64], k: usize, rng: &mut crate::Rng) -> Vec<UnitVector> {
    let first = rng.random_range(0..points.len());
    let mut centers = vec![points[first].clone()];
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .zip(weights)
            .map(|(p, w)| w * nearest(p, &centers).1.powi(2))
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, v) in d2.iter().enumerate() {
                if u < *v {
                    idx = i;
                    break;
                }
                u -= v;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
    }
    centers
}

/// Normalized weighted means of each group. A group whose mean vanishes (or
/// that is empty) takes the point farthest from the other centers.
fn update_centers(
    points: &[UnitVector],
    weights: &[f64],
    assignment: &[usize],
    centers: &[UnitVector],
) -> Vec<UnitVector> {
    let n = points[0].dim();
    let k = centers.len();
    let mut sums = vec![vec![0.0; n]; k];
    for ((p, w), &c) in points.iter().zip(weights).zip(assignment) {
        axpy(*w, p.as_slice(), &mut sums[c]);
    }
    (0..k)
        .map(|c| {
            let s = norm(&sums[c]);
            if s > 1e-12 {
                return UnitVector::from_unit(sums[c].iter().map(|v| v / s).collect());
            }
            let others: Vec<UnitVector> = centers
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != c)
                .map(|(_, v)| v.clone())
                .collect();
            let members: Vec<usize> = (0..points.len()).filter(|&i| assignment[i] == c).collect();
            let pool: Vec<usize> = if members.is_empty() {
                (0..points.len()).collect()
            } else {
                members
            };
            let far = pool
                .into_iter()
                .map(|i| {
                    let d = if others.is_empty() {
                        0.0
                    } else {
                        nearest(&points[i], &others).1
                    };
                    (i, d)
                })
                .fold((0, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            points[far.0].clone()
        })
        .collect()
}

fn lloyd(points: &[UnitVector], weights: &[f64], mut centers: Vec<UnitVector>) -> (Vec<UnitVector>, Vec<usize>, f64) {
    let (mut assignment, mut radius) = assign(points, &centers);
    for _ in 0..MAX_ITERS {
        centers = update_centers(points, weights, &assignment, &centers);
        let (next, r) = assign(points, &centers);
        radius = r;
        if next == assignment {
            break;
        }
        assignment = next;
    }
    (centers, assignment, radius)
}

fn lexicographic(a: &UnitVector, b: &UnitVector) -> std::cmp::Ordering {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn best_of_restarts(points: &[UnitVector], weights: &[f64], k: usize, seed: u64) -> (Vec<UnitVector>, Vec<usize>, f64) {
    let mut rng = rng_from_seed(derive_seed(seed, &[k as u64]));
    let mut best: Option<(Vec<UnitVector>, Vec<usize>, f64)> = None;
    for _ in 0..RESTARTS {
        let init = kmeans_pp(points, weights, k, &mut rng);
        let cand = lloyd(points, weights, init);
        if best.as_ref().is_none_or(|b| cand.2 < b.2) {
            best = Some(cand);
        }
    }
    best.expect("at least one restart")
}

/// Spherical k-means for `k = 1..=max_k`; returns the smallest `k` whose
/// largest chordal radius is at most `radius_tol`. Particles are clustered in
/// sorted order, so the result does not depend on how the ensemble is listed.
pub fn detect_clusters(mu: &Ensemble, max_k: usize, radius_tol: f64, seed: u64) -> Result<ClusterReport> {
    if mu.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if max_k == 0 || !(radius_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "max_k must be positive and radius_tol > 0".into(),
        ));
    }
    let mut perm: Vec<usize> = (0..mu.len()).collect();
    perm.sort_by(|&a, &b| {
        lexicographic(&mu.points()[a], &mu.points()[b]).then(mu.weights()[a].total_cmp(&mu.weights()[b]))
    });
    let points: Vec<UnitVector> = perm.iter().map(|&i| mu.points()[i].clone()).collect();
    let weights: Vec<f64> = perm.iter().map(|&i| mu.weights()[i]).collect();
    let mut last = None;
    for k in 1..=max_k.min(mu.len()) {
        let (centers, sorted_assignment, radius) = best_of_restarts(&points, &weights, k, seed);
        let mut assignment = vec![0; mu.len()];
        for (&i, &c) in perm.iter().zip(&sorted_assignment) {
            assignment[i] = c;
        }
        let fits = radius <= radius_tol;
        last = Some((k, centers, assignment, radius));
        if fits {
            break;
        }
    }
    let (k, centers, assignment, radius) = last.expect("max_k >= 1");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| lexicographic(&centers[a], &centers[b]));
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    Ok(ClusterReport {
        k,
        centers: order.iter().map(|&i| centers[i].clone()).collect(),
        max_radius: radius,
        assignment: assignment.iter().map(|&c| relabel[c]).collect(),
        saturated: radius > radius_tol,
    })
}

/// Outcome of one sweep trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub lambda2: f64,
    pub trial: usize,
    pub clusters: ClusterReport,
    pub energy_final: f64,
    pub residual_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda2: f64,
    pub count_single: usize,
    pub count_two: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialResult>,
}

/// Settings for the single-versus-two-cluster sweep with `D = diag(1, λ2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub flow: FlowConfig,
    pub trials: usize,
    pub n_particles: usize,
    pub radius_tol: f64,
}

impl SweepConfig {
    pub fn new(flow: FlowConfig, trials: usize) -> Self {
        Self {
            flow,
            trials,
            n_particles: 100,
            radius_tol: DEFAULT_RADIUS_TOL,
        }
    }
}

fn one_trial(l_idx: usize, lambda2: f64, trial: usize, cfg: &SweepConfig) -> Result<TrialResult> {
    let d = InteractionMatrix::diagonal(&[1.0, lambda2])?;
    let seed = derive_seed(cfg.flow.seed, &[l_idx as u64, trial as u64]);
    let mut rng = rng_from_seed(seed);
    let init = Ensemble::sample_uniform(cfg.n_particles, 2, &mut rng)?;
    let mut flow = cfg.flow.clone();
    flow.record_every = flow.steps;
    let traj = run(&init, &d, &flow)?;
    let clusters = detect_clusters(traj.last(), 2, cfg.radius_tol, seed)?;
    Ok(TrialResult {
        lambda2,
        trial,
        clusters,
        energy_final: traj.final_energy(),
        residual_final: traj.final_residual(),
    })
}

/// Runs `trials` maximizing flows per grid value from independent uniform
/// starts and counts one-cluster and two-cluster outcomes.
pub fn cluster_sweep(lambda2_grid: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.flow.validate()?;
    if cfg.trials == 0 || cfg.n_particles == 0 {
        return Err(Error::InvalidParameter(
            "trials and n_particles must be positive".into(),
        ));
    }
    if let Some(bad) = lambda2_grid.iter().find(|l| !(**l > 0.0 && **l <= 8.0)) {
        return Err(Error::InvalidParameter(format!("lambda2 = {bad} outside (0, 8]")));
    }
    let jobs = lambda2_grid.len() * cfg.trials;
    let trials = par::try_map_range(jobs, |j| {
        let (l, t) = (j / cfg.trials, j % cfg.trials);
        one_trial(l, lambda2_grid[l], t, cfg)
    })?;
    let rows = lambda2_grid
        .iter()
        .enumerate()
        .map(|(l, &lambda2)| {
            let chunk = &trials[l * cfg.trials..(l + 1) * cfg.trials];
            let single = chunk.iter().filter(|t| t.clusters.k == 1).count();
            SweepRow {
                lambda2,
                count_single: single,
                count_two: chunk.len() - single,
            }
        })
        .collect();
    Ok(SweepResult { rows, trials })
}

/// Largest distance from any center to the nearest of `±z`.
pub fn center_offset(report: &ClusterReport, z: &UnitVector) -> f64 {
    report
        .centers
        .iter()
        .map(|c| c.chord(z).min(c.chord(&z.antipode())))
        .fold(0.0, f64::max)
}

/// Mass assigned to each cluster.
pub fn cluster_masses(mu: &Ensemble, report: &ClusterReport) -> Vec<f64> {
    let mut m = vec![0.0; report.k];
    for (w, &c) in mu.weights().iter().zip(&report.assignment) {
        m[c] += w;
    }
    m
}
