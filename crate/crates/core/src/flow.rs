//! Projected explicit Euler integration of the attention dynamics
//! `X_i <- Π(X_i ± τ/J_i sum_j w_j exp(X_i·DX_j) D X_j)`.

use serde::{Deserialize, Serialize};

use crate::interaction::{fields, stationarity_residual, Ensemble, InteractionMatrix};
pub use crate::interaction::{Normalization, Sign};
use crate::sphere::{project_to_sphere, UnitVector};
use crate::{Error, Result};

/// Integrator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub tau: f64,
    pub steps: usize,
    pub sign: Sign,
    pub normalization: Normalization,
    pub seed: u64,
    pub record_every: usize,
    /// Stop once the max stationarity residual drops below this value.
    #[serde(default)]
    pub early_exit_tol: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 0.075,
            steps: 1500,
            sign: Sign::Maximize,
            normalization: Normalization::Partition,
            seed: 0,
            record_every: 1,
            early_exit_tol: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Recorded states of a run. Index `k` of each list refers to the same step.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<(usize, Ensemble)>,
    pub energies: Vec<(usize, f64)>,
    pub dissipations: Vec<(usize, f64)>,
    pub max_residuals: Vec<(usize, f64)>,
}

impl Trajectory {
    pub fn last(&self) -> &Ensemble {
        &self
            .snapshots
            .last()
            .expect("a trajectory holds at least one snapshot")
            .1
    }

    pub fn final_energy(&self) -> f64 {
        self.energies.last().expect("non-empty").1
    }

    pub fn final_residual(&self) -> f64 {
        self.max_residuals.last().expect("non-empty").1
    }
}

/// One synchronous Euler step. All sums use the pre-step ensemble.
pub fn step(mu: &Ensemble, d: &InteractionMatrix, cfg: &FlowConfig) -> Result<Ensemble> {
    mu.check_dim(d)?;
    let f = fields(mu, d);
    let s = cfg.sign.value() * cfg.tau;
    let points = mu
        .points()
        .iter()
        .zip(&f)
        .map(|(x, fi)| {
            let c = s / cfg.normalization.factor(fi);
            let y: Vec<f64> = x.as_slice().iter().zip(&fi.drift).map(|(xi, di)| xi + c * di).collect();
            project_to_sphere(&y)
        })
        .collect::<Result<Vec<_>>>()?;
    mu.with_points(points)
}

fn record(traj: &mut Trajectory, k: usize, mu: &Ensemble, d: &InteractionMatrix) -> Result<f64> {
    let report = stationarity_residual(mu, d)?;
    traj.snapshots.push((k, mu.clone()));
    traj.energies.push((k, report.energy));
    traj.dissipations.push((k, report.dissipation));
    traj.max_residuals.push((k, report.max_residual));
    Ok(report.max_residual)
}

/// Runs `cfg.steps` Euler steps from `init`, recording step 0, every
/// `record_every`-th step, and the final step.
pub fn run(init: &Ensemble, d: &InteractionMatrix, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.validate()?;
    init.check_dim(d)?;
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        energies: Vec::new(),
        dissipations: Vec::new(),
        max_residuals: Vec::new(),
    };
    let mut mu = init.clone();
    let r0 = record(&mut traj, 0, &mu, d)?;
    if cfg.early_exit_tol.is_some_and(|tol| r0 < tol) {
        return Ok(traj);
    }
    for k in 1..=cfg.steps {
        mu = step(&mu, d, cfg).map_err(|e| Error::Step {
            step: k,
            source: Box::new(e),
        })?;
        let scheduled = k % cfg.record_every == 0 || k == cfg.steps;
        if !scheduled && cfg.early_exit_tol.is_none() {
            continue;
        }
        let report = stationarity_residual(&mu, d)?;
        let done = cfg.early_exit_tol.is_some_and(|tol| report.max_residual < tol);
        if scheduled || done {
            traj.snapshots.push((k, mu.clone()));
            traj.energies.push((k, report.energy));
            traj.dissipations.push((k, report.dissipation));
            traj.max_residuals.push((k, report.max_residual));
        }
        if done {
            break;
        }
    }
    Ok(traj)
}

/// `Π(Dx)`. For a single particle the Euler scheme with a large step is this
/// power iteration.
pub fn power_iteration_step(x: &UnitVector, d: &InteractionMatrix) -> Result<UnitVector> {
    project_to_sphere(&d.apply(x.as_slice()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub violations: usize,
    pub max_violation: f64,
}

/// Counts consecutive energy records with `sign·(E_{k+1} - E_k) < -tol`.
pub fn energy_monotonicity_check(traj: &Trajectory, sign: Sign, tol: f64) -> MonotonicityReport {
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    for w in traj.energies.windows(2) {
        let drop = -sign.value() * (w[1].1 - w[0].1);
        if drop > tol {
            violations += 1;
            max_violation = max_violation.max(drop);
        }
    }
    MonotonicityReport {
        violations,
        max_violation,
    }
}

/// Engineering bound `10 τ² N exp(|λ|max) |λ|max²` on the per-step energy
/// error of the Euler scheme. Loose: it often exceeds the energy range itself.
pub fn discretization_allowance(tau: f64, d: &InteractionMatrix, n_particles: usize) -> f64 {
    let r = d.spectral_radius();
    10.0 * tau * tau * n_particles as f64 * r.exp() * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sphere::circle_point;

    fn cfg(tau: f64, steps: usize, sign: Sign, normalization: Normalization) -> FlowConfig {
        FlowConfig {
            tau,
            steps,
            sign,
            normalization,
            seed: 0,
            record_every: 1,
            early_exit_tol: None,
        }
    }

    #[test]
    fn eigenvector_dirac_is_fixed() {
        let d = InteractionMatrix::diagonal(&[1.0, 3.0, 4.0]).unwrap();
        for k in 0..3 {
            let z = d.eigenvector(k);
            let mu = Ensemble::dirac(z.clone());
            for norm in [Normalization::Constant, Normalization::Partition] {
                let next = step(&mu, &d, &cfg(0.075, 1, Sign::Maximize, norm)).unwrap();
                assert_eq!(next.points()[0].as_slice(), z.as_slice());
            }
        }
    }

    #[test]
    fn identity_leaves_single_particle() {
        let d = InteractionMatrix::identity(3);
        let x = crate::sphere::sample_uniform(3, &mut crate::rng_from_seed(2));
        let next = step(
            &Ensemble::dirac(x.clone()),
            &d,
            &cfg(0.3, 1, Sign::Maximize, Normalization::Constant),
        )
        .unwrap();
        for (a, b) in next.points()[0].as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_antipodal_pair_gains_energy() {
        let d = InteractionMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let mu = Ensemble::uniform(vec![
            circle_point(std::f64::consts::FRAC_PI_2 + 1e-3),
            circle_point(-std::f64::consts::FRAC_PI_2 + 1e-3),
        ])
        .unwrap();
        let traj = run(&mu, &d, &cfg(0.075, 100, Sign::Maximize, Normalization::Partition)).unwrap();
        assert!(traj.final_energy() > traj.energies[0].1);
    }

    #[test]
    fn zero_update_is_reported_with_step() {
        // A single particle under D = Id moves to (1 - τe)x; pick the τ that
        // makes this vanish in floating point.
        let d = InteractionMatrix::identity(2);
        let mu = Ensemble::dirac(UnitVector::basis(2, 0));
        let e = 1.0_f64.exp();
        let mut tau = 1.0 / e;
        for _ in 0..8 {
            if 1.0 + (-tau) * e == 0.0 {
                break;
            }
            tau = if 1.0 + (-tau) * e > 0.0 {
                tau.next_up()
            } else {
                tau.next_down()
            };
        }
        assert_eq!(1.0 + (-tau) * e, 0.0);
        let c = cfg(tau, 3, Sign::Minimize, Normalization::Constant);
        match run(&mu, &d, &c) {
            Err(Error::Step { step: 1, source }) => assert!(matches!(*source, Error::ZeroNorm(_))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_iteration_examples() {
        let d = InteractionMatrix::diagonal(&[1.0, 3.0, 4.0]).unwrap();
        let z = d.eigenvector(0);
        assert_eq!(power_iteration_step(&z, &d).unwrap(), z);
        let neg = InteractionMatrix::diagonal(&[-2.0, 1.0]).unwrap();
        let e1 = UnitVector::basis(2, 0);
        assert_eq!(power_iteration_step(&e1, &neg).unwrap().as_slice(), &[-1.0, 0.0]);

        let mut x = project_to_sphere(&[1.0, 1.0, 1.0]).unwrap();
        for _ in 0..50 {
            x = power_iteration_step(&x, &d).unwrap();
        }
        assert!(x.chord(&UnitVector::basis(3, 2)) < 1e-6);
        // The (3/4)^50 ratio bounds the angle, the chord shrinks the same way.
        assert!((x.as_slice()[2] - 1.0).abs() < 1e-10);

        let singular = InteractionMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(power_iteration_step(&e1, &singular), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn records_first_scheduled_and_last() {
        let d = InteractionMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let mu = Ensemble::sample_uniform(5, 2, &mut crate::rng_from_seed(1)).unwrap();
        let mut c = cfg(0.05, 23, Sign::Maximize, Normalization::Partition);
        c.record_every = 10;
        let traj = run(&mu, &d, &c).unwrap();
        let steps: Vec<usize> = traj.energies.iter().map(|e| e.0).collect();
        assert_eq!(steps, vec![0, 10, 20, 23]);
        assert_eq!(traj.snapshots.len(), traj.energies.len());
    }

    #[test]
    fn early_exit_stops_at_stationary_state() {
        let d = InteractionMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let mu = Ensemble::sample_uniform(5, 2, &mut crate::rng_from_seed(4)).unwrap();
        let mut c = cfg(0.1, 100_000, Sign::Maximize, Normalization::Partition);
        c.record_every = 1000;
        c.early_exit_tol = Some(1e-9);
        let traj = run(&mu, &d, &c).unwrap();
        assert!(traj.final_residual() < 1e-9);
        assert!(traj.energies.last().unwrap().0 < 100_000);
    }

    #[test]
    fn invalid_config_rejected() {
        let d = InteractionMatrix::identity(2);
        let mu = Ensemble::dirac(UnitVector::basis(2, 0));
        assert!(run(&mu, &d, &cfg(0.0, 5, Sign::Maximize, Normalization::Constant)).is_err());
        assert!(run(&mu, &d, &cfg(0.1, 0, Sign::Maximize, Normalization::Constant)).is_err());
    }

    #[test]
    fn allowance_formula() {
        let d = InteractionMatrix::diagonal(&[1.0, -2.0]).unwrap();
        let a = discretization_allowance(0.1, &d, 3);
        assert!((a - 10.0 * 0.01 * 3.0 * 2.0_f64.exp() * 4.0).abs() < 1e-12);
        let _ = Matrix::identity(1);
    }
}
