//! Fully resolved experiment settings, shared by every subcommand.

use attnflow::{InteractionMatrix, Matrix, Normalization, Sign};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    SweepClusters,
    FourPeak,
    Density,
    MaximizeNd,
    IndefiniteEnergy,
    CheckStationary,
    Constants,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::SweepClusters => "sweep-clusters",
            Experiment::FourPeak => "four-peak",
            Experiment::Density => "density",
            Experiment::MaximizeNd => "maximize-nd",
            Experiment::IndefiniteEnergy => "indefinite-energy",
            Experiment::CheckStationary => "check-stationary",
            Experiment::Constants => "constants",
        }
    }
}

/// Every field is materialized, including those a given experiment ignores,
/// so a manifest echo replays exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    /// Rows of `D`, or of `M` for `density`.
    pub matrix: Vec<Vec<f64>>,
    pub tau: f64,
    pub steps: usize,
    pub sign: Sign,
    pub normalization: Normalization,
    pub n_particles: usize,
    pub trials: usize,
    pub record_every: usize,
    pub lambda2: Vec<f64>,
    pub eps: f64,
    pub grid: usize,
    pub iters: usize,
    pub resolution: usize,
    pub radius_tol: f64,
    pub max_k: usize,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// Defaults for one experiment; subcommand flags overwrite fields afterwards.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            dim: 3,
            matrix: diag_rows(&[1.0, 3.0, 4.0]),
            tau: 0.075,
            steps: 1500,
            sign: Sign::Maximize,
            normalization: Normalization::Partition,
            n_particles: 100,
            trials: 1,
            record_every: 1,
            lambda2: Vec::new(),
            eps: 0.3,
            grid: attnflow::density::DEFAULT_GRID,
            iters: attnflow::density::DEFAULT_ITERS,
            resolution: 512,
            radius_tol: attnflow::cluster::DEFAULT_RADIUS_TOL,
            max_k: 2,
            seed: None,
            threads: None,
            output: None,
        };
        match experiment {
            Experiment::Simulate | Experiment::Constants => base,
            Experiment::SweepClusters => ExperimentConfig {
                dim: 2,
                matrix: Vec::new(),
                trials: 100,
                record_every: 1500,
                lambda2: range("1.0:1.5:0.05").expect("valid default"),
                ..base
            },
            Experiment::FourPeak => ExperimentConfig {
                dim: 2,
                matrix: Vec::new(),
                tau: 0.2,
                steps: 10_000,
                sign: Sign::Minimize,
                n_particles: 4,
                record_every: 10_000,
                lambda2: range("0.5:8:0.5").expect("valid default"),
                ..base
            },
            Experiment::Density => ExperimentConfig {
                dim: 2,
                matrix: diag_rows(&[0.0, 1.0]),
                tau: attnflow::density::DEFAULT_TAU,
                ..base
            },
            Experiment::MaximizeNd => ExperimentConfig {
                n_particles: 1,
                trials: 30,
                record_every: 1500,
                radius_tol: 0.05,
                ..base
            },
            Experiment::IndefiniteEnergy => ExperimentConfig {
                dim: 2,
                matrix: Vec::new(),
                lambda2: range("-1:1:0.05").expect("valid default"),
                ..base
            },
            Experiment::CheckStationary => ExperimentConfig {
                dim: 2,
                matrix: diag_rows(&[1.0, 2.0]),
                ..base
            },
        }
    }

    pub fn set_matrix(&mut self, rows: Vec<Vec<f64>>) {
        self.dim = rows.len();
        self.matrix = rows;
    }

    pub fn interaction(&self) -> Result<InteractionMatrix, CliError> {
        Ok(InteractionMatrix::new(Matrix::from_rows(&self.matrix)?)?)
    }

    /// Diagonal of `matrix`, rejecting off-diagonal entries.
    pub fn diagonal(&self) -> Result<Vec<f64>, CliError> {
        for (i, row) in self.matrix.iter().enumerate() {
            if row.iter().enumerate().any(|(j, v)| i != j && *v != 0.0) {
                return Err(CliError::Config(format!(
                    "{} needs a diagonal matrix",
                    self.experiment.name()
                )));
            }
        }
        Ok(self.matrix.iter().enumerate().map(|(i, r)| r[i]).collect())
    }

    pub fn flow(&self, seed: u64) -> attnflow::FlowConfig {
        attnflow::FlowConfig {
            tau: self.tau,
            steps: self.steps,
            sign: self.sign,
            normalization: self.normalization,
            seed,
            record_every: self.record_every,
            early_exit_tol: None,
        }
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.steps == 0 || self.record_every == 0 || self.iters == 0 {
            return bad("steps, record_every and iters must be at least 1".into());
        }
        if self.n_particles == 0 || self.trials == 0 || self.grid < 4 || self.max_k == 0 {
            return bad("n_particles, trials and max_k must be positive and grid at least 4".into());
        }
        if !(self.radius_tol > 0.0) {
            return bad("radius_tol must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if !self.matrix.is_empty() && self.matrix.len() != self.dim {
            return bad(format!(
                "dim {} does not match a {}-row matrix",
                self.dim,
                self.matrix.len()
            ));
        }
        let needs_lambda2 = matches!(
            self.experiment,
            Experiment::SweepClusters | Experiment::FourPeak | Experiment::IndefiniteEnergy
        );
        if needs_lambda2 && self.lambda2.is_empty() {
            return bad("lambda2 grid is empty".into());
        }
        let needs_matrix = matches!(
            self.experiment,
            Experiment::Simulate | Experiment::Density | Experiment::MaximizeNd | Experiment::CheckStationary
        );
        if needs_matrix && self.matrix.is_empty() {
            return bad("a matrix is required".into());
        }
        Ok(())
    }
}

pub fn diag_rows(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
        .collect()
}

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("not a finite number: {s:?}")))
    }
}

/// `start:stop:step` (endpoints included within 1e-12), a comma list, or one value.
pub fn range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0) || stop < start {
                return Err(CliError::Config(format!(
                    "range {s:?} needs step > 0 and stop >= start"
                )));
            }
            let count = ((stop - start) / step + 1e-12).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(CliError::Config(format!("range {s:?} has too many points")));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => s.split(',').map(number).collect(),
        _ => Err(CliError::Config(format!("range {s:?} is not start:stop:step"))),
    }
}

/// Comma-separated list of numbers.
pub fn list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(number).collect()
}

/// Matrix rows separated by `;`, entries by `,`.
pub fn rows(s: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let rows: Vec<Vec<f64>> = s.split(';').map(list).collect::<Result<_, _>>()?;
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(CliError::Config(format!("matrix {s:?} is not square")));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_endpoints() {
        let r = range("1.0:1.5:0.05").unwrap();
        assert_eq!(r.len(), 11);
        assert!((r[10] - 1.5).abs() < 1e-12);
        assert_eq!(range("0.5:8:0.5").unwrap().len(), 16);
        assert_eq!(range("-1:1:0.05").unwrap().len(), 41);
        assert_eq!(range("2").unwrap(), vec![2.0]);
        assert_eq!(range("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(range("1:0:0.1").is_err());
        assert!(range("0:1:0").is_err());
        assert!(range("0:1").is_err());
        assert!(range("a:1:0.1").is_err());
    }

    #[test]
    fn matrix_rows() {
        assert_eq!(rows("1,0.5;0.5,2").unwrap(), vec![vec![1.0, 0.5], vec![0.5, 2.0]]);
        assert!(rows("1,2;3").is_err());
        assert_eq!(diag_rows(&[1.0, 2.0]), vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn defaults_validate() {
        for e in [
            Experiment::Simulate,
            Experiment::SweepClusters,
            Experiment::FourPeak,
            Experiment::Density,
            Experiment::MaximizeNd,
            Experiment::IndefiniteEnergy,
            Experiment::CheckStationary,
            Experiment::Constants,
        ] {
            ExperimentConfig::defaults(e).validate().unwrap();
        }
    }
}
