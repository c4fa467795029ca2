//! Closed-form minimizers and maximizers of `E_D` read off the spectrum of `D`.

use serde::Serialize;

use crate::interaction::InteractionMatrix;
use crate::sphere::UnitVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extremizer {
    /// `δ_z` (and `δ_{-z}`, which has the same energy).
    Dirac {
        direction: UnitVector,
        energy: f64,
    },
    /// `(δ_z + δ_{-z})/2`
    AntipodalPair {
        direction: UnitVector,
        energy: f64,
    },
    /// Any probability measure on the unit sphere of the null space of `D`.
    NullSpace {
        basis: Vec<UnitVector>,
        energy: f64,
    },
    /// The uniform measure (`D = λ Id` with `λ > 0`).
    Uniform,
    /// No closed form; the minimizer is symmetric under reflection through
    /// every eigenvector plane.
    UnknownSymmetric,
    /// Indefinite `D` with `exp(λmax) < cosh(λmin)`: the antipodal pair along
    /// `z_min` beats every Dirac, so clusters at more than one point may win.
    TwoClusterCandidate {
        direction: UnitVector,
        energy_bound: f64,
    },
    Unknown,
}

impl Extremizer {
    pub fn energy(&self) -> Option<f64> {
        match self {
            Extremizer::Dirac { energy, .. }
            | Extremizer::AntipodalPair { energy, .. }
            | Extremizer::NullSpace { energy, .. } => Some(*energy),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        self.energy().is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub minimizer: Extremizer,
    pub maximizer: Extremizer,
    /// Both extremizers are known in closed form.
    pub confident: bool,
}

fn zero_tol(d: &InteractionMatrix) -> f64 {
    1e-12 * d.spectral_radius().max(1.0)
}

/// Case analysis of the spectrum.
pub fn extremizer_catalog(d: &InteractionMatrix) -> Catalog {
    let tol = zero_tol(d);
    let n = d.dim();
    let lmin = d.lambda_min();
    let lmax = d.lambda_max();

    let minimizer = if lmin < -tol {
        Extremizer::Dirac {
            direction: d.eigenvector(n - 1),
            energy: lmin.exp(),
        }
    } else if lmin <= tol {
        let basis = (0..n)
            .filter(|&k| d.eigenvalues()[k].abs() <= tol)
            .map(|k| d.eigenvector(k))
            .collect();
        Extremizer::NullSpace { basis, energy: 1.0 }
    } else if lmax - lmin <= tol {
        Extremizer::Uniform
    } else {
        Extremizer::UnknownSymmetric
    };

    let maximizer = if lmax >= lmin.abs() {
        Extremizer::Dirac {
            direction: d.eigenvector(0),
            energy: lmax.exp(),
        }
    } else if lmax <= tol {
        Extremizer::AntipodalPair {
            direction: d.eigenvector(n - 1),
            energy: lmin.cosh(),
        }
    } else if lmax.exp() < lmin.cosh() {
        Extremizer::TwoClusterCandidate {
            direction: d.eigenvector(n - 1),
            energy_bound: lmin.cosh(),
        }
    } else {
        Extremizer::Unknown
    };

    let confident = minimizer.is_closed_form() && maximizer.is_closed_form();
    Catalog {
        minimizer,
        maximizer,
        confident,
    }
}
