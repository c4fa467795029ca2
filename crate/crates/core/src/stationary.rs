//! Constructors and checks for known stationary measures.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::interaction::{energy, Ensemble, InteractionMatrix};
use crate::linalg::{axpy, dot, norm};
use crate::quadrature::uniform_sphere_rule;
use crate::sphere::{circle_point, tangent_component, UnitVector};
use crate::{par, Error, Result};

/// Angle of the symmetric four-peak stationary state for `D = diag(λ1, λ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPeakSolution {
    pub phi: f64,
    /// `|tanh(λ1 cos²φ) / tanh(λ2 sin²φ) - λ2/λ1|`
    pub residual: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// `tanh(λ1 cos²φ) / tanh(λ2 sin²φ)`, which equals `λ2/λ1` at the root.
pub fn tanh_ratio(lambda1: f64, lambda2: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (lambda1 * c * c).tanh() / (lambda2 * s * s).tanh()
}

fn sinh_form(lambda1: f64, lambda2: f64, phi: f64) -> f64 {
    let s2 = phi.sin().powi(2);
    let c2 = 1.0 - s2;
    (lambda1 * c2 + lambda2 * s2).sinh() * (lambda2 - lambda1)
        + (-lambda1 * c2 + lambda2 * s2).sinh() * (lambda1 + lambda2)
}

/// Unique root in `(0, π/2)` of the stationarity condition, by bisection on
/// the sinh form (negative at 0, positive at π/2). Bisection continues past
/// a bracket of 1e-14 until the midpoint no longer moves.
pub fn four_peak_angle(lambda1: f64, lambda2: f64) -> Result<FourPeakSolution> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(Error::NonPositiveEigenvalue(lambda1, lambda2));
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sinh_form(lambda1, lambda2, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    Ok(FourPeakSolution {
        phi,
        residual: (tanh_ratio(lambda1, lambda2, phi) - lambda2 / lambda1).abs(),
        lambda1,
        lambda2,
    })
}

/// Equal-weight particles at `φ, π-φ, π+φ, 2π-φ` on the circle.
pub fn four_peak_ensemble(phi: f64) -> Ensemble {
    let points = [phi, PI - phi, PI + phi, 2.0 * PI - phi]
        .iter()
        .map(|&t| circle_point(t))
        .collect();
    Ensemble::uniform(points).expect("four equal weights")
}

/// `sum_k t_k (δ_{z_k} + δ_{-z_k})/2` over the selected eigenvectors.
pub fn eigen_mixture(d: &InteractionMatrix, subset: &[usize], t: &[f64]) -> Result<Ensemble> {
    if subset.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: subset.len(),
            got: t.len(),
        });
    }
    let mut dirs: Vec<UnitVector> = Vec::with_capacity(subset.len());
    for &k in subset {
        if k >= d.dim() {
            return Err(Error::IndexOutOfRange { index: k, len: d.dim() });
        }
        dirs.push(d.eigenvector(k));
    }
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            if dirs[a].dot(dirs[b].as_slice()).abs() > 1e-10 {
                return Err(Error::NotOrthogonal(subset[a], subset[b]));
            }
        }
    }
    if t.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::BadWeights("mixture weights must be nonnegative".into()));
    }
    let total: f64 = t.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights(format!("mixture weights sum to {total}, not 1")));
    }
    let mut points = Vec::with_capacity(2 * dirs.len());
    let mut weights = Vec::with_capacity(2 * dirs.len());
    for (z, w) in dirs.iter().zip(t) {
        points.push(z.clone());
        points.push(z.antipode());
        weights.push(w / 2.0);
        weights.push(w / 2.0);
    }
    Ensemble::new(points, weights)
}

/// Sample points `x` at which the uniform residual is evaluated.
fn probe_points(n: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..64)
            .map(|k| circle_point(2.0 * PI * k as f64 / 64.0).into_inner())
            .collect(),
        _ => {
            let mut pts = Vec::new();
            for i in 0..=8 {
                let p = PI * i as f64 / 8.0;
                let (sp, cp) = p.sin_cos();
                for k in 0..16 {
                    let a = 2.0 * PI * k as f64 / 16.0;
                    pts.push(vec![cp, sp * a.cos(), sp * a.sin()]);
                }
            }
            pts
        }
    }
}

/// Largest norm over a probe grid of `∫ exp(x·Dy) P_x Dy dmu0(y)` with `mu0`
/// the uniform measure. Vanishes exactly when all `|λ_i|` agree.
pub fn uniform_stationarity_residual(d: &InteractionMatrix, resolution: usize) -> Result<f64> {
    let n = d.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if resolution < 64 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 64, got {resolution}"
        )));
    }
    let rule = uniform_sphere_rule(n, resolution)?;
    let dy: Vec<(Vec<f64>, f64)> = rule.into_iter().map(|(y, w)| (d.apply(&y), w)).collect();
    let probes = probe_points(n);
    let norms = par::map_range(probes.len(), |p| {
        let x = &probes[p];
        let mut acc = vec![0.0; n];
        for (dyk, w) in &dy {
            axpy(w * dot(x, dyk).exp(), dyk, &mut acc);
        }
        norm(&tangent_component(x, &acc))
    });
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Energies of `δ_{e2}` and the antipodal pairs along each axis, for
/// `D = diag(-1, λ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndefiniteEnergies {
    pub lambda2: f64,
    pub single: f64,
    pub two_min: f64,
    pub two_max: f64,
}

pub fn indefinite_energy_comparison(lambda2: f64) -> Result<IndefiniteEnergies> {
    let d = InteractionMatrix::diagonal(&[-1.0, lambda2])?;
    let e1 = UnitVector::basis(2, 0);
    let e2 = UnitVector::basis(2, 1);
    let single = energy(&Ensemble::dirac(e2.clone()), &d)?;
    let two_min = energy(&Ensemble::antipodal_pair(&e1, 0.5)?, &d)?;
    let two_max = energy(&Ensemble::antipodal_pair(&e2, 0.5)?, &d)?;
    let checks = [
        (single, lambda2.exp()),
        (two_min, 1.0_f64.cosh()),
        (two_max, lambda2.cosh()),
    ];
    for (got, want) in checks {
        debug_assert!((got - want).abs() <= 1e-12 * want);
    }
    Ok(IndefiniteEnergies {
        lambda2,
        single,
        two_min,
        two_max,
    })
}

/// `λ2` at which the single cluster and the antipodal pair along `e1` have
/// equal energy, found by bisection on `[lo, hi]`.
pub fn indefinite_crossover(lo: f64, hi: f64) -> Result<f64> {
    let gap = |l: f64| -> Result<f64> {
        let e = indefinite_energy_comparison(l)?;
        Ok(e.single - e.two_min)
    };
    let (mut lo, mut hi) = (lo, hi);
    let (glo, ghi) = (gap(lo)?, gap(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::InvalidParameter(format!("no sign change on [{lo}, {hi}]")));
    }
    let increasing = glo < 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (gap(mid)? < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
