//! Probability vectors on an equispaced grid of the circle and the mirror
//! descent minimizer of `Ẽ(m) = sum_ij exp(x_i·(Id + εM)x_j) m_i m_j`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::asymptotics::compute_constants;
use crate::interaction::KERNEL_GUARD;
use crate::{par, Error, Result};

/// Grid size used for the density experiments.
pub const DEFAULT_GRID: usize = 314;
pub const DEFAULT_TAU: f64 = 0.1;
pub const DEFAULT_ITERS: usize = 500;

/// `θ_i = -π + 2πi/N`
pub fn grid_angles(n_points: usize) -> Vec<f64> {
    (0..n_points)
        .map(|i| -PI + 2.0 * PI * i as f64 / n_points as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity {
    angles: Vec<f64>,
    mass: Vec<f64>,
}

impl GridDensity {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::BadWeights("grid mass must be finite and nonnegative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights(format!("grid mass sums to {total}, not 1")));
        }
        Ok(Self {
            angles: grid_angles(mass.len()),
            mass,
        })
    }

    pub fn uniform(n_points: usize) -> Self {
        Self {
            angles: grid_angles(n_points),
            mass: vec![1.0 / n_points as f64; n_points],
        }
    }

    /// All mass on grid point `i`.
    pub fn dirac(n_points: usize, i: usize) -> Self {
        let mut mass = vec![0.0; n_points];
        mass[i] = 1.0;
        Self {
            angles: grid_angles(n_points),
            mass,
        }
    }

    /// Normalizes nonnegative values onto the simplex.
    pub fn from_unnormalized(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeMass(*v));
        }
        let total: f64 = values.iter().sum();
        Self::new(values.into_iter().map(|v| v / total).collect())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Euclidean distance between mass vectors.
    pub fn l2_distance(&self, other: &GridDensity) -> f64 {
        l2(&self.mass, &other.mass)
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Kernel matrix `K_ij = exp(x_i·(Id + εM)x_j)` for a diagonal `M`.
#[derive(Debug, Clone)]
pub struct GridKernel {
    n_points: usize,
    eps: f64,
    m_diag: [f64; 2],
    entries: Vec<f64>,
}

impl GridKernel {
    pub fn new(n_points: usize, eps: f64, m_diag: [f64; 2]) -> Result<Self> {
        let bound = 1.0 + eps.abs() * m_diag[0].abs().max(m_diag[1].abs());
        if !(bound <= KERNEL_GUARD) {
            return Err(Error::KernelOverflow(bound));
        }
        let angles = grid_angles(n_points);
        let pts: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
        let (a, b) = (1.0 + eps * m_diag[0], 1.0 + eps * m_diag[1]);
        let rows = par::map_range(n_points, |i| {
            let (xi, yi) = pts[i];
            pts.iter()
                .map(|(xj, yj)| (a * xi * xj + b * yi * yj).exp())
                .collect::<Vec<f64>>()
        });
        Ok(Self {
            n_points,
            eps,
            m_diag,
            entries: rows.concat(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m_diag(&self) -> [f64; 2] {
        self.m_diag
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_points + j]
    }

    fn apply(&self, m: &[f64]) -> Vec<f64> {
        par::map_range(self.n_points, |i| {
            let row = &self.entries[i * self.n_points..(i + 1) * self.n_points];
            row.iter().zip(m).map(|(k, mj)| k * mj).sum()
        })
    }

    fn check(&self, m: &GridDensity) -> Result<()> {
        if m.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: m.len(),
            });
        }
        Ok(())
    }

    pub fn energy(&self, m: &GridDensity) -> Result<f64> {
        self.check(m)?;
        Ok(self.apply(&m.mass).iter().zip(&m.mass).map(|(km, mi)| km * mi).sum())
    }

    /// `2 K m`
    pub fn gradient(&self, m: &GridDensity) -> Result<Vec<f64>> {
        self.check(m)?;
        Ok(self.apply(&m.mass).into_iter().map(|v| 2.0 * v).collect())
    }
}

pub fn grid_energy(m: &GridDensity, eps: f64, m_diag: [f64; 2]) -> Result<f64> {
    GridKernel::new(m.len(), eps, m_diag)?.energy(m)
}

pub fn grid_gradient(m: &GridDensity, eps: f64, m_diag: [f64; 2]) -> Result<Vec<f64>> {
    GridKernel::new(m.len(), eps, m_diag)?.gradient(m)
}

/// `softmax(log m - τ g)`, evaluated with the largest exponent shifted to 0.
pub fn softmax_step(m: &GridDensity, g: &[f64], tau: f64) -> GridDensity {
    let logits: Vec<f64> = m.mass.iter().zip(g).map(|(mi, gi)| mi.ln() - tau * gi).collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    GridDensity {
        angles: m.angles.clone(),
        mass: w.into_iter().map(|v| v / total).collect(),
    }
}

pub fn mirror_descent_step(m: &GridDensity, kernel: &GridKernel, tau: f64) -> Result<GridDensity> {
    let g = kernel.gradient(m)?;
    Ok(softmax_step(m, &g, tau))
}

#[derive(Debug, Clone, Serialize)]
pub struct DensitySolution {
    pub density: GridDensity,
    /// Energy before the first step and after each step.
    pub energies: Vec<f64>,
}

/// Mirror descent from the uniform vector.
pub fn solve(eps: f64, m_diag: [f64; 2], n_points: usize, tau: f64, iters: usize) -> Result<DensitySolution> {
    if n_points == 0 || !(tau >= 0.0) {
        return Err(Error::InvalidParameter(
            "grid size must be positive and tau nonnegative".into(),
        ));
    }
    let kernel = GridKernel::new(n_points, eps, m_diag)?;
    let mut m = GridDensity::uniform(n_points);
    let mut energies = Vec::with_capacity(iters + 1);
    energies.push(kernel.energy(&m)?);
    for _ in 0..iters {
        m = mirror_descent_step(&m, &kernel, tau)?;
        energies.push(kernel.energy(&m)?);
    }
    Ok(DensitySolution { density: m, energies })
}

/// Grid samples of the first-order minimizer `(1 + ε(α x·Mx + β)) dmu0` on the
/// circle, with `β = -α tr(M)/2` so the perturbation has zero mean.
pub fn asymptotic_density(eps: f64, m_diag: [f64; 2], n_points: usize) -> Result<GridDensity> {
    GridDensity::from_unnormalized(first_order_profile(eps, m_diag, n_points)?)
}

/// Grid masses `(1 + ε(α x·Mx + β)) / N` without the sign check. Past the
/// range where the expansion stays nonnegative this is a signed profile,
/// still usable as an ℓ² reference.
pub fn first_order_profile(eps: f64, m_diag: [f64; 2], n_points: usize) -> Result<Vec<f64>> {
    let c = compute_constants(2, 512)?;
    let beta = -c.alpha * (m_diag[0] + m_diag[1]) / 2.0;
    Ok(grid_angles(n_points)
        .iter()
        .map(|t| {
            let (s, co) = t.sin_cos();
            let q = m_diag[0] * co * co + m_diag[1] * s * s;
            (1.0 + eps * (c.alpha * q + beta)) / n_points as f64
        })
        .collect())
}

/// Grid density proportional to `exp(Υ cos 2θ)`.
pub fn conjectured_density(upsilon: f64, n_points: usize) -> Result<GridDensity> {
    if !upsilon.is_finite() {
        return Err(Error::NonFinite(format!("fitted exponent {upsilon}")));
    }
    let values: Vec<f64> = grid_angles(n_points)
        .iter()
        .map(|t| (upsilon * (2.0 * t).cos() - upsilon.abs()).exp())
        .collect();
    GridDensity::from_unnormalized(values)
}

/// Least-squares slope of `log m` against `cos 2θ` (with intercept).
pub fn fit_upsilon(m: &GridDensity) -> f64 {
    let x: Vec<f64> = m.angles.iter().map(|t| (2.0 * t).cos()).collect();
    let y: Vec<f64> = m.mass.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares `(a, b)` in `Υ ≈ aε + bε²`.
pub fn fit_upsilon_polynomial(eps: &[f64], upsilon: &[f64]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (e, u) in eps.iter().zip(upsilon) {
        let (f1, f2) = (*e, e * e);
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        r1 += f1 * u;
        r2 += f2 * u;
    }
    let det = s11 * s22 - s12 * s12;
    ((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det)
}

/// Mirror descent result next to the first-order and fitted conjectured forms.
#[derive(Debug, Clone, Serialize)]
pub struct DensityComparison {
    pub eps: f64,
    pub solution: GridDensity,
    /// First-order masses; may be negative for large `ε`.
    pub first_order: Vec<f64>,
    pub conjectured: GridDensity,
    pub upsilon: f64,
    pub first_order_error: f64,
    pub conjectured_error: f64,
}

pub fn compare(eps: f64, m_diag: [f64; 2], n_points: usize, tau: f64, iters: usize) -> Result<DensityComparison> {
    let solution = solve(eps, m_diag, n_points, tau, iters)?.density;
    let first_order = first_order_profile(eps, m_diag, n_points)?;
    let upsilon = fit_upsilon(&solution);
    let conjectured = conjectured_density(upsilon, n_points)?;
    Ok(DensityComparison {
        eps,
        first_order_error: l2(&solution.mass, &first_order),
        conjectured_error: solution.l2_distance(&conjectured),
        solution,
        first_order,
        conjectured,
        upsilon,
    })
}
