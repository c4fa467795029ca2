//! The interaction matrix `D`, weighted empirical measures, and the energy
//! `E_D(mu) = sum_ij w_i w_j exp(X_i·D X_j)` with its derivatives.
//!
//! Weights always sum to one, so a single Dirac at an eigenvector `z` has
//! energy `exp(lambda)` and the antipodal pair `(δ_z + δ_{-z})/2` has
//! `cosh(lambda)`. The energy carries no factor 1/2; the dissipation uses the
//! gradient `2 ∫ exp(x·Dy) P_x Dy dmu(y)` of this unscaled energy.

use serde::Serialize;

use crate::linalg::{axpy, dot, norm, symmetric_eigen, Matrix};
use crate::sphere::{tangent_component, TangentVector, UnitVector};
use crate::{par, Error, Result};

/// Largest admissible `|lambda|`: beyond it `exp(x·Dy)` can overflow.
pub const KERNEL_GUARD: f64 = 700.0;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Symmetric `D` with its eigendecomposition (eigenvalues descending).
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    matrix: Matrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl InteractionMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let eig = symmetric_eigen(&matrix)?;
        let radius = eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        if radius > KERNEL_GUARD {
            return Err(Error::KernelOverflow(radius));
        }
        Ok(Self {
            matrix: matrix.symmetrized(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(Matrix::diag(entries))
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n]).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> UnitVector {
        UnitVector::from_unit(self.eigenvectors.column(i))
    }

    /// Eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty")
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    /// `exp(x · D y)`
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.apply(y)).exp()
    }

    /// `C^T D C` with a fresh eigendecomposition. Optimizing `E_D` over the
    /// ellipsoid `C S` is the same as optimizing this matrix's energy on `S`.
    pub fn transform_ellipsoid(&self, c: &Matrix) -> Result<InteractionMatrix> {
        if !c.is_square() {
            return Err(Error::NotSquare {
                rows: c.rows(),
                cols: c.cols(),
            });
        }
        if c.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: c.rows(),
            });
        }
        let gram = symmetric_eigen(&c.transpose().matmul(c)?.symmetrized())?;
        let smax = gram.eigenvalues[0];
        let smin = *gram.eigenvalues.last().expect("non-empty");
        let cond = if smin > 0.0 {
            (smax / smin).sqrt()
        } else {
            f64::INFINITY
        };
        if !(cond < 1e12) {
            return Err(Error::SingularTransform(cond));
        }
        let ctdc = c.transpose().matmul(&self.matrix)?.matmul(c)?;
        InteractionMatrix::new(ctdc.symmetrized())
    }
}

/// Eigendecomposition as a free function: descending eigenvalues and the
/// eigenvector matrix (columns).
pub fn eigendecompose(d: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let eig = symmetric_eigen(d)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Weighted empirical measure `sum_i w_i δ_{X_i}` on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    points: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(points: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let n = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::BadWeights("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights `1/N`.
    pub fn uniform(points: Vec<UnitVector>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights)
    }

    pub fn dirac(point: UnitVector) -> Self {
        Self {
            points: vec![point],
            weights: vec![1.0],
        }
    }

    /// `t δ_z + (1 - t) δ_{-z}`
    pub fn antipodal_pair(z: &UnitVector, t: f64) -> Result<Self> {
        Self::new(vec![z.clone(), z.antipode()], vec![t, 1.0 - t])
    }

    /// `N` independent uniform points with equal weights.
    pub fn sample_uniform<R: rand::Rng + ?Sized>(n_particles: usize, dim: usize, rng: &mut R) -> Result<Self> {
        let points = (0..n_particles)
            .map(|_| crate::sphere::sample_uniform(dim, rng))
            .collect();
        Self::uniform(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same weights, new positions.
    pub fn with_points(&self, points: Vec<UnitVector>) -> Result<Self> {
        Self::new(points, self.weights.clone())
    }

    /// Push-forward through a map of the sphere into itself.
    pub fn map_points<F: FnMut(&UnitVector) -> Result<UnitVector>>(&self, f: F) -> Result<Self> {
        let points = self.points.iter().map(f).collect::<Result<Vec<_>>>()?;
        self.with_points(points)
    }

    /// Weighted mean `x̄ = sum_i w_i X_i` (not normalized).
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (p, w) in self.points.iter().zip(&self.weights) {
            axpy(*w, p.as_slice(), &mut m);
        }
        m
    }

    pub(crate) fn check_dim(&self, d: &InteractionMatrix) -> Result<()> {
        if self.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Per-particle interaction sums against a frozen ensemble.
#[derive(Debug, Clone)]
pub(crate) struct ParticleField {
    /// `m_i = sum_j w_j exp(X_i·DX_j)`
    pub partition: f64,
    /// `sum_j w_j exp(X_i·DX_j) D X_j` (not tangent-projected)
    pub drift: Vec<f64>,
}

/// `D X_j` for every particle.
pub(crate) fn images(mu: &Ensemble, d: &InteractionMatrix) -> Vec<Vec<f64>> {
    mu.points().iter().map(|p| d.apply(p.as_slice())).collect()
}

pub(crate) fn field_at(x: &[f64], mu: &Ensemble, dx: &[Vec<f64>]) -> ParticleField {
    let mut partition = 0.0;
    let mut drift = vec![0.0; x.len()];
    for (w, dxj) in mu.weights().iter().zip(dx) {
        let k = w * dot(x, dxj).exp();
        partition += k;
        axpy(k, dxj, &mut drift);
    }
    ParticleField { partition, drift }
}

/// Particle counts below this run pairwise loops on the calling thread.
const PAR_MIN_PARTICLES: usize = 64;

/// Row-major `exp(X_i·DX_j)`. Each unordered pair is evaluated once, as
/// `X_i·(DX_j)` with `i <= j`, so the matrix is exactly symmetric.
pub(crate) fn kernel_matrix(x: &[f64], dx: &[f64], dim: usize) -> Vec<f64> {
    let n = x.len() / dim;
    let mut k = vec![0.0; n * n];
    let fill_row = |i: usize, row: &mut [f64]| {
        let xi = &x[i * dim..(i + 1) * dim];
        if let [a, b] = *xi {
            // Same sum order as `dot`, without the generic loop.
            for (kij, dxj) in row[i..].iter_mut().zip(dx[i * dim..].chunks_exact(2)) {
                *kij = (a * dxj[0] + b * dxj[1]).exp();
            }
        } else {
            for (kij, dxj) in row[i..].iter_mut().zip(dx[i * dim..].chunks_exact(dim)) {
                *kij = dot(xi, dxj).exp();
            }
        }
    };
    if n >= PAR_MIN_PARTICLES {
        par::for_each_chunk(&mut k, n, fill_row);
    } else {
        k.chunks_exact_mut(n).enumerate().for_each(|(i, row)| fill_row(i, row));
    }
    for i in 0..n {
        for j in 0..i {
            k[i * n + j] = k[j * n + i];
        }
    }
    k
}

fn flatten(points: &[UnitVector]) -> Vec<f64> {
    points.iter().flat_map(|p| p.as_slice().iter().copied()).collect()
}

fn flat_images(x: &[f64], d: &InteractionMatrix) -> Vec<f64> {
    let dim = d.dim();
    let m = d.matrix();
    let mut out = vec![0.0; x.len()];
    for (xi, oi) in x.chunks_exact(dim).zip(out.chunks_exact_mut(dim)) {
        for (r, o) in oi.iter_mut().enumerate() {
            *o = dot(m.row(r), xi);
        }
    }
    out
}

/// Dot product with four independent partial sums.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn fields(mu: &Ensemble, d: &InteractionMatrix) -> Vec<ParticleField> {
    let n = mu.len();
    let dim = mu.dim();
    let x = flatten(mu.points());
    let dx = flat_images(&x, d);
    let k = kernel_matrix(&x, &dx, dim);
    // Row r holds w_j (DX_j)_r over j.
    let w = mu.weights();
    let wdx: Vec<Vec<f64>> = (0..dim)
        .map(|r| (0..n).map(|j| w[j] * dx[j * dim + r]).collect())
        .collect();
    let row = |i: usize| {
        let ki = &k[i * n..(i + 1) * n];
        ParticleField {
            partition: dot4(w, ki),
            drift: wdx.iter().map(|c| dot4(c, ki)).collect(),
        }
    };
    par::map_range_min(n, PAR_MIN_PARTICLES, row)
}

/// `E_D(mu) = sum_ij w_i w_j exp(X_i·D X_j)`
pub fn energy(mu: &Ensemble, d: &InteractionMatrix) -> Result<f64> {
    mu.check_dim(d)?;
    let x = flatten(mu.points());
    let k = kernel_matrix(&x, &flat_images(&x, d), mu.dim());
    let n = mu.len();
    let w = mu.weights();
    Ok((0..n)
        .map(|i| {
            w[i] * k[i * n..(i + 1) * n]
                .iter()
                .zip(w)
                .map(|(kij, wj)| kij * wj)
                .sum::<f64>()
        })
        .sum())
}

/// `sum_ij w_i v_j exp(X_i·D Y_j)` between two measures.
pub fn cross_energy(mu: &Ensemble, nu: &Ensemble, d: &InteractionMatrix) -> Result<f64> {
    mu.check_dim(d)?;
    nu.check_dim(d)?;
    let dy = images(nu, d);
    let rows = par::map_range(mu.len(), |i| {
        let x = mu.points()[i].as_slice();
        nu.weights()
            .iter()
            .zip(&dy)
            .map(|(w, dyj)| w * dot(x, dyj).exp())
            .sum::<f64>()
    });
    Ok(rows.iter().zip(mu.weights()).map(|(r, w)| w * r).sum())
}

/// Whether the velocity field increases or decreases the energy (`V = ±D`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[serde(alias = "max", alias = "+1")]
    Maximize,
    #[serde(alias = "min", alias = "-1")]
    Minimize,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Maximize => 1.0,
            Sign::Minimize => -1.0,
        }
    }
}

/// Normalization `J_i` of the attention sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `J_i = 1` under probability weights (the unweighted scheme's `J_i = N`).
    Constant,
    /// `J_i = sum_j w_j exp(X_i·DX_j)`, the softmax partition function.
    Partition,
}

impl Normalization {
    pub(crate) fn factor(self, field: &ParticleField) -> f64 {
        match self {
            Normalization::Constant => 1.0,
            Normalization::Partition => field.partition,
        }
    }
}

/// Attention velocity of particle `i`:
/// `sign * P_{X_i}(sum_j w_j exp(X_i·DX_j) D X_j) / J_i`.
pub fn velocity(
    mu: &Ensemble,
    d: &InteractionMatrix,
    sign: Sign,
    normalization: Normalization,
    i: usize,
) -> Result<TangentVector> {
    mu.check_dim(d)?;
    let x = mu.points().get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: mu.len(),
    })?;
    let dx = images(mu, d);
    let field = field_at(x.as_slice(), mu, &dx);
    let scale = sign.value() / normalization.factor(&field);
    let direction = tangent_component(x.as_slice(), &field.drift)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    Ok(TangentVector {
        base: x.clone(),
        direction,
    })
}

/// Energy, stationarity residuals and dissipation of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    /// `||sum_j w_j exp(X_i·DX_j) P_{X_i} D X_j||` per particle.
    pub per_particle_residual: Vec<f64>,
    pub max_residual: f64,
    pub dissipation: f64,
}

/// Evaluates the stationarity condition at every particle and returns it with
/// the energy and dissipation, all from one pass over the pairwise sums.
pub fn stationarity_residual(mu: &Ensemble, d: &InteractionMatrix) -> Result<EnergyReport> {
    mu.check_dim(d)?;
    let f = fields(mu, d);
    let mut energy = 0.0;
    let mut dissipation = 0.0;
    let mut per_particle_residual = Vec::with_capacity(mu.len());
    for ((p, w), field) in mu.points().iter().zip(mu.weights()).zip(&f) {
        let g = tangent_component(p.as_slice(), &field.drift);
        let r = norm(&g);
        energy += w * field.partition;
        dissipation += w * field.partition * 4.0 * r * r;
        per_particle_residual.push(r);
    }
    let max_residual = per_particle_residual.iter().fold(0.0_f64, |m, r| m.max(*r));
    Ok(EnergyReport {
        energy,
        per_particle_residual,
        max_residual,
        dissipation,
    })
}

/// `dE(mu; V) = sum_i sum_j w_i w_j exp(X_i·DX_j) (P_{X_i} D X_j) · V_i`
pub fn first_variation(mu: &Ensemble, d: &InteractionMatrix, v: &[Vec<f64>]) -> Result<f64> {
    mu.check_dim(d)?;
    if v.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: v.len(),
        });
    }
    if let Some(bad) = v.iter().find(|vi| vi.len() != mu.dim()) {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: bad.len(),
        });
    }
    let f = fields(mu, d);
    Ok(mu
        .points()
        .iter()
        .zip(mu.weights())
        .zip(&f)
        .zip(v)
        .map(|(((p, w), field), vi)| w * dot(&tangent_component(p.as_slice(), &field.drift), vi))
        .sum())
}

/// Mobility-weighted squared gradient `sum_i w_i m_i ||g_i||^2` with
/// `m_i = sum_j w_j exp(X_i·DX_j)` and `g_i = 2 sum_j w_j exp(X_i·DX_j) P_{X_i} D X_j`.
/// The value does not depend on the flow direction.
pub fn dissipation(mu: &Ensemble, d: &InteractionMatrix) -> Result<f64> {
    Ok(stationarity_residual(mu, d)?.dissipation)
}
