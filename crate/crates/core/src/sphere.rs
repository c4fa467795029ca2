//! Unit-sphere primitives: projection, tangent projection, spherical
//! coordinates, surface measures and uniform sampling.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm};
use crate::quadrature::simpson;
use crate::{Error, Result};

/// Norms at or below this are treated as zero by [`project_to_sphere`].
pub const MIN_NORM: f64 = 1e-300;

/// A point on the unit sphere `S^{n-1}`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Projects `x` onto the sphere. Same as [`project_to_sphere`].
    pub fn new(x: Vec<f64>) -> Result<Self> {
        project_to_sphere(&x)
    }

    /// Standard basis vector `e_i` in `R^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    /// Wraps a vector already known to have unit norm.
    pub(crate) fn from_unit(v: Vec<f64>) -> Self {
        debug_assert!((norm(&v) - 1.0).abs() < 1e-12);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    /// Antipodal point `-x`.
    pub fn antipode(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    /// Euclidean (chordal) distance to another point.
    pub fn chord(&self, other: &UnitVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A vector in the tangent space at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: UnitVector,
    pub direction: Vec<f64>,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        norm(&self.direction)
    }
}

/// `x / ||x||`
pub fn project_to_sphere(x: &[f64]) -> Result<UnitVector> {
    if x.len() < 2 {
        return Err(Error::UnsupportedDimension(x.len()));
    }
    let r = norm(x);
    if r <= MIN_NORM || !r.is_finite() {
        return Err(Error::ZeroNorm(r));
    }
    Ok(UnitVector(x.iter().map(|v| v / r).collect()))
}

/// `z - (x·z) x`
pub fn tangent_project(x: &UnitVector, z: &[f64]) -> TangentVector {
    let direction = tangent_component(x.as_slice(), z);
    TangentVector {
        base: x.clone(),
        direction,
    }
}

pub(crate) fn tangent_component(x: &[f64], z: &[f64]) -> Vec<f64> {
    let c = dot(x, z);
    x.iter().zip(z).map(|(xi, zi)| zi - c * xi).collect()
}

/// Spherical angles `(phi_1, ..., phi_{n-1})` with `phi_1..phi_{n-2}` in
/// `[0, pi]` and `phi_{n-1}` in `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalAngles(Vec<f64>);

impl SphericalAngles {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        let last = phi.len().checked_sub(1).ok_or(Error::UnsupportedDimension(1))?;
        for (index, &value) in phi.iter().enumerate() {
            let ok = if index == last {
                (0.0..2.0 * PI).contains(&value)
            } else {
                (0.0..=PI).contains(&value)
            };
            if !ok {
                return Err(Error::AngleOutOfRange { index, value });
            }
        }
        Ok(Self(phi))
    }

    /// Ambient dimension `n` (one more than the number of angles).
    pub fn dim(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The coordinate map `X_n`: `x_1 = cos phi_1`,
/// `x_i = cos phi_i * prod_{j<i} sin phi_j`, `x_n = prod_j sin phi_j`.
pub fn spherical_to_cartesian(phi: &SphericalAngles) -> UnitVector {
    let angles = phi.as_slice();
    let n = phi.dim();
    let mut x = Vec::with_capacity(n);
    let mut sin_prod = 1.0;
    for &a in angles {
        x.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    x.push(sin_prod);
    UnitVector(x)
}

/// `J X_n(phi) = prod_{i=1}^{n-2} sin^{n-1-i}(phi_i)`; identically 1 for `n = 2`.
pub fn spherical_jacobian(phi: &SphericalAngles) -> f64 {
    let n = phi.dim();
    phi.as_slice()[..n - 2]
        .iter()
        .enumerate()
        .map(|(i, a)| a.sin().powi((n - 2 - i) as i32))
        .product()
}

/// Number of Simpson panels used per level of [`sphere_surface`].
pub const SURFACE_PANELS: usize = 2048;

/// Surface measure `|S^{n-1}|` from the recursion
/// `|S^{n-1}| = |S^{n-2}| ∫_0^pi sin^{n-2}` with `|S^0| = 2`.
pub fn sphere_surface(n: usize) -> f64 {
    assert!(n >= 1, "sphere_surface needs n >= 1");
    (2..=n).fold(2.0, |area, k| {
        let exponent = (k - 2) as i32;
        area * simpson(|t| t.sin().powi(exponent), 0.0, PI, SURFACE_PANELS)
    })
}

/// Uniform point on `S^{n-1}` by normalizing a standard normal draw.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitVector {
    assert!(n >= 2, "sphere dimension must be at least 2");
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = project_to_sphere(&g) {
            return u;
        }
    }
}

/// Point `(cos theta, sin theta)` on the circle.
pub fn circle_point(theta: f64) -> UnitVector {
    UnitVector(vec![theta.cos(), theta.sin()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        let u = project_to_sphere(&[3.0, 4.0]).unwrap();
        assert!(close(u.as_slice(), &[0.6, 0.8], 1e-15));
        let e = project_to_sphere(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 0.0, 0.0]);
        assert!(matches!(project_to_sphere(&[0.0, 0.0]), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn tangent_projection_examples() {
        let e1 = UnitVector::basis(2, 0);
        assert_eq!(tangent_project(&e1, &[1.0, 0.0]).direction, vec![0.0, 0.0]);
        assert_eq!(tangent_project(&e1, &[0.0, 1.0]).direction, vec![0.0, 1.0]);
        let x = UnitVector::new(vec![1.0, 1.0]).unwrap();
        let t = tangent_project(&x, &[1.0, 0.0]);
        assert!(close(&t.direction, &[0.5, -0.5], 1e-15));
    }

    #[test]
    fn spherical_coordinates_examples() {
        let a = SphericalAngles::new(vec![FRAC_PI_4]).unwrap();
        let x = spherical_to_cartesian(&a);
        assert!(close(x.as_slice(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1e-15));

        let pole = spherical_to_cartesian(&SphericalAngles::new(vec![0.0, 1.234]).unwrap());
        assert_eq!(pole.as_slice(), &[1.0, 0.0, 0.0]);

        let top = spherical_to_cartesian(&SphericalAngles::new(vec![FRAC_PI_2, FRAC_PI_2]).unwrap());
        assert!(close(top.as_slice(), &[0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn angle_ranges_are_enforced() {
        assert!(SphericalAngles::new(vec![4.0, 0.0]).is_err());
        assert!(SphericalAngles::new(vec![1.0, 2.0 * PI]).is_err());
        assert!(SphericalAngles::new(vec![PI, 0.0]).is_ok());
        assert!(SphericalAngles::new(vec![-0.1]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(spherical_jacobian(&SphericalAngles::new(vec![2.0]).unwrap()), 1.0);
        assert_eq!(
            spherical_jacobian(&SphericalAngles::new(vec![FRAC_PI_2, 0.3]).unwrap()),
            1.0
        );
        let j = spherical_jacobian(&SphericalAngles::new(vec![FRAC_PI_6, 0.3]).unwrap());
        assert!((j - 0.5).abs() < 1e-15);
        // n = 4: sin^2(phi_1) sin(phi_2)
        let j4 = spherical_jacobian(&SphericalAngles::new(vec![FRAC_PI_6, FRAC_PI_6, 1.0]).unwrap());
        assert!((j4 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn surface_recursion() {
        assert!((sphere_surface(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_surface(3) - 4.0 * PI).abs() < 1e-10);
        assert!((sphere_surface(4) - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn jacobian_quadrature_reproduces_surface() {
        // n = 2: ∫_0^{2π} 1
        let s2 = crate::quadrature::periodic_trapezoid(
            |t| spherical_jacobian(&SphericalAngles::new(vec![t]).unwrap()),
            0.0,
            2.0 * PI,
            64,
        );
        assert!((s2 / sphere_surface(2) - 1.0).abs() < 1e-8);
        // n = 3: Simpson over phi_1 times periodic trapezoid over phi_2
        let s3 = simpson(
            |p| {
                crate::quadrature::periodic_trapezoid(
                    |q| spherical_jacobian(&SphericalAngles::new(vec![p, q]).unwrap()),
                    0.0,
                    2.0 * PI,
                    64,
                )
            },
            0.0,
            PI,
            512,
        );
        assert!((s3 / sphere_surface(3) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sampling_is_deterministic_and_unit() {
        let a = sample_uniform(3, &mut crate::rng_from_seed(42));
        let b = sample_uniform(3, &mut crate::rng_from_seed(42));
        let c = sample_uniform(3, &mut crate::rng_from_seed(43));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((norm(a.as_slice()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_mean_is_near_origin() {
        let mut rng = crate::rng_from_seed(2024);
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let u = sample_uniform(3, &mut rng);
            for (m, v) in mean.iter_mut().zip(u.as_slice()) {
                *m += v / n as f64;
            }
        }
        assert!(norm(&mean) < 0.02);
    }

    fn unit_and_vec() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..6).prop_flat_map(|n| {
            (
                proptest::collection::vec(-1.0..1.0f64, n),
                proptest::collection::vec(-10.0..10.0f64, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
            ..ProptestConfig::default()
        })]

        #[test]
        fn tangent_projection_is_idempotent((x, z) in unit_and_vec()) {
            prop_assume!(norm(&x) > 1e-3);
            let x = project_to_sphere(&x).unwrap();
            let once = tangent_project(&x, &z);
            let twice = tangent_project(&x, &once.direction);
            prop_assert!(close(&once.direction, &twice.direction, 1e-12));
            prop_assert!(x.dot(&once.direction).abs() <= 1e-10 * (1.0 + norm(&z)));
        }

        #[test]
        fn tangent_projection_inner_product_identity((x, z) in unit_and_vec()) {
            prop_assume!(norm(&x) > 1e-3);
            let x = project_to_sphere(&x).unwrap();
            let p = tangent_project(&x, &z).direction;
            let lhs = dot(&p, &z);
            let rhs = dot(&p, &p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + dot(&z, &z)));
        }

        #[test]
        fn spherical_coordinates_have_unit_norm(
            inner in proptest::collection::vec(0.0..=PI, 0..5),
            last in 0.0..(2.0 * PI),
        ) {
            let mut phi = inner;
            phi.push(last);
            let x = spherical_to_cartesian(&SphericalAngles::new(phi.clone()).unwrap());
            prop_assert!((norm(x.as_slice()) - 1.0).abs() <= 1e-12);
            // recursion: dropping the first coordinate leaves sin(phi_1) X_{n-1}(phi_rest)
            if phi.len() >= 2 {
                let rest = spherical_to_cartesian(&SphericalAngles::new(phi[1..].to_vec()).unwrap());
                let s = phi[0].sin();
                let tail: Vec<f64> = rest.as_slice().iter().map(|v| s * v).collect();
                prop_assert!(close(&x.as_slice()[1..], &tail, 1e-14));
                prop_assert!((x.as_slice()[0] - phi[0].cos()).abs() <= 1e-15);
            }
        }
    }
}
