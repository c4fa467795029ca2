//! Constants of the first-order expansion of the minimizer for `D = Id + εM`.
//!
//! With `mu0` the uniform measure, `∫ exp(x·y) x dmu0(x) = C1 y` and
//! `∫ exp(x·y) x_i² dmu0(x) = C2 y_i² + C3`. The first-order density is
//! `1 + ε(α x·Mx + β)` with `α = -C1/C2`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use serde::Serialize;

use crate::linalg::norm;
use crate::quadrature::{periodic_trapezoid, simpson, uniform_sphere_rule};
use crate::sphere::{sample_uniform, sphere_surface};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationConstants {
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub alpha: f64,
}

impl PerturbationConstants {
    /// `C2 + n C3`, equal to `∫ exp(x·y) dmu0(x)` for any unit `y`.
    pub fn trace(&self) -> f64 {
        self.c2 + self.n as f64 * self.c3
    }
}

fn check(n: usize, resolution: usize) -> Result<()> {
    if !(n == 2 || n == 3) {
        return Err(Error::UnsupportedDimension(n));
    }
    if resolution < 128 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 128, got {resolution}"
        )));
    }
    Ok(())
}

/// `∫ exp(cos φ) g(φ) dmu0` reduced to the polar angle from `y`.
fn polar_average<F: Fn(f64) -> f64>(n: usize, resolution: usize, g: F) -> f64 {
    if n == 2 {
        periodic_trapezoid(|t| t.cos().exp() * g(t), 0.0, 2.0 * PI, resolution) / (2.0 * PI)
    } else {
        let r = sphere_surface(n - 1) / sphere_surface(n);
        r * simpson(
            |t| t.cos().exp() * g(t) * t.sin().powi(n as i32 - 2),
            0.0,
            PI,
            resolution,
        )
    }
}

/// `C1`, `C2`, `C3` by quadrature (periodic trapezoid on the circle,
/// Simpson in the polar angle on the 2-sphere).
pub fn compute_constants(n: usize, resolution: usize) -> Result<PerturbationConstants> {
    check(n, resolution)?;
    let c1 = polar_average(n, resolution, |t| t.cos());
    // Average of sin² over the sphere orthogonal to y gives a factor 1/(n-1).
    let c3 = polar_average(n, resolution, |t| t.sin().powi(2)) / (n - 1) as f64;
    let c2 = polar_average(n, resolution, |t| t.cos().powi(2)) - c3;
    Ok(PerturbationConstants {
        n,
        c1,
        c2,
        c3,
        alpha: -c1 / c2,
    })
}

/// `C2` from its one-sided form
/// `2r ∫_0^{π/2} sin^{n-2}φ cosφ (cosφ cosh(cosφ) - sinh(cosφ)) dφ`,
/// whose integrand is positive, so `C2 > 0`.
pub fn c2_positive_form(n: usize, resolution: usize) -> Result<f64> {
    check(n, resolution)?;
    let r = sphere_surface(n - 1) / sphere_surface(n);
    let f = |t: f64| {
        let c = t.cos();
        t.sin().powi(n as i32 - 2) * c * (c * c.cosh() - c.sinh())
    };
    Ok(2.0 * r * simpson(f, 0.0, FRAC_PI_2, resolution))
}

fn random_directions(n: usize, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = crate::Rng::seed_from_u64(seed);
    (0..trials).map(|_| sample_uniform(n, &mut rng).into_inner()).collect()
}

/// `∫ exp(x·y) x dmu0(x)` by quadrature.
pub fn vector_moment(y: &[f64], resolution: usize) -> Result<Vec<f64>> {
    let n = y.len();
    let rule = uniform_sphere_rule(n, resolution)?;
    let mut acc = vec![0.0; n];
    for (x, w) in &rule {
        let k = w * crate::linalg::dot(x, y).exp();
        crate::linalg::axpy(k, x, &mut acc);
    }
    Ok(acc)
}

/// `∫ exp(x·y) x_i² dmu0(x)` for every `i`.
pub fn square_moments(y: &[f64], resolution: usize) -> Result<Vec<f64>> {
    let n = y.len();
    let rule = uniform_sphere_rule(n, resolution)?;
    let mut acc = vec![0.0; n];
    for (x, w) in &rule {
        let k = w * crate::linalg::dot(x, y).exp();
        for (a, xi) in acc.iter_mut().zip(x) {
            *a += k * xi * xi;
        }
    }
    Ok(acc)
}

/// Largest `||∫ exp(x·y) x dmu0 - C1 y||` over random unit `y`.
pub fn verify_vector_identity(n: usize, resolution: usize, trials: usize, seed: u64) -> Result<f64> {
    let c = compute_constants(n, resolution)?;
    let mut worst: f64 = 0.0;
    for y in random_directions(n, trials, seed) {
        let lhs = vector_moment(&y, resolution)?;
        let diff: Vec<f64> = lhs.iter().zip(&y).map(|(l, yi)| l - c.c1 * yi).collect();
        worst = worst.max(norm(&diff));
    }
    Ok(worst)
}

/// Largest `|∫ exp(x·y) x_i² dmu0 - C2 y_i² - C3|` over random `y` and all `i`.
pub fn verify_square_identity(n: usize, resolution: usize, trials: usize, seed: u64) -> Result<f64> {
    let c = compute_constants(n, resolution)?;
    let mut worst: f64 = 0.0;
    for y in random_directions(n, trials, seed) {
        let lhs = square_moments(&y, resolution)?;
        for (l, yi) in lhs.iter().zip(&y) {
            worst = worst.max((l - c.c2 * yi * yi - c.c3).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bessel values I_0(1), I_1(1), I_2(1).
    const I0: f64 = 1.266_065_877_752_008_4;
    const I1: f64 = 0.565_159_103_992_485;
    const I2: f64 = 0.135_747_669_767_038_3;

    #[test]
    fn circle_constants() {
        let c = compute_constants(2, 512).unwrap();
        assert!((c.c1 - I1).abs() < 1e-14);
        assert!((c.c2 - I2).abs() < 1e-14);
        assert!((c.c2 + 2.0 * c.c3 - I0).abs() < 1e-14);
        assert!((c.alpha + I1 / I2).abs() < 1e-12);
    }

    #[test]
    fn sphere_constants_closed_form() {
        let e = 1.0_f64.exp();
        for (res, tol) in [(512, 2e-10), (2048, 1e-12)] {
            let c = compute_constants(3, res).unwrap();
            assert!((c.c1 - 1.0 / e).abs() < tol);
            assert!((c.c3 - 1.0 / e).abs() < tol);
            assert!((c.c2 - (e / 2.0 - 3.5 / e)).abs() < tol);
            assert!((c.trace() - 1.0_f64.sinh()).abs() < tol);
        }
    }

    #[test]
    fn positive_form_agrees() {
        for n in [2, 3] {
            let c = compute_constants(n, 1024).unwrap();
            let p = c2_positive_form(n, 1024).unwrap();
            assert!((c.c2 - p).abs() < 1e-11, "n={n}: {} vs {p}", c.c2);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(compute_constants(4, 512), Err(Error::UnsupportedDimension(4))));
        assert!(compute_constants(2, 64).is_err());
    }

    #[test]
    fn axis_moments() {
        let c = compute_constants(2, 512).unwrap();
        let v = vector_moment(&[1.0, 0.0], 512).unwrap();
        assert!(v[1].abs() < 1e-15);
        let s = square_moments(&[1.0, 0.0], 512).unwrap();
        assert!((s[0] - c.c2 - c.c3).abs() < 1e-13);
        let s = square_moments(&[0.0, 1.0], 512).unwrap();
        assert!((s[0] - c.c3).abs() < 1e-13);
    }
}
