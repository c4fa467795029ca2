use attnflow::density::{
    asymptotic_density, compare, first_order_profile, grid_angles, grid_energy, grid_gradient, mirror_descent_step,
    solve, GridDensity, GridKernel,
};
use attnflow::rng_from_seed;
use rand::Rng;

const M: [f64; 2] = [0.0, 1.0];

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn angles_follow_the_grid_formula() {
    let n = 314;
    for (i, t) in grid_angles(n).iter().enumerate() {
        assert_eq!(
            *t,
            -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64
        );
    }
}

#[test]
fn zero_perturbation_solution_is_uniform() {
    let s = solve(0.0, M, 128, 0.1, 200).unwrap();
    assert!(linf(s.density.mass(), GridDensity::uniform(128).mass()) < 1e-8);
}

#[test]
fn solution_is_symmetric_about_both_axes() {
    let n = 316;
    let m = solve(0.3, M, n, 0.1, 500).unwrap().density;
    let mass = m.mass();
    // Grid index i sits at -π + 2πi/N; θ ↦ -θ maps i to N - i and θ ↦ π - θ
    // maps i to N/2 - i (mod N).
    let flip: Vec<f64> = (0..n).map(|i| mass[(n - i) % n]).collect();
    let mirror: Vec<f64> = (0..n).map(|i| mass[(n + n / 2 - i) % n]).collect();
    assert!(linf(mass, &flip) <= 1e-8);
    assert!(linf(mass, &mirror) <= 1e-8);
    // Peaks at θ ∈ {0, π}, troughs at ±π/2.
    let (zero, half) = (n / 2, n / 4);
    let top = mass.iter().cloned().fold(0.0, f64::max);
    let bottom = mass.iter().cloned().fold(1.0, f64::min);
    for (i, want) in [(0, top), (zero, top), (half, bottom), (3 * half, bottom)] {
        assert!((mass[i] - want).abs() < 1e-15);
    }
}

#[test]
fn steps_stay_on_the_simplex_and_descend() {
    for eps in [0.05, 0.2, 0.5] {
        for tau in [0.1, 0.5] {
            let s = solve(eps, M, 314, tau, 500).unwrap();
            assert!(s.density.mass().iter().all(|m| *m > 0.0));
            assert!((s.density.mass().iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(s.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12), "ε={eps}, τ={tau}");
        }
    }
}

#[test]
fn single_step_moves_mass_toward_low_quadratic_form() {
    let n = 64;
    let k = GridKernel::new(n, 0.1, M).unwrap();
    let m = mirror_descent_step(&GridDensity::uniform(n), &k, 0.1).unwrap();
    let u = 1.0 / n as f64;
    assert!(m.mass()[0] > u && m.mass()[n / 2] > u);
    assert!(m.mass()[n / 4] < u && m.mass()[3 * n / 4] < u);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(12);
    let n = 40;
    for _ in 0..20 {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let m = GridDensity::from_unnormalized(raw).unwrap();
        let mut delta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = delta.iter().sum::<f64>() / n as f64;
        delta.iter_mut().for_each(|v| *v -= mean);
        let eps = rng.random_range(0.0..0.5);
        let g = grid_gradient(&m, eps, M).unwrap();
        let exact: f64 = g.iter().zip(&delta).map(|(a, b)| a * b).sum();
        // The quadratic form is evaluated directly on m + tδ (which need not be
        // a density), so the central difference is exact up to round-off.
        let k = GridKernel::new(n, eps, M).unwrap();
        let quad = |v: &[f64]| -> f64 {
            (0..n)
                .map(|i| (0..n).map(|j| v[i] * k.entry(i, j) * v[j]).sum::<f64>())
                .sum()
        };
        let t = 1e-6;
        let plus: Vec<f64> = m.mass().iter().zip(&delta).map(|(a, b)| a + t * b).collect();
        let minus: Vec<f64> = m.mass().iter().zip(&delta).map(|(a, b)| a - t * b).collect();
        let fd = (quad(&plus) - quad(&minus)) / (2.0 * t);
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "{fd} vs {exact}");
        assert!((quad(m.mass()) - grid_energy(&m, eps, M).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn first_order_error_is_quadratic_in_eps() {
    let errs: Vec<f64> = [0.025, 0.05, 0.1]
        .iter()
        .map(|&eps| {
            let m = solve(eps, M, 314, 0.1, 500).unwrap().density;
            let a = asymptotic_density(eps, M, 314).unwrap();
            l2(m.mass(), a.mass()) / (eps * eps)
        })
        .collect();
    let (lo, hi) = errs
        .iter()
        .fold((f64::MAX, 0.0_f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(hi / lo < 3.0, "{errs:?}");
}

#[test]
fn first_order_error_grows_with_eps() {
    for eps in [0.05, 0.1, 0.2] {
        let a = compare(eps, M, 314, 0.1, 500).unwrap();
        let b = compare(2.0 * eps, M, 314, 0.1, 500).unwrap();
        assert!(a.first_order_error < b.first_order_error);
    }
}

#[test]
fn first_order_profile_matches_asymptotic_density_where_valid() {
    for eps in [0.0, 0.1, 0.4] {
        let p = first_order_profile(eps, M, 100).unwrap();
        let a = asymptotic_density(eps, M, 100).unwrap();
        assert!(linf(&p, a.mass()) < 1e-15);
    }
    assert!(asymptotic_density(0.6, M, 100).is_err());
    assert!(first_order_profile(0.6, M, 100).unwrap().iter().any(|v| *v < 0.0));
}

#[test]
fn overflow_is_reported() {
    assert!(grid_energy(&GridDensity::uniform(8), 1000.0, M).is_err());
}
