use std::f64::consts::PI;

use attnflow::asymptotics::{
    c2_positive_form, compute_constants, square_moments, vector_moment, verify_square_identity, verify_vector_identity,
};

/// Midpoint Riemann sum with a million panels, independent of the library's rules.
fn riemann<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let n = 1_000_000;
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn circle_constants_match_brute_force() {
    let c = compute_constants(2, 512).unwrap();
    let c1 = riemann(|t| t.cos().exp() * t.cos(), 0.0, 2.0 * PI) / (2.0 * PI);
    let total = riemann(|t| t.cos().exp(), 0.0, 2.0 * PI) / (2.0 * PI);
    assert!((c.c1 - c1).abs() < 1e-10);
    assert!((c.trace() - total).abs() < 1e-10);
    assert!(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0);
    assert_eq!(c.alpha, -c.c1 / c.c2);
}

#[test]
fn sphere_constants_match_brute_force() {
    // On the 2-sphere the polar density is sin φ / 2.
    let c = compute_constants(3, 2048).unwrap();
    let c1 = riemann(|t| t.cos().exp() * t.cos() * t.sin(), 0.0, PI) / 2.0;
    let c3 = riemann(|t| t.cos().exp() * t.sin().powi(3), 0.0, PI) / 4.0;
    assert!((c.c1 - c1).abs() < 1e-10);
    assert!((c.c3 - c3).abs() < 1e-10);
    assert!((c.c2 - c2_positive_form(3, 2048).unwrap()).abs() < 1e-12);
    assert!(c.c2 > 0.0);
}

#[test]
fn trace_is_the_mean_kernel() {
    assert!((compute_constants(2, 512).unwrap().trace() - 1.266_065_877_752_008_4).abs() < 1e-10);
    assert!((compute_constants(3, 1024).unwrap().trace() - 1.0_f64.sinh()).abs() < 1e-10);
}

#[test]
fn doubling_resolution_is_stable() {
    let (a, b) = (compute_constants(2, 512).unwrap(), compute_constants(2, 1024).unwrap());
    for (x, y) in [(a.c1, b.c1), (a.c2, b.c2), (a.c3, b.c3)] {
        assert!((x - y).abs() < 1e-12);
    }
    // Simpson converges algebraically; the same bound holds from 2048 panels.
    let (a, b) = (compute_constants(3, 2048).unwrap(), compute_constants(3, 4096).unwrap());
    for (x, y) in [(a.c1, b.c1), (a.c2, b.c2), (a.c3, b.c3)] {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn moments_along_axes() {
    for n in [2, 3] {
        let c = compute_constants(n, 512).unwrap();
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        let v = vector_moment(&y, 512).unwrap();
        assert!(v[1..].iter().all(|x| x.abs() < 1e-14));
        assert!((v[0] - c.c1).abs() < 1e-9);
        let s = square_moments(&y, 512).unwrap();
        assert!((s[0] - c.c2 - c.c3).abs() < 1e-9);
        assert!(s[1..].iter().all(|x| (x - c.c3).abs() < 1e-9));
    }
}

#[test]
fn identities_hold_for_random_directions() {
    assert!(verify_vector_identity(2, 512, 16, 3).unwrap() < 1e-9);
    assert!(verify_square_identity(2, 512, 16, 3).unwrap() < 1e-9);
    assert!(verify_vector_identity(3, 512, 16, 3).unwrap() < 1e-7);
    assert!(verify_square_identity(3, 512, 16, 3).unwrap() < 1e-7);
}

#[test]
fn unsupported_dimension() {
    assert!(compute_constants(4, 512).is_err());
    assert!(verify_vector_identity(5, 512, 4, 0).is_err());
    assert!(vector_moment(&[1.0, 0.0, 0.0, 0.0], 512).is_err());
}
