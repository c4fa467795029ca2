//! Quadrature rules on intervals, the circle and the 2-sphere.

use std::f64::consts::PI;

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = simpson_rule(a, b, panels);
    nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum()
}

/// Nodes and weights of the composite Simpson rule on `[a, b]`.
pub fn simpson_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    let nodes = (0..=panels).map(|i| a + h * i as f64).collect();
    let weights = (0..=panels)
        .map(|i| {
            let c = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Trapezoid rule for a `period`-periodic integrand sampled at `points`
/// equispaced nodes starting at `start`. Converges spectrally for smooth
/// periodic functions.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, start: f64, period: f64, points: usize) -> f64 {
    let h = period / points as f64;
    (0..points).map(|k| f(start + h * k as f64)).sum::<f64>() * h
}

/// Nodes and weights (summing to 1) for the uniform measure on `S^{n-1}`,
/// `n` in {2, 3}: periodic trapezoid on the circle, Simpson in the polar angle
/// times trapezoid in the azimuth on the 2-sphere.
pub fn uniform_sphere_rule(n: usize, resolution: usize) -> crate::Result<Vec<(Vec<f64>, f64)>> {
    match n {
        2 => {
            let w = 1.0 / resolution as f64;
            Ok((0..resolution)
                .map(|k| {
                    (
                        crate::sphere::circle_point(2.0 * PI * k as f64 / resolution as f64).into_inner(),
                        w,
                    )
                })
                .collect())
        }
        3 => {
            let (polar, pw) = simpson_rule(0.0, PI, resolution);
            let mut rule = Vec::with_capacity(polar.len() * resolution);
            for (p, wp) in polar.iter().zip(&pw) {
                let (sp, cp) = p.sin_cos();
                for k in 0..resolution {
                    let a = 2.0 * PI * k as f64 / resolution as f64;
                    let w = wp * sp * (2.0 * PI / resolution as f64) / (4.0 * PI);
                    rule.push((vec![cp, sp * a.cos(), sp * a.sin()], w));
                }
            }
            Ok(rule)
        }
        _ => Err(crate::Error::UnsupportedDimension(n)),
    }
}
