//! Integrals over the hypersurface, quermassintegrals and their values on
//! geodesic balls.

use super::geometry::GeometryFields;
use super::grid::sphere_area;
use super::RadialGraph;
use crate::error::{Error, Result};

/// `∫_M a dμ`.
pub fn integrate(fields: &GeometryFields, a: &[f64]) -> Result<f64> {
    if a.len() != fields.len() {
        return Err(Error::GridMismatch(format!(
            "field of length {} on {} nodes",
            a.len(),
            fields.len()
        )));
    }
    Ok(a.iter().enumerate().map(|(i, x)| x * fields.measure(i)).sum())
}

/// `|M|`
pub fn area(fields: &GeometryFields) -> f64 {
    (0..fields.len()).map(|i| fields.measure(i)).sum()
}

/// `∫_0^r sinh^n(s) ds`.
pub fn sinh_power_integral(n: usize, r: f64) -> f64 {
    match n {
        0 => r,
        1 => {
            // cosh r − 1 without cancellation
            let s = (0.5 * r).sinh();
            2.0 * s * s
        }
        _ => {
            let nf = n as f64;
            r.sinh().powi(n as i32 - 1) * r.cosh() / nf
                - (nf - 1.0) / nf * sinh_power_integral(n - 2, r)
        }
    }
}

/// `W_0 … W_n` of the domain bounded by the graph.
pub fn quermassintegrals(graph: &RadialGraph, fields: &GeometryFields) -> Result<Vec<f64>> {
    let grid = graph.grid();
    if fields.len() != grid.len() || fields.n != grid.n() {
        return Err(Error::GridMismatch("fields were computed on another grid".into()));
    }
    let n = grid.n();
    let inner: Vec<f64> = graph.values().iter().map(|&r| sinh_power_integral(n, r)).collect();
    let mut w = Vec::with_capacity(n + 1);
    w.push(grid.integrate_round(&inner));
    w.push(area(fields) / (n + 1) as f64);
    for k in 1..n {
        let ek = integrate(fields, &fields.e(k))?;
        w.push(recursion_step(n, k, ek, w[k - 1]));
    }
    Ok(w)
}

/// `W_{k+1} = (1/(n+1)) ∫ E_k − (k/(n+2−k)) W_{k−1}`.
fn recursion_step(n: usize, k: usize, integral_ek: f64, w_prev: f64) -> f64 {
    integral_ek / (n + 1) as f64 - k as f64 / (n + 2 - k) as f64 * w_prev
}

/// `f_k(r) = W_k(B_r)` for the geodesic ball of radius `r`.
pub fn ball_profile(n: usize, k: usize, r: f64) -> f64 {
    assert!(k <= n, "quermassintegral index {k} exceeds n = {n}");
    let omega = sphere_area(n);
    let area = omega * r.sinh().powi(n as i32);
    let coth = 1.0 / r.tanh();
    let mut w = vec![omega * sinh_power_integral(n, r), area / (n + 1) as f64];
    for j in 1..k {
        let next = recursion_step(n, j, area * coth.powi(j as i32), w[j - 1]);
        w.push(next);
    }
    w[k]
}

/// `f_k'(r) = ((n+1−k)/(n+1)) ω_n sinh^n(r) coth^k(r)`.
pub fn ball_profile_derivative(n: usize, k: usize, r: f64) -> f64 {
    let coef = (n + 1 - k) as f64 / (n + 1) as f64;
    coef * sphere_area(n) * r.sinh().powi((n - k) as i32) * r.cosh().powi(k as i32)
}

/// Radius `r` with `f_k(r) = w`.
pub fn ball_profile_inverse(n: usize, k: usize, w: f64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("quermassintegral index {k} exceeds n = {n}")));
    }
    let floor = ball_profile(n, k, 1e-8);
    if !(w.is_finite() && w > floor) {
        return Err(Error::domain(format!(
            "value {w} lies outside the range of the ball profile f_{k}"
        )));
    }
    let f = |r: f64| ball_profile(n, k, r) - w;
    let (mut lo, mut hi) = (1e-8, 1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::domain(format!("value {w} is beyond representable radii")));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 * hi {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = f(r) / ball_profile_derivative(n, k, r);
        let next = (r - step).clamp(lo, hi);
        let done = (next - r).abs() <= 1e-14 * r;
        r = next;
        if done {
            break;
        }
    }
    Ok(r)
}

/// `min_i (κ_i − 1)` over all nodes.
pub fn hconvexity_margin(fields: &GeometryFields) -> f64 {
    (0..fields.len())
        .flat_map(|i| fields.kappa(i).iter().copied())
        .fold(f64::INFINITY, f64::min)
        - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracelessNorms {
    /// `(∫ |Å|² dμ)^{1/2}`
    pub l2: f64,
    /// `max |Å|`
    pub max: f64,
}

pub fn traceless_measures(fields: &GeometryFields) -> TracelessNorms {
    let sq: f64 = (0..fields.len()).map(|i| fields.traceless_sq[i] * fields.measure(i)).sum();
    let max = fields.traceless_sq.iter().copied().fold(0.0, f64::max);
    TracelessNorms { l2: sq.max(0.0).sqrt(), max: max.sqrt() }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::geometry::geometry_fields;
    use super::super::grid::SphereGrid;
    use super::super::shapes::{generate_shape, ShapeKind};
    use super::*;

    fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let m = 200_000;
        let h = (b - a) / m as f64;
        (0..m).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn sinh_powers_match_quadrature() {
        for n in 0..7 {
            for r in [0.3, 1.0, 2.2] {
                let q = midpoint(|s| s.sinh().powi(n as i32), 0.0, r);
                assert!((sinh_power_integral(n, r) - q).abs() < 1e-9 * q.max(1.0));
            }
        }
    }

    #[test]
    fn unit_ball_closed_forms() {
        let (s, c) = (1f64.sinh(), 1f64.cosh());
        let w0 = 4.0 * PI * (s * c - 1.0) / 2.0;
        let w1 = 4.0 * PI * s * s / 3.0;
        let w2 = (4.0 * PI * s * c - w0) / 3.0;
        assert!((w0 - 5.110933).abs() < 1e-6);
        assert!((ball_profile(2, 0, 1.0) - w0).abs() < 1e-13);
        assert!((ball_profile(2, 1, 1.0) - w1).abs() < 1e-13);
        assert!((ball_profile(2, 2, 1.0) - w2).abs() < 1e-13);
    }

    #[test]
    fn profile_derivative_matches_differences() {
        for n in 2..6 {
            for k in 0..=n {
                let r = 0.8;
                let h = 1e-5;
                let fd = (ball_profile(n, k, r + h) - ball_profile(n, k, r - h)) / (2.0 * h);
                let exact = ball_profile_derivative(n, k, r);
                assert!((fd - exact).abs() < 1e-7 * exact, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for n in 2..6 {
            for k in 0..=n {
                for r in [0.5, 1.0, 2.0] {
                    let back = ball_profile_inverse(n, k, ball_profile(n, k, r)).unwrap();
                    assert!((back - r).abs() < 1e-10, "n={n} k={k} r={r}");
                }
            }
        }
        assert!(ball_profile_inverse(2, 1, -1.0).is_err());
    }

    #[test]
    fn sphere_quermassintegrals_match_profile() {
        for grid in [SphereGrid::full(32).unwrap(), SphereGrid::axisymmetric(4, 32).unwrap()] {
            let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
            let f = geometry_fields(&g).unwrap();
            let w = quermassintegrals(&g, &f).unwrap();
            for (k, wk) in w.iter().enumerate() {
                let exact = ball_profile(grid.n(), k, 1.0);
                assert!((wk - exact).abs() < 1e-10 * exact, "k={k}");
            }
        }
    }

    #[test]
    fn sphere_area_and_mean_curvature_integral() {
        let grid = SphereGrid::full(64).unwrap();
        let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
        let f = geometry_fields(&g).unwrap();
        let s = 1f64.sinh();
        assert!((area(&f) / (4.0 * PI * s * s) - 1.0).abs() < 1e-12);
        let e1 = integrate(&f, &f.e(1)).unwrap();
        assert!((e1 - 22.788236).abs() < 1e-5);
        assert_eq!(integrate(&f, &vec![0.0; f.len()]).unwrap(), 0.0);
        assert!(integrate(&f, &[1.0]).is_err());
    }

    #[test]
    fn margin_and_traceless_on_spheres() {
        let grid = SphereGrid::axisymmetric(3, 24).unwrap();
        for r0 in [0.5, 1.0, 4.0] {
            let g = generate_shape(&ShapeKind::Sphere { r0 }, &grid).unwrap();
            let f = geometry_fields(&g).unwrap();
            let margin = hconvexity_margin(&f);
            assert!((margin - (1.0 / r0.tanh() - 1.0)).abs() < 1e-10);
            let t = traceless_measures(&f);
            assert!(t.l2 < 1e-10 && t.max < 1e-10);
        }
    }
}
