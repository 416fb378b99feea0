//! Test-shape factory.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::geometry_fields;
use super::grid::{Backend, SphereGrid};
use super::measures::hconvexity_margin;
use super::RadialGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeKind {
    /// Geodesic sphere of radius `r0` about the origin.
    Sphere { r0: f64 },
    /// Geodesic sphere of radius `r0` whose center lies at distance `a` from the
    /// origin along the `θ = 0` axis.
    OffsetSphere { r0: f64, a: f64 },
    /// `r = r0 + eps · Y` with `Y` the orthonormal real spherical harmonic of
    /// degree `l` and azimuthal order `order` (zonal by default).
    PerturbedSphere {
        r0: f64,
        eps: f64,
        l: u32,
        #[serde(default)]
        order: u32,
    },
}

/// Radius in direction `θ` (angle from the center's direction) of the sphere
/// of radius `r0` centered at distance `a`, from
/// `cosh r0 = cosh a cosh r − sinh a sinh r cos θ`.
pub fn offset_sphere_radius(r0: f64, a: f64, theta: f64) -> f64 {
    let (ch0, ca, sa, ct) = (r0.cosh(), a.cosh(), a.sinh(), theta.cos());
    let g = |r: f64| ca * r.cosh() - sa * r.sinh() * ct - ch0;
    let dg = |r: f64| ca * r.sinh() - sa * r.cosh() * ct;
    let (mut lo, mut hi) = (r0 - a, r0 + a);
    let mut r = 0.5 * (lo + hi);
    if hi - lo < 1e-15 {
        return r0;
    }
    for _ in 0..100 {
        let val = g(r);
        if val > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let mut next = r - val / dg(r);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() < 1e-15 || hi - lo < 1e-13 {
            return next;
        }
        r = next;
    }
    r
}

fn factorial_ratio(l: u32, k: u32) -> f64 {
    // (l − k)! / (l + k)!
    ((l - k + 1)..=(l + k)).fold(1.0, |acc, i| acc / i as f64)
}

/// Associated Legendre function `P_l^k(x)` without the Condon-Shortley phase.
pub fn assoc_legendre(l: u32, k: u32, x: f64) -> f64 {
    let mut pmm = 1.0;
    if k > 0 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut fact = 1.0;
        for _ in 0..k {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    if l == k {
        return pmm;
    }
    let mut pmmp1 = x * (2 * k + 1) as f64 * pmm;
    for ll in (k + 2)..=l {
        let next = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + k - 1) as f64 * pmm) / (ll - k) as f64;
        pmm = pmmp1;
        pmmp1 = next;
    }
    pmmp1
}

/// Orthonormal real spherical harmonic on `S^2`, `cos(kφ)` type.
pub fn real_harmonic(l: u32, k: u32, theta: f64, phi: f64) -> f64 {
    let base = (2 * l + 1) as f64 / (4.0 * PI);
    let norm = if k == 0 {
        base.sqrt()
    } else {
        (2.0 * base * factorial_ratio(l, k)).sqrt()
    };
    norm * assoc_legendre(l, k, theta.cos()) * (k as f64 * phi).cos()
}

pub fn generate_shape(kind: &ShapeKind, grid: &SphereGrid) -> Result<RadialGraph> {
    match *kind {
        ShapeKind::Sphere { r0 } => {
            check_radius(r0)?;
            RadialGraph::constant(grid.clone(), r0)
        }
        ShapeKind::OffsetSphere { r0, a } => {
            check_radius(r0)?;
            if !(a >= 0.0 && a < r0) {
                return Err(Error::domain(format!(
                    "offset a = {a} must satisfy 0 ≤ a < r0 = {r0}"
                )));
            }
            let values = (0..grid.len())
                .map(|i| offset_sphere_radius(r0, a, grid.coords(i).0))
                .collect();
            RadialGraph::new(grid.clone(), values)
        }
        ShapeKind::PerturbedSphere { r0, eps, l, order } => {
            check_radius(r0)?;
            if order > l {
                return Err(Error::domain(format!("order {order} exceeds degree {l}")));
            }
            if order > 0 && grid.backend() == Backend::Axisymmetric {
                return Err(Error::domain("non-zonal perturbations need the full-sphere backend"));
            }
            let values = (0..grid.len())
                .map(|i| {
                    let (t, p) = grid.coords(i);
                    r0 + eps * real_harmonic(l, order, t, p)
                })
                .collect();
            let graph = RadialGraph::new(grid.clone(), values)?;
            let margin = hconvexity_margin(&geometry_fields(&graph)?);
            if margin < 0.0 {
                return Err(Error::NotHConvex { min_kappa: 1.0 + margin });
            }
            Ok(graph)
        }
    }
}

fn check_radius(r0: f64) -> Result<()> {
    if r0 > 0.0 && r0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("radius r0 = {r0} must be positive")))
    }
}

/// Draws a random h-convex test shape: an offset sphere or a low-degree
/// harmonic perturbation, retried until the generator accepts it.
pub fn random_hconvex_shape<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &SphereGrid,
) -> Result<(ShapeKind, RadialGraph)> {
    for _ in 0..1000 {
        let r0 = rng.random_range(0.6..1.8);
        let kind = if rng.random_bool(0.3) {
            ShapeKind::OffsetSphere { r0, a: rng.random_range(0.0..0.6 * r0) }
        } else {
            let l = rng.random_range(2..=4);
            let order = match grid.backend() {
                Backend::FullSphere => rng.random_range(0..=l),
                Backend::Axisymmetric => 0,
            };
            let eps = rng.random_range(-0.12..0.12) / l as f64;
            ShapeKind::PerturbedSphere { r0, eps, l, order }
        };
        match generate_shape(&kind, grid) {
            Ok(g) => return Ok((kind, g)),
            Err(Error::NotHConvex { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::domain("no h-convex shape found"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_sphere_collinear_points() {
        assert!((offset_sphere_radius(1.0, 0.3, 0.0) - 1.3).abs() < 1e-13);
        assert!((offset_sphere_radius(1.0, 0.3, PI) - 0.7).abs() < 1e-13);
    }

    #[test]
    fn offset_sphere_equator() {
        // scalar Newton oracle on cosh(1) = cosh(0.3) cosh(r)
        let target = 1f64.cosh() / 0.3f64.cosh();
        let mut r: f64 = 1.0;
        for _ in 0..50 {
            r -= (r.cosh() - target) / r.sinh();
        }
        assert!((r - 0.940783).abs() < 1e-5);
        assert!((offset_sphere_radius(1.0, 0.3, PI / 2.0) - r).abs() < 1e-13);
    }

    #[test]
    fn offset_must_stay_inside() {
        let grid = SphereGrid::axisymmetric(2, 16).unwrap();
        let err = generate_shape(&ShapeKind::OffsetSphere { r0: 1.0, a: 1.0 }, &grid);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn large_perturbation_is_rejected() {
        let grid = SphereGrid::full(16).unwrap();
        let kind = ShapeKind::PerturbedSphere { r0: 1.0, eps: 0.5, l: 2, order: 0 };
        match generate_shape(&kind, &grid) {
            Err(Error::NotHConvex { min_kappa }) => assert!(min_kappa < 1.0),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn harmonics_are_orthonormal() {
        let grid = SphereGrid::full(24).unwrap();
        let modes = [(2, 0), (2, 1), (3, 2), (4, 4)];
        for &(l1, k1) in &modes {
            for &(l2, k2) in &modes {
                let prod: Vec<f64> = (0..grid.len())
                    .map(|i| {
                        let (t, p) = grid.coords(i);
                        real_harmonic(l1, k1, t, p) * real_harmonic(l2, k2, t, p)
                    })
                    .collect();
                let expected = if (l1, k1) == (l2, k2) { 1.0 } else { 0.0 };
                assert!((grid.integrate_round(&prod) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backends_agree_on_zonal_shapes() {
        let full = SphereGrid::full(16).unwrap();
        let axi = SphereGrid::axisymmetric(2, 16).unwrap();
        let kind = ShapeKind::PerturbedSphere { r0: 1.0, eps: 0.05, l: 3, order: 0 };
        let a = generate_shape(&kind, &full).unwrap();
        let b = generate_shape(&kind, &axi).unwrap();
        for j in 0..16 {
            assert!((a.values()[j * 32 + 5] - b.values()[j]).abs() < 1e-15);
        }
    }
}
