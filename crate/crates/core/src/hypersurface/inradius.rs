//! Inball search, distance extremes about a center, and recentering.

use super::grid::Backend;
use super::RadialGraph;
use crate::error::{Error, Result};
use crate::hyperbolic::{self, Point, ORIGIN};
use crate::optim::nelder_mead;

/// Nodes whose distances are polished by continuous local search.
const CANDIDATES: usize = 12;

pub fn surface_point(graph: &RadialGraph, idx: usize) -> Point {
    hyperbolic::from_polar(graph.values()[idx], graph.grid().direction(idx))
}

pub fn surface_points(graph: &RadialGraph) -> Vec<Point> {
    (0..graph.values().len()).map(|i| surface_point(graph, i)).collect()
}

/// Largest geodesic ball inside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Inball {
    pub rho_minus: f64,
    pub center: Point,
    pub converged: bool,
}

/// Search coordinates of a center: `R^3` on the full sphere, the symmetry
/// axis otherwise.
pub(crate) fn center_point(backend: Backend, x: &[f64]) -> Point {
    match backend {
        Backend::FullSphere => hyperbolic::lift([x[0], x[1], x[2]]),
        Backend::Axisymmetric => hyperbolic::lift([0.0, 0.0, x[0]]),
    }
}

pub(crate) fn center_coords(backend: Backend, c: &Point) -> Vec<f64> {
    match backend {
        Backend::FullSphere => vec![c[1], c[2], c[3]],
        Backend::Axisymmetric => vec![c[3]],
    }
}

/// Area-weighted Lorentzian centroid of the surface nodes.
pub(crate) fn lorentz_centroid(graph: &RadialGraph) -> Point {
    let grid = graph.grid();
    let n = grid.n() as i32;
    let mut s = [0.0; 4];
    for (i, w) in grid.weights().iter().enumerate() {
        let p = surface_point(graph, i);
        let wt = w * graph.values()[i].sinh().powi(n);
        for (a, b) in s.iter_mut().zip(p.iter()) {
            *a += wt * b;
        }
    }
    let norm = (-hyperbolic::minkowski(&s, &s)).sqrt();
    if norm > 0.0 {
        s.map(|x| x / norm)
    } else {
        ORIGIN
    }
}

/// Smallest and largest distance from `c` to the surface.
pub(crate) struct DistanceProbe<'a> {
    graph: &'a RadialGraph,
    points: Vec<Point>,
    ext: Vec<f64>,
}

impl<'a> DistanceProbe<'a> {
    pub fn new(graph: &'a RadialGraph) -> Self {
        Self {
            graph,
            points: surface_points(graph),
            ext: graph.grid().extend(graph.values()),
        }
    }

    fn continuous_point(&self, theta: f64, phi: f64) -> Point {
        let grid = self.graph.grid();
        let theta = theta.clamp(0.0, std::f64::consts::PI);
        let r = grid.interpolate_extended(&self.ext, theta, phi);
        let (st, ct) = theta.sin_cos();
        hyperbolic::from_polar(r, [st * phi.cos(), st * phi.sin(), ct])
    }

    /// Node-sampled extremes.
    pub fn coarse(&self, c: &Point) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let d = hyperbolic::distance(c, p);
            (lo.min(d), hi.max(d))
        })
    }

    /// Extremes polished between nodes by local search on the interpolated
    /// surface.
    pub fn refined(&self, c: &Point) -> (f64, f64) {
        let d: Vec<f64> = self.points.iter().map(|p| hyperbolic::distance(c, p)).collect();
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let k = CANDIDATES.min(order.len());
        let lo = order[..k]
            .iter()
            .map(|&i| self.polish(c, i, 1.0))
            .fold(d[order[0]], f64::min);
        let hi = order[order.len() - k..]
            .iter()
            .map(|&i| -self.polish(c, i, -1.0))
            .fold(d[order[order.len() - 1]], f64::max);
        (lo, hi)
    }

    fn polish(&self, c: &Point, node: usize, sign: f64) -> f64 {
        let grid = self.graph.grid();
        let (th, ph) = grid.coords(node);
        let h = grid.spacing();
        let value = |x: &[f64]| {
            let phi = if x.len() > 1 { x[1] } else { 0.0 };
            sign * hyperbolic::distance(c, &self.continuous_point(x[0], phi))
        };
        let start: Vec<f64> = match grid.backend() {
            Backend::FullSphere => vec![th, ph],
            Backend::Axisymmetric => vec![th],
        };
        nelder_mead(value, &start, 0.5 * h, 1e-9, 0.0, 200).value
    }
}

/// Smallest and largest radius between the nodes, from local search on the
/// interpolated graph.
pub fn radius_extremes(graph: &RadialGraph) -> (f64, f64) {
    DistanceProbe::new(graph).refined(&ORIGIN)
}

/// Maximizes `c ↦ min_{x ∈ M} d(c, x)` with starts at the origin and the
/// Lorentzian centroid, then polishes on the interpolated surface.
pub fn inradius(graph: &RadialGraph) -> Inball {
    let backend = graph.backend();
    let probe = DistanceProbe::new(graph);
    let scale = graph.max_radius().sinh().max(1e-3);
    let starts = [ORIGIN, lorentz_centroid(graph)];
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for s in &starts {
        let x0 = center_coords(backend, s);
        let m = nelder_mead(
            |x: &[f64]| -probe.coarse(&center_point(backend, x)).0,
            &x0,
            0.1 * scale,
            1e-10,
            1e-13,
            2000,
        );
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value, m.converged));
        }
    }
    let (x, _, coarse_ok) = best.expect("at least one start");
    let m = nelder_mead(
        |x: &[f64]| -probe.refined(&center_point(backend, x)).0,
        &x,
        0.02 * scale * graph.grid().spacing(),
        1e-10,
        1e-13,
        400,
    );
    Inball {
        rho_minus: -m.value,
        center: center_point(backend, &m.x),
        converged: coarse_ok && m.converged,
    }
}

/// Re-expresses the surface as a radial graph about `center` on the same grid.
pub fn recenter(graph: &RadialGraph, center: &Point) -> Result<RadialGraph> {
    let grid = graph.grid();
    if grid.backend() == Backend::Axisymmetric && (center[1].abs() + center[2].abs()) > 1e-12 {
        return Err(Error::domain("axisymmetric graphs can only be recentered along the axis"));
    }
    let ext = grid.extend(graph.values());
    let old_radius = |p: &Point| -> f64 {
        let (_, dir) = hyperbolic::to_polar(p);
        let theta = dir[2].clamp(-1.0, 1.0).acos();
        let phi = dir[1].atan2(dir[0]);
        grid.interpolate_extended(&ext, theta, phi)
    };
    let gap = |t: f64, dir: [f64; 3]| -> f64 {
        let p = hyperbolic::geodesic_from(center, dir, t);
        hyperbolic::radius(&p) - old_radius(&p)
    };
    let reach = 2.0 * graph.max_radius() + hyperbolic::radius(center) + 1.0;
    let mut values = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let dir = grid.direction(idx);
        if gap(0.0, dir) >= 0.0 {
            return Err(Error::domain("new center lies outside the domain"));
        }
        let (mut lo, mut hi) = (0.0, reach);
        let (mut glo, mut ghi) = (gap(lo, dir), gap(hi, dir));
        if ghi <= 0.0 {
            return Err(Error::domain("ray from the new center does not leave the domain"));
        }
        let mut root = None;
        for it in 0..100 {
            // regula falsi with bisection every third step
            let mid = if it % 3 == 2 { 0.5 * (lo + hi) } else { lo - glo * (hi - lo) / (ghi - glo) };
            let gm = gap(mid, dir);
            if gm == 0.0 {
                root = Some(mid);
                break;
            }
            if gm < 0.0 {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        values.push(root.unwrap_or_else(|| lo - glo * (hi - lo) / (ghi - glo)));
    }
    RadialGraph::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::super::grid::SphereGrid;
    use super::super::shapes::{generate_shape, ShapeKind};
    use super::*;

    #[test]
    fn sphere_inball_is_itself() {
        let grid = SphereGrid::full(24).unwrap();
        let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
        let ball = inradius(&g);
        assert!((ball.rho_minus - 1.0).abs() < 1e-8);
        assert!(hyperbolic::radius(&ball.center) < 1e-6);
    }

    #[test]
    fn offset_sphere_inball() {
        for grid in [SphereGrid::full(32).unwrap(), SphereGrid::axisymmetric(2, 48).unwrap()] {
            let g = generate_shape(&ShapeKind::OffsetSphere { r0: 1.0, a: 0.3 }, &grid).unwrap();
            let ball = inradius(&g);
            assert!((ball.rho_minus - 1.0).abs() < 1e-6, "{}", ball.rho_minus);
            assert!((hyperbolic::radius(&ball.center) - 0.3).abs() < 1e-4);
            assert!(ball.center[3] > 0.0);
        }
    }

    #[test]
    fn recentering_an_offset_sphere_gives_a_centered_one() {
        let grid = SphereGrid::axisymmetric(3, 64).unwrap();
        let g = generate_shape(&ShapeKind::OffsetSphere { r0: 1.0, a: 0.3 }, &grid).unwrap();
        let c = hyperbolic::from_polar(0.3, [0.0, 0.0, 1.0]);
        let moved = recenter(&g, &c).unwrap();
        for (i, r) in moved.values().iter().enumerate() {
            assert!((r - 1.0).abs() < 1e-8, "node {i}: {r}");
        }
    }

    #[test]
    fn center_outside_is_rejected() {
        let grid = SphereGrid::axisymmetric(2, 16).unwrap();
        let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
        let c = hyperbolic::from_polar(2.0, [0.0, 0.0, 1.0]);
        assert!(recenter(&g, &c).is_err());
    }
}
