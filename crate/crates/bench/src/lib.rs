//! Fixtures shared by the benchmarks.

use hypflow_core::hypersurface::{generate_shape, ShapeKind};
use hypflow_core::{RadialGraph, SphereGrid};

/// The degree-two zonal perturbation of the unit sphere used throughout.
pub fn perturbed(grid: &SphereGrid, eps: f64) -> RadialGraph {
    generate_shape(&ShapeKind::PerturbedSphere { r0: 1.0, eps, l: 2, order: 0 }, grid)
        .expect("small perturbations of the unit sphere are h-convex")
}

/// A fixed spread of h-convex principal curvatures in dimension `n`.
pub fn spectrum(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.37 * i as f64).collect()
}
