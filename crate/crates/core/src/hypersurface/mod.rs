//! Star-shaped hypersurfaces of `H^{n+1}` as radial graphs over `S^n`.

mod geometry;
mod grid;
mod inradius;
mod measures;
mod shapes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{geometry_fields, geometry_fields_with, GeometryFields, Sym2, Warp};
pub use grid::{sphere_area, Backend, Derivatives, SphereGrid};
pub(crate) use inradius::{center_coords, center_point, DistanceProbe};
pub use inradius::{inradius, radius_extremes, recenter, surface_point, surface_points, Inball};
pub use measures::{
    area, ball_profile, ball_profile_derivative, ball_profile_inverse, hconvexity_margin,
    integrate, quermassintegrals, sinh_power_integral, traceless_measures, TracelessNorms,
};
pub use shapes::{
    assoc_legendre, generate_shape, offset_sphere_radius, random_hconvex_shape, real_harmonic,
    ShapeKind,
};

/// Radial function `r > 0` sampled on a [`SphereGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: SphereGrid,
    values: Vec<f64>,
}

impl RadialGraph {
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Discretization {
                node,
                reason: format!("radius {} is not positive and finite", values[node]),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: SphereGrid, r: f64) -> Result<Self> {
        let values = vec![r; grid.len()];
        Self::new(grid, values)
    }

    /// Skips validation; the geometry routines still reject bad nodes.
    pub fn from_values_unchecked(grid: SphereGrid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn backend(&self) -> Backend {
        self.grid.backend()
    }

    pub fn min_radius(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Serializable description of a discretized test shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub n: usize,
    pub backend: Backend,
    #[serde(rename = "J")]
    pub cells: usize,
    pub shape: ShapeKind,
}

impl ShapeSpec {
    pub fn build(&self) -> Result<RadialGraph> {
        let grid = SphereGrid::new(self.backend, self.n, self.cells)?;
        generate_shape(&self.shape, &grid)
    }
}
