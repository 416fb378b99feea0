//! Simulation and verification toolkit for the locally constrained curvature
//! flow of horospherically convex hypersurfaces in hyperbolic space `H^{n+1}`.
//!
//! Hypersurfaces are star-shaped radial graphs `r(ξ)` over `S^n`, either on a
//! full latitude-longitude grid (`n = 2`) or as axisymmetric profiles (any
//! `n ≥ 2`). On top of the discrete geometry the crate provides
//! quermassintegrals and their ball profiles, the flow
//! `∂_t X = (cosh r / F − u) ν` with `F = E_m / E_{m-1}`, runtime monitors for
//! its a priori estimates, the Euclidean conformal image in `B_2(0)`, and the
//! stability experiment comparing distance to a geodesic sphere against the
//! quermassintegral deficit.

// Negated comparisons are deliberate: NaN must fail every positivity test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conformal;
pub mod error;
pub mod flow;
pub mod hyperbolic;
pub mod hypersurface;
mod optim;
pub mod stability;
pub mod symfunc;

pub use error::{Error, Result};
pub use flow::{FlowRun, FlowState, FlowTrace, StopCriteria};
pub use hypersurface::{
    Backend, GeometryFields, RadialGraph, ShapeSpec, SphereGrid, Warp,
};
pub use conformal::ConformalImage;
pub use stability::{SphereFit, SweepRecord};
pub use symfunc::CurvatureSpectrum;
