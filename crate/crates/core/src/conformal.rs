//! The conformal ball model: `H^{n+1}` as `B_2(0)` with metric
//! `e^{2φ}(ds² + s² g_{S^n})`, `e^{2φ} = 16 / (4 − s²)²`.
//!
//! A radial graph `r(ξ)` maps to the Euclidean radial graph
//! `s(ξ) = 2 tanh(r(ξ)/2)`, whose geometry is computed by the same engine with
//! [`Warp::Euclidean`]. Both sides use outward normals, and the shape operators
//! are related by `e^φ h^i_j = h̃^i_j + dφ(ν̃) δ^i_j` with
//! `dφ(ν̃) = (2s / (4 − s²)) ⟨∂_s, ν̃⟩`.

use crate::error::Result;
use crate::hypersurface::{
    area, geometry_fields_with, GeometryFields, RadialGraph, Warp,
};

/// `s = 2 tanh(r/2)`
pub fn ball_radius(r: f64) -> f64 {
    2.0 * (0.5 * r).tanh()
}

/// Inverse of [`ball_radius`]: `r = log(2 + s) − log(2 − s)`.
pub fn hyperbolic_radius(s: f64) -> f64 {
    2.0 * (0.5 * s).atanh()
}

/// `φ(s) = log(4 / (4 − s²))`
pub fn conformal_exponent(s: f64) -> f64 {
    (4.0 / (4.0 - s * s)).ln()
}

/// Euclidean image of a hypersurface in `B_2(0)`.
#[derive(Debug, Clone)]
pub struct ConformalImage {
    pub graph: RadialGraph,
    /// `φ` at every node.
    pub phi: Vec<f64>,
    pub fields: GeometryFields,
}

pub fn to_ball(graph: &RadialGraph) -> Result<ConformalImage> {
    let s: Vec<f64> = graph.values().iter().map(|&r| ball_radius(r)).collect();
    let phi = s.iter().map(|&s| conformal_exponent(s)).collect();
    let image = RadialGraph::new(graph.grid().clone(), s)?;
    let fields = geometry_fields_with(&image, Warp::Euclidean)?;
    Ok(ConformalImage { graph: image, phi, fields })
}

/// Metric operator norm of a mixed 2×2 tensor `[a, b, c, d]` that is
/// self-adjoint for the induced metric: its spectral radius. Unlike the
/// singular values of the coordinate matrix this ignores the `1/sin²θ`
/// scaling of coordinate components near the poles.
fn operator_norm(m: [f64; 4]) -> f64 {
    let [a, b, c, d] = m;
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b * c).max(0.0).sqrt();
    mean.abs() + half_gap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub max: f64,
    /// `(∫ res² dμ / |M|)^{1/2}`
    pub l2: f64,
}

/// Nodewise operator norm of `e^φ h^i_j − h̃^i_j − dφ(ν̃) δ^i_j`.
pub fn conf_relation_residual(hyperbolic: &GeometryFields, image: &ConformalImage) -> ResidualNorms {
    let tilde = &image.fields;
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for i in 0..hyperbolic.len() {
        let s = tilde.radius[i];
        let ephi = image.phi[i].exp();
        let dphi = 2.0 * s / (4.0 - s * s) * tilde.normal[i][0];
        let w = hyperbolic.weingarten[i];
        let wt = tilde.weingarten[i];
        let res = operator_norm([
            ephi * w[0] - wt[0] - dphi,
            ephi * w[1] - wt[1],
            ephi * w[2] - wt[2],
            ephi * w[3] - wt[3] - dphi,
        ]);
        max = max.max(res);
        sq += res * res * hyperbolic.measure(i);
    }
    ResidualNorms { max, l2: (sq / area(hyperbolic)).sqrt() }
}

/// `min (κ̃_i − 2/(2 + s))` over nodes and principal directions.
pub fn image_convexity_margin(image: &ConformalImage) -> f64 {
    let f = &image.fields;
    (0..f.len())
        .flat_map(|i| {
            let bound = 2.0 / (2.0 + f.radius[i]);
            f.kappa(i).iter().map(move |k| k - bound)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaIdentity {
    /// `|M|`
    pub hyperbolic: f64,
    /// `∫_{M̃} e^{nφ} dμ̃`
    pub weighted_image: f64,
    /// `|M̃|`
    pub image: f64,
    pub relative_mismatch: f64,
    /// `max(|M|/|M̃|, |M̃|/|M|)`, the two-sided constant realized by the shape.
    pub comparability: f64,
}

pub fn area_identity_check(hyperbolic: &GeometryFields, image: &ConformalImage) -> AreaIdentity {
    let tilde = &image.fields;
    let n = tilde.n as f64;
    let weighted: f64 = (0..tilde.len())
        .map(|i| (n * image.phi[i]).exp() * tilde.measure(i))
        .sum();
    let a = area(hyperbolic);
    let a_img = area(tilde);
    let ratio = a / a_img;
    AreaIdentity {
        hyperbolic: a,
        weighted_image: weighted,
        image: a_img,
        relative_mismatch: (a - weighted).abs() / a,
        comparability: ratio.max(1.0 / ratio),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{generate_shape, geometry_fields, ShapeKind, SphereGrid};

    #[test]
    fn change_of_variables() {
        assert!((ball_radius(3.0f64.ln()) - 1.0).abs() < 1e-15);
        assert!((ball_radius(1.0) - 0.9242343145200195).abs() < 1e-15);
        for r in [1e-6, 0.3, 1.0, 2.0] {
            assert!((hyperbolic_radius(ball_radius(r)) - r).abs() < 1e-14 * r.max(1.0));
        }
        for s in [1e-6, 0.5, 1.0, 1.9, 1.999] {
            assert!((ball_radius(hyperbolic_radius(s)) - s).abs() < 1e-14);
        }
        assert!(conformal_exponent(1e-9).abs() < 1e-17);
    }

    #[test]
    fn operator_norm_is_the_metric_spectral_radius() {
        assert!((operator_norm([3.0, 0.0, 0.0, -5.0]) - 5.0).abs() < 1e-15);
        // diag(1, -2) in the basis (e1, e2/t) where |e2/t| = 1/t: the
        // coordinate matrix is [[1, 0], [0, -2]] conjugated by diag(1, t)
        for t in [1e-3, 1.0, 1e3] {
            let (c, sn) = (0.6f64, 0.8f64);
            // rotate, then rescale the second coordinate
            let r = [c * c + (-2.0) * sn * sn, (1.0 + 2.0) * c * sn, (1.0 + 2.0) * c * sn, sn * sn + (-2.0) * c * c];
            let m = [r[0], r[1] / t, r[2] * t, r[3]];
            assert!((operator_norm(m) - 2.0).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn round_spheres_satisfy_every_identity() {
        for r0 in [0.4, 1.0, 2.5] {
            for grid in [SphereGrid::full(16).unwrap(), SphereGrid::axisymmetric(3, 24).unwrap()] {
                let g = generate_shape(&ShapeKind::Sphere { r0 }, &grid).unwrap();
                let hyp = geometry_fields(&g).unwrap();
                let img = to_ball(&g).unwrap();
                assert!(conf_relation_residual(&hyp, &img).max < 1e-12);
                let s0 = ball_radius(r0);
                let margin = image_convexity_margin(&img);
                assert!((margin - (1.0 / s0 - 2.0 / (2.0 + s0))).abs() < 1e-12);
                assert!(area_identity_check(&hyp, &img).relative_mismatch < 1e-13);
            }
        }
    }
}
