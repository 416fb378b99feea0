//! Pointwise geometry of a radial graph `r(ξ)` in the warped product
//! `dr² + λ(r)² g_{S^n}`.
//!
//! With `D r` the round gradient and `r_{;ij}` the round covariant Hessian:
//!
//! ```text
//! g_ij = r_i r_j + λ² σ_ij          v² = 1 + λ⁻² |D r|²       u = λ / v
//! h_ij = v⁻¹ ( −r_{;ij} + λλ' σ_ij + (2λ'/λ) r_i r_j )
//! ```
//!
//! Tensors are stored in the round orthonormal frame `(∂_θ, ∂_φ / sin θ)` on
//! the full sphere, and as (meridian, parallel) diagonal pairs on the
//! axisymmetric backend.

use std::sync::Arc;

use super::grid::{Backend, Derivatives};
use super::RadialGraph;
use crate::error::{Error, Result};
use crate::symfunc::{self, CurvatureSpectrum, MAX_DIM};

/// Warping function of the ambient polar metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warp {
    /// `λ = sinh r`: hyperbolic space.
    Hyperbolic,
    /// `λ = s`: Euclidean space, used for the conformal image.
    Euclidean,
}

impl Warp {
    pub fn lambda(self, r: f64) -> f64 {
        match self {
            Warp::Hyperbolic => r.sinh(),
            Warp::Euclidean => r,
        }
    }

    pub fn lambda_prime(self, r: f64) -> f64 {
        match self {
            Warp::Hyperbolic => r.cosh(),
            Warp::Euclidean => 1.0,
        }
    }
}

/// Symmetric 2-tensor `[t11, t12, t22]` in the round orthonormal frame.
pub type Sym2 = [f64; 3];

/// Per-node geometric package of a radial graph.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub n: usize,
    pub backend: Backend,
    pub warp: Warp,
    pub radius: Vec<f64>,
    /// `v = √(1 + λ⁻²|Dr|²)`
    pub grad_factor: Vec<f64>,
    /// `u = ⟨λ ∂_r, ν⟩ = λ / v`
    pub support: Vec<f64>,
    /// Frame components of `Dr`: `(r_θ, r_φ / sin θ)`.
    pub slope: Vec<[f64; 2]>,
    pub metric: Vec<Sym2>,
    pub second_form: Vec<Sym2>,
    /// Weingarten map `g⁻¹h` as `[w11, w12, w21, w22]`.
    pub weingarten: Vec<[f64; 4]>,
    /// Outward unit normal: `∂_r` component, then frame components of the
    /// tangential part (`−λ⁻² Dr / v`).
    pub normal: Vec<[f64; 3]>,
    /// `n` principal curvatures per node, ascending on the full sphere and
    /// `(κ_meridian, κ_parallel, …, κ_parallel)` on the axisymmetric backend.
    kappa: Vec<f64>,
    /// `E_0 … E_n` per node.
    esym: Vec<f64>,
    /// `|Å|² = |A|² − H²/n`
    pub traceless_sq: Vec<f64>,
    /// Area density relative to the round measure, `λⁿ v`.
    pub area_density: Vec<f64>,
    weights: Arc<[f64]>,
    /// Coordinate derivatives of `r` the fields were built from.
    pub derivs: Derivatives,
}

impl GeometryFields {
    pub fn len(&self) -> usize {
        self.radius.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radius.is_empty()
    }

    pub fn kappa(&self, node: usize) -> &[f64] {
        &self.kappa[node * self.n..(node + 1) * self.n]
    }

    pub fn spectrum(&self, node: usize) -> CurvatureSpectrum {
        CurvatureSpectrum::new(self.kappa(node).to_vec())
            .expect("fields only hold validated spectra")
    }

    /// `E_0 … E_n` at a node.
    pub fn esym(&self, node: usize) -> &[f64] {
        &self.esym[node * (self.n + 1)..(node + 1) * (self.n + 1)]
    }

    /// The field `E_k`.
    pub fn e(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.esym(i)[k]).collect()
    }

    /// `H = n E_1`
    pub fn mean_curvature(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.len()).map(|i| n * self.esym(i)[1]).collect()
    }

    /// The field `F = E_m / E_{m-1}`.
    pub fn quotient(&self, m: usize) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| symfunc::quotient_slice(self.kappa(i), m, None))
            .collect()
    }

    /// Quadrature weight times area density: the discrete `dμ` of each node.
    pub fn measure(&self, node: usize) -> f64 {
        self.weights[node] * self.area_density[node]
    }

    /// Inverse metric in the frame.
    pub fn inverse_metric(&self, node: usize) -> Sym2 {
        let [a, b, c] = self.metric[node];
        let det = a * c - b * b;
        [c / det, -b / det, a / det]
    }
}

pub fn geometry_fields(graph: &RadialGraph) -> Result<GeometryFields> {
    geometry_fields_with(graph, Warp::Hyperbolic)
}

pub fn geometry_fields_with(graph: &RadialGraph, warp: Warp) -> Result<GeometryFields> {
    let grid = graph.grid();
    let n = grid.n();
    let len = grid.len();
    let values = graph.values();
    let fail = |node: usize, reason: &str| Error::Discretization { node, reason: reason.into() };
    if let Some(node) = values.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(fail(node, "radius must be positive and finite"));
    }
    let derivs = grid.derivatives(values);

    let mut f = GeometryFields {
        n,
        backend: grid.backend(),
        warp,
        radius: values.to_vec(),
        grad_factor: Vec::with_capacity(len),
        support: Vec::with_capacity(len),
        slope: Vec::with_capacity(len),
        metric: Vec::with_capacity(len),
        second_form: Vec::with_capacity(len),
        weingarten: Vec::with_capacity(len),
        normal: Vec::with_capacity(len),
        kappa: Vec::with_capacity(len * n),
        esym: Vec::with_capacity(len * (n + 1)),
        traceless_sq: Vec::with_capacity(len),
        area_density: Vec::with_capacity(len),
        weights: grid.weights_arc(),
        derivs: Derivatives::default(),
    };

    let mut e = [0.0; MAX_DIM + 1];

    for i in 0..len {
        let r = values[i];
        let (th, _) = grid.coords(i);
        let (st, ct) = th.sin_cos();
        let lam = warp.lambda(r);
        let lamp = warp.lambda_prime(r);
        let ll = lam * lamp;

        let (p, q, hess) = match grid.backend() {
            Backend::FullSphere => {
                let rp = derivs.p[i];
                let h11 = derivs.tt[i];
                let h12 = (derivs.tp[i] - ct / st * rp) / st;
                let h22 = (derivs.pp[i] + st * ct * derivs.t[i]) / (st * st);
                (derivs.t[i], rp / st, [h11, h12, h22])
            }
            Backend::Axisymmetric => {
                let rt = derivs.t[i];
                // r_{;φφ} / sin²θ on every parallel direction
                (rt, 0.0, [derivs.tt[i], 0.0, ct / st * rt])
            }
        };
        let v = (1.0 + (p * p + q * q) / (lam * lam)).sqrt();
        let g = [lam * lam + p * p, p * q, lam * lam + q * q];
        let c = 2.0 * lamp / lam;
        let h = [
            (-hess[0] + ll + c * p * p) / v,
            (-hess[1] + c * p * q) / v,
            (-hess[2] + ll + c * q * q) / v,
        ];
        let det_g = g[0] * g[2] - g[1] * g[1];
        if !(det_g > 0.0) || !det_g.is_finite() {
            return Err(fail(i, "induced metric is not positive definite"));
        }
        let gi = [g[2] / det_g, -g[1] / det_g, g[0] / det_g];
        let w = [
            gi[0] * h[0] + gi[1] * h[1],
            gi[0] * h[1] + gi[1] * h[2],
            gi[1] * h[0] + gi[2] * h[1],
            gi[1] * h[1] + gi[2] * h[2],
        ];

        let start = f.kappa.len();
        let traceless = match grid.backend() {
            Backend::FullSphere => {
                let half = 0.5 * (w[0] - w[3]);
                let disc = (half * half + w[1] * w[2]).max(0.0);
                let mid = 0.5 * (w[0] + w[3]);
                let root = disc.sqrt();
                f.kappa.push(mid - root);
                f.kappa.push(mid + root);
                2.0 * disc
            }
            Backend::Axisymmetric => {
                let k_mer = w[0];
                let k_par = w[3];
                f.kappa.push(k_mer);
                f.kappa.extend(std::iter::repeat_n(k_par, n - 1));
                let d = k_mer - k_par;
                (n as f64 - 1.0) / n as f64 * d * d
            }
        };
        let kappa = &f.kappa[start..];
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(fail(i, "non-finite principal curvature"));
        }
        symfunc::esym_all(kappa, &mut e);
        f.esym.extend_from_slice(&e[..=n]);

        f.grad_factor.push(v);
        f.support.push(lam / v);
        f.slope.push([p, q]);
        f.metric.push(g);
        f.second_form.push(h);
        f.weingarten.push(w);
        f.normal.push([1.0 / v, -p / (lam * lam * v), -q / (lam * lam * v)]);
        f.traceless_sq.push(traceless);
        f.area_density.push(lam.powi(n as i32) * v);
    }
    f.derivs = derivs;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::super::shapes::{generate_shape, ShapeKind};
    use super::super::SphereGrid;
    use super::*;

    #[test]
    fn geodesic_sphere_is_exact() {
        for grid in [SphereGrid::full(16).unwrap(), SphereGrid::axisymmetric(4, 16).unwrap()] {
            let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
            let f = geometry_fields(&g).unwrap();
            let coth = 1.0f64.cosh() / 1.0f64.sinh();
            assert!((coth - 1.3130352854993312).abs() < 1e-15);
            for i in 0..f.len() {
                assert!((f.grad_factor[i] - 1.0).abs() < 1e-12);
                assert!((f.support[i] - 1.0f64.sinh()).abs() < 1e-10);
                for &k in f.kappa(i) {
                    assert!((k - coth).abs() < 1e-10);
                }
                assert!(f.traceless_sq[i] < 1e-20);
            }
        }
    }

    #[test]
    fn euclidean_sphere() {
        let grid = SphereGrid::full(12).unwrap();
        let g = RadialGraph::constant(grid, 0.5).unwrap();
        let f = geometry_fields_with(&g, Warp::Euclidean).unwrap();
        for i in 0..f.len() {
            assert!(f.kappa(i).iter().all(|k| (k - 2.0).abs() < 1e-12));
        }
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        let grid = SphereGrid::axisymmetric(2, 16).unwrap();
        let mut vals = vec![1.0; 16];
        vals[3] = f64::NAN;
        let g = RadialGraph::from_values_unchecked(grid, vals);
        assert!(matches!(geometry_fields(&g), Err(Error::Discretization { node: 3, .. })));
    }
}
