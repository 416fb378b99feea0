//! Residual checks of the flow against its variational formulas and the
//! evolution equation of `F`.

use super::{normal_speed, quotient_field, rk4_advance, FlowState};
use crate::error::Result;
use crate::hypersurface::{
    geometry_fields, integrate, quermassintegrals, Backend, Derivatives, GeometryFields,
};
use crate::symfunc::{self, MAX_DIM};

/// Time derivatives of the quermassintegrals against
/// `d/dt W_k = ((n+1−k)/(n+1)) ∫ f E_k dμ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalReport {
    /// Centered difference of `W_k` along the flow.
    pub finite_difference: Vec<f64>,
    /// The integral formula.
    pub formula: Vec<f64>,
    /// `|difference − formula|` over `((n+1−k)/(n+1)) ∫ |f| E_k dμ`; absolute when `f` vanishes.
    pub residual: Vec<f64>,
    /// `|∫ f E_m dμ| / ∫ |f| E_m dμ`, zero by the Minkowski formula.
    pub minkowski_ratio: f64,
}

/// Below this `∫ |f| E_k dμ` the residuals are reported as absolute values.
const SCALE_FLOOR: f64 = 1e-9;

pub fn variational_check(state: &FlowState, h_t: f64) -> Result<VariationalReport> {
    let n = state.graph().n();
    let m = state.m();
    let fields = state.fields();
    let f = &state.speed().normal;
    let fwd = rk4_advance(state.graph(), m, h_t)?;
    let bwd = rk4_advance(state.graph(), m, -h_t)?;
    let w_fwd = quermassintegrals(&fwd, &geometry_fields(&fwd)?)?;
    let w_bwd = quermassintegrals(&bwd, &geometry_fields(&bwd)?)?;

    let mut report = VariationalReport {
        finite_difference: Vec::with_capacity(n + 1),
        formula: Vec::with_capacity(n + 1),
        residual: Vec::with_capacity(n + 1),
        minkowski_ratio: 0.0,
    };
    for k in 0..=n {
        let ek = fields.e(k);
        let coef = (n + 1 - k) as f64 / (n + 1) as f64;
        let signed: Vec<f64> = f.iter().zip(&ek).map(|(f, e)| f * e).collect();
        let unsigned: Vec<f64> = signed.iter().map(|x| x.abs()).collect();
        let formula = coef * integrate(fields, &signed)?;
        let scale = coef * integrate(fields, &unsigned)?;
        let fd = (w_fwd[k] - w_bwd[k]) / (2.0 * h_t);
        let diff = (fd - formula).abs();
        report.finite_difference.push(fd);
        report.formula.push(formula);
        report.residual.push(if scale > SCALE_FLOOR { diff / scale } else { diff });
        if k == m && scale > SCALE_FLOOR {
            report.minkowski_ratio = (formula / scale).abs();
        }
    }
    Ok(report)
}

/// Nodewise residual of the evolution equation of `F` under the flow,
///
/// ```text
/// 𝓛F = (1 − F^{ij}g_ij) u + (λ'/F)(F² − F^{ij}(h²)_ij) + (2/F) F^{ij} ∇_iF ∇_j(λ'/F),
/// 𝓛  = ∂_t − (λ'/F²) F^{ij}∇²_ij − ⟨λ∂_r, ∇·⟩,
/// ```
///
/// where `∂_t` is the normal-gauge derivative, obtained from the graph-gauge
/// one by subtracting `⟨∇F, T⟩`, `T = f(v∂_r − ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseReport {
    pub residual: Vec<f64>,
    pub max: f64,
    /// `(∫ residual² dμ)^{1/2}`
    pub l2: f64,
    /// The tangential correction `⟨∇F, T⟩` per node.
    pub gauge_term: Vec<f64>,
    /// Node of largest `F`.
    pub max_f_node: usize,
}

struct Node {
    i: usize,
    theta: f64,
    big_f: f64,
    speed: f64,
}

/// Per-node data of the evolution identity, independent of the backend.
struct Terms {
    /// `F^{ij}∇²_ij F`
    hessian: f64,
    /// `⟨λ∂_r, ∇F⟩`
    radial: f64,
    /// `F^{ij}∇_iF ∇_j(λ'/F)`
    cross: f64,
    /// `⟨∇F, T⟩`
    gauge: f64,
}

pub fn pointwise_f_check(state: &FlowState, h_t: f64) -> Result<PointwiseReport> {
    let m = state.m();
    let fields = state.fields();
    let grid = state.graph().grid();
    let f_now = quotient_field(fields, m)?;
    let f_fwd = quotient_field(&geometry_fields(&rk4_advance(state.graph(), m, h_t)?)?, m)?;
    let f_bwd = quotient_field(&geometry_fields(&rk4_advance(state.graph(), m, -h_t)?)?, m)?;
    let speed = normal_speed(fields, m)?.normal;
    let df = grid.derivatives(&f_now);

    let mut residual = Vec::with_capacity(fields.len());
    let mut gauge_term = Vec::with_capacity(fields.len());
    let mut grad = [0.0; MAX_DIM];
    for i in 0..fields.len() {
        let kappa = fields.kappa(i);
        let n = kappa.len();
        let big_f = symfunc::quotient_slice(kappa, m, Some(&mut grad[..n]))?;
        let lamp = fields.radius[i].cosh();
        let node = Node { i, theta: grid.coords(i).0, big_f, speed: speed[i] };
        let terms = match fields.backend {
            Backend::FullSphere => full_sphere_terms(fields, &df, &node, &grad[..n]),
            Backend::Axisymmetric => axisymmetric_terms(fields, &df, &node, &grad[..n]),
        };
        let trace_g: f64 = grad[..n].iter().sum();
        let trace_h2: f64 = grad[..n].iter().zip(kappa).map(|(d, k)| d * k * k).sum();
        let dt_graph = (f_fwd[i] - f_bwd[i]) / (2.0 * h_t);
        let lhs = dt_graph - terms.gauge - lamp / (big_f * big_f) * terms.hessian - terms.radial;
        let rhs = (1.0 - trace_g) * fields.support[i]
            + lamp / big_f * (big_f * big_f - trace_h2)
            + 2.0 / big_f * terms.cross;
        residual.push(lhs - rhs);
        gauge_term.push(terms.gauge);
    }
    let max = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let sq: Vec<f64> = residual.iter().map(|x| x * x).collect();
    let l2 = integrate(fields, &sq)?.sqrt();
    let max_f_node = (0..f_now.len())
        .max_by(|&a, &b| f_now[a].total_cmp(&f_now[b]))
        .unwrap_or(0);
    Ok(PointwiseReport { residual, max, l2, gauge_term, max_f_node })
}

fn axisymmetric_terms(fields: &GeometryFields, df: &Derivatives, node: &Node, grad: &[f64]) -> Terms {
    let Node { i, theta, big_f, speed } = *node;
    let n = grad.len();
    let d = &fields.derivs;
    let r = fields.radius[i];
    let (lam, lamp) = (r.sinh(), r.cosh());
    let (rt, rtt) = (d.t[i], d.tt[i]);
    let (ft, ftt) = (df.t[i], df.tt[i]);
    let g = rt * rt + lam * lam;
    let christoffel = (rt * rtt + lam * lamp * rt) / g;
    let meridian = (ftt - christoffel * ft) / g;
    let angular = (lamp * rt / lam + theta.cos() / theta.sin()) * ft / g;
    let f_par = if n > 1 { grad[1] } else { 0.0 };
    let v = fields.grad_factor[i];
    Terms {
        hessian: grad[0] * meridian + f_par * (n as f64 - 1.0) * angular,
        radial: lam * rt * ft / g,
        cross: grad[0] * ft * (lam * rt / big_f - lamp * ft / (big_f * big_f)) / g,
        gauge: speed * rt / (lam * lam * v) * ft,
    }
}

fn full_sphere_terms(fields: &GeometryFields, df: &Derivatives, node: &Node, grad: &[f64]) -> Terms {
    let Node { i, theta, big_f, speed } = *node;
    let d = &fields.derivs;
    let r = fields.radius[i];
    let (lam, lamp) = (r.sinh(), r.cosh());
    let (s, c) = theta.sin_cos();

    // coordinates x = (θ, φ)
    let rd = [d.t[i], d.p[i]];
    let rdd = [[d.tt[i], d.tp[i]], [d.tp[i], d.pp[i]]];
    let sigma = [[1.0, 0.0], [0.0, s * s]];
    let dsigma = |k: usize, a: usize, b: usize| if k == 0 && a == 1 && b == 1 { 2.0 * s * c } else { 0.0 };
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b] = rd[a] * rd[b] + lam * lam * sigma[a][b];
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let gi = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
    let dg = |k: usize, a: usize, b: usize| {
        rdd[a][k] * rd[b] + rd[a] * rdd[b][k] + 2.0 * lam * lamp * rd[k] * sigma[a][b] + lam * lam * dsigma(k, a, b)
    };
    let fd = [df.t[i], df.p[i]];
    let fdd = [[df.tt[i], df.tp[i]], [df.tp[i], df.pp[i]]];
    let mut hess = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut corr = 0.0;
            for l in 0..2 {
                let gamma: f64 = (0..2)
                    .map(|q| 0.5 * gi[l][q] * (dg(a, q, b) + dg(b, q, a) - dg(q, a, b)))
                    .sum();
                corr += gamma * fd[l];
            }
            hess[a][b] = fdd[a][b] - corr;
        }
    }

    // F^{ij} = c0 g^{ij} + c1 h^{ij}
    let k = [fields.kappa(i)[0], fields.kappa(i)[1]];
    let (c0, c1) = if (k[1] - k[0]).abs() > 1e-12 {
        let c1 = (grad[1] - grad[0]) / (k[1] - k[0]);
        (grad[0] - c1 * k[0], c1)
    } else {
        (0.5 * (grad[0] + grad[1]), 0.0)
    };
    let hf = fields.second_form[i];
    let hc = [[hf[0], hf[1] * s], [hf[1] * s, hf[2] * s * s]];
    let mut fij = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut hup = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    hup += gi[a][p] * hc[p][q] * gi[q][b];
                }
            }
            fij[a][b] = c0 * gi[a][b] + c1 * hup;
        }
    }

    let v = fields.grad_factor[i];
    let tangential = [speed * rd[0] / (lam * lam * v), speed * rd[1] / (s * s * lam * lam * v)];
    let mut t = Terms { hessian: 0.0, radial: 0.0, cross: 0.0, gauge: 0.0 };
    for a in 0..2 {
        t.gauge += tangential[a] * fd[a];
        for b in 0..2 {
            t.hessian += fij[a][b] * hess[a][b];
            t.radial += gi[a][b] * lam * rd[a] * fd[b];
            let d_ratio = lam * rd[b] / big_f - lamp * fd[b] / (big_f * big_f);
            t.cross += fij[a][b] * fd[a] * d_ratio;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{generate_shape, ShapeKind, SphereGrid};

    #[test]
    fn sphere_residuals_vanish() {
        for grid in [SphereGrid::full(16).unwrap(), SphereGrid::axisymmetric(3, 16).unwrap()] {
            let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid).unwrap();
            let s = FlowState::new(g, 1).unwrap();
            let v = variational_check(&s, 1e-3).unwrap();
            assert!(v.residual.iter().all(|r| *r < 1e-10));
            let p = pointwise_f_check(&s, 1e-3).unwrap();
            assert!(p.max < 1e-9, "{}", p.max);
        }
    }

    #[test]
    fn backends_agree_on_zonal_residual() {
        let kind = ShapeKind::PerturbedSphere { r0: 1.0, eps: 0.05, l: 2, order: 0 };
        let full = FlowState::new(generate_shape(&kind, &SphereGrid::full(32).unwrap()).unwrap(), 1).unwrap();
        let axi = FlowState::new(generate_shape(&kind, &SphereGrid::axisymmetric(2, 32).unwrap()).unwrap(), 1).unwrap();
        let pf = pointwise_f_check(&full, 1e-4).unwrap();
        let pa = pointwise_f_check(&axi, 1e-4).unwrap();
        for j in 0..32 {
            assert!((pf.residual[j * 64 + 7] - pa.residual[j]).abs() < 1e-6);
        }
    }
}
