//! Grids over `S^n`: latitude-longitude nodes on the 2-sphere or a meridian
//! profile for axisymmetric data, with 4th-order stencils, quadrature and
//! interpolation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    /// Latitude-longitude grid on `S^2` with `J × 2J` cells.
    #[serde(rename = "full")]
    FullSphere,
    /// Profile `r(θ)` on `J` cells, rotationally symmetric about the `θ = 0` axis.
    #[serde(rename = "axisymmetric")]
    Axisymmetric,
}

/// Area `|S^n|` of the unit n-sphere.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_area(n - 2),
    }
}

/// `∫_0^π cos(kθ) sin^p(θ) dθ`.
pub(crate) fn cos_sin_moment(k: usize, p: usize) -> f64 {
    match p {
        0 => {
            if k == 0 {
                PI
            } else {
                0.0
            }
        }
        1 => {
            if k % 2 == 1 {
                0.0
            } else {
                2.0 / (1.0 - (k * k) as f64)
            }
        }
        _ if k == p => PI * (p as f64 * PI / 2.0).cos() / 2f64.powi(p as i32),
        _ => {
            let (pf, kf) = (p as f64, k as f64);
            pf * (pf - 1.0) / (pf * pf - kf * kf) * cos_sin_moment(k, p - 2)
        }
    }
}

/// Weights on `θ_j = (j + ½)π/J` integrating `g(θ) sin^p θ` exactly for every
/// even trigonometric polynomial `g` of degree below `J`.
fn theta_weights(cells: usize, p: usize) -> Vec<f64> {
    let jf = cells as f64;
    let moments: Vec<f64> = (0..cells).map(|k| cos_sin_moment(k, p)).collect();
    (0..cells)
        .map(|j| {
            let th = (j as f64 + 0.5) * PI / jf;
            let tail: f64 = (1..cells)
                .map(|k| moments[k] * (k as f64 * th).cos())
                .sum();
            (moments[0] + 2.0 * tail) / jf
        })
        .collect()
}

struct PolarFilter {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Highest retained zonal wavenumber per latitude row.
    cutoff: Vec<usize>,
}

/// Discretization of `S^n`.
///
/// Nodes sit at `θ_j = (j + ½)π/J` so none lies on a pole. The full-sphere grid
/// adds `2J` longitudes `φ_k = kπ/J`; values are stored row-major in `θ`.
#[derive(Clone)]
pub struct SphereGrid {
    backend: Backend,
    n: usize,
    cells: usize,
    weights: Arc<[f64]>,
    filter: Option<Arc<PolarFilter>>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("backend", &self.backend)
            .field("n", &self.n)
            .field("cells", &self.cells)
            .finish()
    }
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.backend == other.backend && self.n == other.n && self.cells == other.cells
    }
}

/// Coordinate derivatives of a nodal field. The `φ` entries are zero on the
/// axisymmetric backend.
#[derive(Debug, Clone, Default)]
pub struct Derivatives {
    pub t: Vec<f64>,
    pub tt: Vec<f64>,
    pub p: Vec<f64>,
    pub pp: Vec<f64>,
    pub tp: Vec<f64>,
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const GHOST: usize = 3;

impl SphereGrid {
    pub fn new(backend: Backend, n: usize, cells: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("sphere dimension n = {n} must be ≥ 2")));
        }
        if cells < 8 {
            return Err(Error::domain(format!("J = {cells} too small for the stencils")));
        }
        match backend {
            Backend::FullSphere => {
                if n != 2 {
                    return Err(Error::domain("the full-sphere backend requires n = 2"));
                }
                let row = theta_weights(cells, 1);
                let dphi = PI / cells as f64;
                let weights: Vec<f64> = row
                    .iter()
                    .flat_map(|w| std::iter::repeat_n(w * dphi, 2 * cells))
                    .collect();
                let mut planner = FftPlanner::new();
                let cutoff = (0..cells)
                    .map(|j| {
                        let th = (j as f64 + 0.5) * PI / cells as f64;
                        ((cells as f64 * th.sin()).floor() as usize).max(1)
                    })
                    .collect();
                Ok(Self {
                    backend,
                    n,
                    cells,
                    weights: weights.into(),
                    filter: Some(Arc::new(PolarFilter {
                        forward: planner.plan_fft_forward(2 * cells),
                        inverse: planner.plan_fft_inverse(2 * cells),
                        cutoff,
                    })),
                })
            }
            Backend::Axisymmetric => {
                let factor = sphere_area(n - 1);
                let weights: Vec<f64> = theta_weights(cells, n - 1)
                    .into_iter()
                    .map(|w| w * factor)
                    .collect();
                Ok(Self { backend, n, cells, weights: weights.into(), filter: None })
            }
        }
    }

    pub fn full(cells: usize) -> Result<Self> {
        Self::new(Backend::FullSphere, 2, cells)
    }

    pub fn axisymmetric(n: usize, cells: usize) -> Result<Self> {
        Self::new(Backend::Axisymmetric, n, cells)
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Dimension of the sphere `S^n` (the hypersurface dimension).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of latitude cells `J`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_theta(&self) -> usize {
        self.cells
    }

    pub fn n_phi(&self) -> usize {
        match self.backend {
            Backend::FullSphere => 2 * self.cells,
            Backend::Axisymmetric => 1,
        }
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        PI / self.cells as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn phi(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    /// `(θ, φ)` of a flat node index.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let np = self.n_phi();
        (self.theta(idx / np), self.phi(idx % np))
    }

    /// Unit direction of a node in `R^3`. Axisymmetric nodes are reported on
    /// their meridian in the `x1–x3` plane.
    pub fn direction(&self, idx: usize) -> [f64; 3] {
        let (th, ph) = self.coords(idx);
        [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
    }

    /// Quadrature weights for the round measure of `S^n`; they sum to `|S^n|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn weights_arc(&self) -> Arc<[f64]> {
        self.weights.clone()
    }

    /// Row-major array with `GHOST` rows beyond each pole.
    pub(crate) fn extend(&self, values: &[f64]) -> Vec<f64> {
        let (nt, np) = (self.n_theta() as isize, self.n_phi());
        let rows = nt + 2 * GHOST as isize;
        let mut ext = vec![0.0; rows as usize * np];
        for er in 0..rows {
            let row = er - GHOST as isize;
            let (src, shift) = if row < 0 {
                (-1 - row, true)
            } else if row >= nt {
                (2 * nt - 1 - row, true)
            } else {
                (row, false)
            };
            for k in 0..np {
                // Across a pole the same latitude reappears on the antipodal
                // meridian; for the axisymmetric profile this is an even reflection.
                let ks = if shift && np > 1 { (k + np / 2) % np } else { k };
                ext[er as usize * np + k] = values[src as usize * np + ks];
            }
        }
        ext
    }

    pub fn derivatives(&self, values: &[f64]) -> Derivatives {
        let (nt, np) = (self.n_theta(), self.n_phi());
        let h = self.spacing();
        let len = nt * np;
        // stencils act on the deviation from the mean so constants
        // differentiate to exactly zero
        let base = values.iter().sum::<f64>() / len as f64;
        let mut ext = self.extend(values);
        ext.iter_mut().for_each(|v| *v -= base);
        let mut d = Derivatives {
            t: vec![0.0; len],
            tt: vec![0.0; len],
            p: vec![0.0; len],
            pp: vec![0.0; len],
            tp: vec![0.0; len],
        };
        let at = |row: usize, k: usize| ext[row * np + k];
        for j in 0..nt {
            let er = j + GHOST;
            for k in 0..np {
                let idx = j * np + k;
                let (mut s1, mut s2) = (0.0, 0.0);
                for (o, (c1, c2)) in D1.iter().zip(D2.iter()).enumerate() {
                    let f = at(er + o - 2, k);
                    s1 += c1 * f;
                    s2 += c2 * f;
                }
                d.t[idx] = s1 / h;
                d.tt[idx] = s2 / (h * h);
            }
        }
        if np > 1 {
            let rows = nt + 2 * GHOST;
            let mut dp_ext = vec![0.0; rows * np];
            for row in 0..rows {
                for k in 0..np {
                    let (mut s1, mut s2) = (0.0, 0.0);
                    for (o, (c1, c2)) in D1.iter().zip(D2.iter()).enumerate() {
                        let f = at(row, (k + np + o - 2) % np);
                        s1 += c1 * f;
                        s2 += c2 * f;
                    }
                    dp_ext[row * np + k] = s1 / h;
                    if row >= GHOST && row < nt + GHOST {
                        let idx = (row - GHOST) * np + k;
                        d.p[idx] = s1 / h;
                        d.pp[idx] = s2 / (h * h);
                    }
                }
            }
            for j in 0..nt {
                let er = j + GHOST;
                for k in 0..np {
                    let s: f64 = D1
                        .iter()
                        .enumerate()
                        .map(|(o, c)| c * dp_ext[(er + o - 2) * np + k])
                        .sum();
                    d.tp[j * np + k] = s / h;
                }
            }
        }
        d
    }

    /// Integral of a nodal field against the round measure of `S^n`.
    pub fn integrate_round(&self, values: &[f64]) -> f64 {
        values.iter().zip(self.weights.iter()).map(|(a, w)| a * w).sum()
    }

    /// Six-point Lagrange interpolation of a nodal field at `(θ, φ)`.
    pub fn interpolate(&self, values: &[f64], theta: f64, phi: f64) -> f64 {
        let ext = self.extend(values);
        self.interpolate_extended(&ext, theta, phi)
    }

    pub(crate) fn interpolate_extended(&self, ext: &[f64], theta: f64, phi: f64) -> f64 {
        let h = self.spacing();
        let np = self.n_phi();
        let x = theta / h - 0.5;
        let base = x.floor() as isize;
        let wt = lagrange6(x - base as f64);
        let row_value = |row: isize, phi_w: &Option<([f64; 6], isize)>| -> f64 {
            let er = (row + GHOST as isize).clamp(0, (self.n_theta() + 2 * GHOST - 1) as isize)
                as usize;
            match phi_w {
                None => ext[er * np],
                Some((wp, kb)) => (0..6)
                    .map(|o| {
                        let k = (kb + o as isize - 2).rem_euclid(np as isize) as usize;
                        wp[o] * ext[er * np + k]
                    })
                    .sum(),
            }
        };
        let phi_w = if np > 1 {
            let y = phi.rem_euclid(2.0 * PI) / h;
            let kb = y.floor() as isize;
            Some((lagrange6(y - kb as f64), kb))
        } else {
            None
        };
        (0..6)
            .map(|o| wt[o] * row_value(base + o as isize - 2, &phi_w))
            .sum()
    }

    /// Removes zonal wavenumbers that the latitude spacing cannot resolve near
    /// the poles. No-op on the axisymmetric backend.
    pub fn polar_filter(&self, values: &mut [f64]) {
        let Some(filter) = &self.filter else { return };
        let np = self.n_phi();
        let mut buf = vec![Complex::new(0.0, 0.0); np];
        for (j, row) in values.chunks_mut(np).enumerate() {
            let cut = filter.cutoff[j];
            if 2 * cut >= np {
                continue;
            }
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            filter.forward.process(&mut buf);
            for (q, b) in buf.iter_mut().enumerate() {
                if q.min(np - q) > cut {
                    *b = Complex::new(0.0, 0.0);
                }
            }
            filter.inverse.process(&mut buf);
            for (v, b) in row.iter_mut().zip(buf.iter()) {
                *v = b.re / np as f64;
            }
        }
    }
}

/// Lagrange weights for nodes at offsets `-2..=3` evaluated at `s ∈ [0, 1)`.
fn lagrange6(s: f64) -> [f64; 6] {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let mut w = [1.0; 6];
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                w[i] *= (s - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn moments_match_brute_force_quadrature() {
        for p in 0..7 {
            for k in 0..12 {
                let m = 20000;
                let h = PI / m as f64;
                let brute: f64 = (0..m)
                    .map(|i| {
                        let t = (i as f64 + 0.5) * h;
                        (k as f64 * t).cos() * t.sin().powi(p as i32) * h
                    })
                    .sum();
                assert!((brute - cos_sin_moment(k, p)).abs() < 1e-8, "k={k} p={p}");
            }
        }
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        for (grid, n) in [
            (SphereGrid::full(16).unwrap(), 2),
            (SphereGrid::axisymmetric(2, 16).unwrap(), 2),
            (SphereGrid::axisymmetric(3, 17).unwrap(), 3),
            (SphereGrid::axisymmetric(5, 16).unwrap(), 5),
        ] {
            let total: f64 = grid.weights().iter().sum();
            assert!((total - sphere_area(n)).abs() < 1e-12, "{grid:?}");
        }
    }

    #[test]
    fn quadrature_is_spectral_for_smooth_zonal_data() {
        // ∫_{S^2} exp(cos θ) = 2π (e − 1/e)
        let grid = SphereGrid::full(16).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|i| grid.coords(i).0.cos().exp()).collect();
        let exact = 2.0 * PI * (1f64.exp() - (-1f64).exp());
        assert!((grid.integrate_round(&f) - exact).abs() < 1e-13);
        // ∫_{S^4} cos²θ = |S^3| ∫ cos² sin³ = 2π² · 4/15
        let grid = SphereGrid::axisymmetric(4, 16).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|i| grid.coords(i).0.cos().powi(2)).collect();
        assert!((grid.integrate_round(&f) - 2.0 * PI * PI * 4.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn derivatives_cross_the_poles() {
        // z = cos θ and x = sin θ cos φ restricted to the sphere.
        let grid = SphereGrid::full(32).unwrap();
        let x: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (t, p) = grid.coords(i);
                t.sin() * p.cos() + 0.3 * t.cos()
            })
            .collect();
        let d = grid.derivatives(&x);
        let h4 = grid.spacing().powi(4);
        for i in 0..grid.len() {
            let (t, p) = grid.coords(i);
            assert!((d.t[i] - (t.cos() * p.cos() - 0.3 * t.sin())).abs() < 2.0 * h4);
            assert!((d.tt[i] - (-t.sin() * p.cos() - 0.3 * t.cos())).abs() < 2.0 * h4);
            assert!((d.p[i] + t.sin() * p.sin()).abs() < 2.0 * h4);
            assert!((d.pp[i] + t.sin() * p.cos()).abs() < 2.0 * h4);
            assert!((d.tp[i] + t.cos() * p.sin()).abs() < 4.0 * h4);
        }
    }

    #[test]
    fn axisymmetric_reflection() {
        let grid = SphereGrid::axisymmetric(3, 24).unwrap();
        let f: Vec<f64> = (0..grid.len()).map(|i| (2.0 * grid.theta(i)).cos()).collect();
        let d = grid.derivatives(&f);
        for i in 0..grid.len() {
            let t = grid.theta(i);
            // fifth and sixth derivatives of cos 2θ are at most 64 and 256
            let h4 = grid.spacing().powi(4);
            assert!((d.t[i] + 2.0 * (2.0 * t).sin()).abs() < 64.0 * h4 / 30.0);
            assert!((d.tt[i] + 4.0 * (2.0 * t).cos()).abs() < 256.0 * h4 / 90.0);
        }
    }

    #[test]
    fn interpolation_accuracy() {
        let grid = SphereGrid::full(24).unwrap();
        let f = |t: f64, p: f64| (t.sin() * p.cos() + 0.5 * t.cos()).exp();
        let vals: Vec<f64> = (0..grid.len()).map(|i| {
            let (t, p) = grid.coords(i);
            f(t, p)
        }).collect();
        for &(t, p) in &[(0.01, 1.0), (1.234, 4.5), (3.1, 0.2), (PI / 2.0, 6.2)] {
            assert!((grid.interpolate(&vals, t, p) - f(t, p)).abs() < 1e-5);
        }
    }

    #[test]
    fn polar_filter_keeps_low_modes() {
        let grid = SphereGrid::full(24).unwrap();
        let mut vals: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (t, p) = grid.coords(i);
                t.cos() + t.sin() * p.sin()
            })
            .collect();
        let before = vals.clone();
        grid.polar_filter(&mut vals);
        for (a, b) in vals.iter().zip(&before) {
            assert!((a - b).abs() < 1e-13);
        }
        // A sawtooth in φ on the first ring is removed.
        let mut noisy = vec![0.0; grid.len()];
        for (k, v) in noisy.iter_mut().take(grid.n_phi()).enumerate() {
            *v = if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        grid.polar_filter(&mut noisy);
        assert!(noisy.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(SphereGrid::new(Backend::FullSphere, 3, 32).is_err());
        assert!(SphereGrid::axisymmetric(1, 32).is_err());
        assert!(SphereGrid::axisymmetric(2, 4).is_err());
    }
}
