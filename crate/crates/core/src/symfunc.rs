//! Normalized elementary symmetric polynomials of principal curvatures.
//!
//! `E_k(κ) = σ_k(κ) / C(n, k)` where `σ_k` is the k-th elementary symmetric
//! polynomial. Values are obtained from the coefficients of `Π (1 + κ_i x)`,
//! accumulated one factor at a time, which is stable on the positive cone and
//! costs `O(n²)`.

use crate::error::{Error, Result};

/// Largest spectrum length supported by the stack-buffer fast paths.
pub const MAX_DIM: usize = 32;

/// An ordered list of `n ≥ 2` principal curvatures.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSpectrum {
    kappa: Vec<f64>,
}

impl CurvatureSpectrum {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() < 2 || kappa.len() > MAX_DIM {
            return Err(Error::domain(format!(
                "spectrum length {} outside 2..={MAX_DIM}",
                kappa.len()
            )));
        }
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::domain("non-finite principal curvature"));
        }
        Ok(Self { kappa })
    }

    /// The spectrum `(c, …, c)` of an umbilic point.
    pub fn umbilic(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }

    /// All `κ_i > 0`.
    pub fn in_positive_cone(&self) -> bool {
        self.kappa.iter().all(|&k| k > 0.0)
    }

    /// All `κ_i ≥ 1` (convexity by horospheres).
    pub fn is_h_convex(&self) -> bool {
        self.kappa.iter().all(|&k| k >= 1.0)
    }

    /// `max κ − min κ`.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .kappa
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                (lo.min(k), hi.max(k))
            });
        hi - lo
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unnormalized `σ_0, …, σ_len` of the entries of `kappa` whose index is not
/// listed in `skip`. Writes `kappa.len() + 1` coefficients.
fn sigma_skipping(kappa: &[f64], skip: &[usize], out: &mut [f64]) {
    let n = kappa.len();
    out[..=n].fill(0.0);
    out[0] = 1.0;
    let mut deg = 0;
    for (i, &k) in kappa.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        deg += 1;
        for j in (1..=deg).rev() {
            out[j] += k * out[j - 1];
        }
    }
}

/// Normalized `E_0, …, E_n` written into `out[..=n]`.
pub fn esym_all(kappa: &[f64], out: &mut [f64]) {
    let n = kappa.len();
    sigma_skipping(kappa, &[], out);
    for (k, e) in out[..=n].iter_mut().enumerate() {
        *e /= binomial(n, k);
    }
}

fn check_order(k: usize, n: usize) -> Result<()> {
    if k > n {
        Err(Error::domain(format!("order k = {k} outside 0..={n}")))
    } else {
        Ok(())
    }
}

pub fn esym_eval(k: usize, spec: &CurvatureSpectrum) -> Result<f64> {
    let n = spec.dim();
    check_order(k, n)?;
    let mut buf = [0.0; MAX_DIM + 1];
    esym_all(spec.as_slice(), &mut buf);
    Ok(buf[k])
}

/// `∂E_k/∂κ_i = σ_{k-1}(κ | i) / C(n, k)`.
pub fn esym_grad(k: usize, spec: &CurvatureSpectrum) -> Result<Vec<f64>> {
    let n = spec.dim();
    check_order(k, n)?;
    let mut out = vec![0.0; n];
    if k == 0 {
        return Ok(out);
    }
    let norm = binomial(n, k);
    let mut buf = [0.0; MAX_DIM + 1];
    for (i, g) in out.iter_mut().enumerate() {
        sigma_skipping(spec.as_slice(), &[i], &mut buf);
        *g = buf[k - 1] / norm;
    }
    Ok(out)
}

/// `∂²E_k/∂κ_i∂κ_j = σ_{k-2}(κ | i, j) / C(n, k)` off the diagonal; the
/// diagonal vanishes since `E_k` is affine in each `κ_i`.
pub fn esym_hess(k: usize, spec: &CurvatureSpectrum) -> Result<Vec<Vec<f64>>> {
    let n = spec.dim();
    check_order(k, n)?;
    let mut out = vec![vec![0.0; n]; n];
    if k < 2 {
        return Ok(out);
    }
    let norm = binomial(n, k);
    let mut buf = [0.0; MAX_DIM + 1];
    for i in 0..n {
        for j in (i + 1)..n {
            sigma_skipping(spec.as_slice(), &[i, j], &mut buf);
            let v = buf[k - 2] / norm;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// Value and κ-gradient of `F = E_m / E_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub value: f64,
    pub grad: Vec<f64>,
}

const CONE_EPS: f64 = 1e-14;

/// Slice-level `F = E_m/E_{m-1}` without allocation; `grad` receives `∂F/∂κ_i`
/// when provided.
pub fn quotient_slice(kappa: &[f64], m: usize, grad: Option<&mut [f64]>) -> Result<f64> {
    let n = kappa.len();
    if m == 0 || m > n {
        return Err(Error::domain(format!("quotient index m = {m} outside 1..={n}")));
    }
    let mut e = [0.0; MAX_DIM + 1];
    esym_all(kappa, &mut e);
    let (num, den) = (e[m], e[m - 1]);
    if den <= CONE_EPS {
        return Err(Error::ConeViolation(format!("E_{} = {den:e} is not positive", m - 1)));
    }
    let value = num / den;
    if let Some(grad) = grad {
        let (nm, nm1) = (binomial(n, m), binomial(n, m - 1));
        let mut buf = [0.0; MAX_DIM + 1];
        for (i, g) in grad.iter_mut().enumerate().take(n) {
            sigma_skipping(kappa, &[i], &mut buf);
            let d_num = buf[m - 1] / nm;
            let d_den = if m >= 2 { buf[m - 2] / nm1 } else { 0.0 };
            *g = (d_num * den - num * d_den) / (den * den);
        }
    }
    Ok(value)
}

pub fn quotient_eval(m: usize, spec: &CurvatureSpectrum) -> Result<Quotient> {
    let n = spec.dim();
    if m == 0 || m >= n {
        return Err(Error::domain(format!("quotient index m = {m} outside 1..={}", n - 1)));
    }
    let mut grad = vec![0.0; n];
    let value = quotient_slice(spec.as_slice(), m, Some(&mut grad))?;
    Ok(Quotient { value, grad })
}

/// One inequality `lhs ≤ rhs` reported by its slack `rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub slack: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
        Self { slack, holds: slack >= -tol }
    }
}

/// Verdicts for the structural inequalities of `F = E_m/E_{m-1}` on the
/// h-convex cone, evaluated in the κ-eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    /// `F² ≤ Σ κ_i² ∂F/∂κ_i`
    pub sq_lower: Inequality,
    /// `Σ κ_i² ∂F/∂κ_i ≤ (n + 1 − m) F²`
    pub sq_upper: Inequality,
    /// `1 ≤ Σ ∂F/∂κ_i`
    pub trace_lower: Inequality,
    /// `Σ ∂F/∂κ_i ≤ m`
    pub trace_upper: Inequality,
    /// `E_{k-1} E_{k+1} ≤ E_k²` for `k = 1, …, n − 1`.
    pub newton_maclaurin: Vec<Inequality>,
}

impl ConeReport {
    pub fn all_hold(&self) -> bool {
        self.sq_lower.holds
            && self.sq_upper.holds
            && self.trace_lower.holds
            && self.trace_upper.holds
            && self.newton_maclaurin.iter().all(|i| i.holds)
    }
}

/// Report-only: the verdicts are meaningful on the h-convex cone, which is where
/// the flow lives.
pub fn cone_checks(spec: &CurvatureSpectrum, m: usize) -> Result<ConeReport> {
    let n = spec.dim();
    let q = quotient_eval(m, spec)?;
    let f = q.value;
    let trace: f64 = q.grad.iter().sum();
    let sq: f64 = q
        .grad
        .iter()
        .zip(spec.as_slice())
        .map(|(g, k)| g * k * k)
        .sum();
    let mut e = [0.0; MAX_DIM + 1];
    esym_all(spec.as_slice(), &mut e);
    let newton_maclaurin = (1..n)
        .map(|k| Inequality::new(e[k - 1] * e[k + 1], e[k] * e[k]))
        .collect();
    Ok(ConeReport {
        sq_lower: Inequality::new(f * f, sq),
        sq_upper: Inequality::new(sq, (n + 1 - m) as f64 * f * f),
        trace_lower: Inequality::new(1.0, trace),
        trace_upper: Inequality::new(trace, m as f64),
        newton_maclaurin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(k: &[f64]) -> CurvatureSpectrum {
        CurvatureSpectrum::new(k.to_vec()).unwrap()
    }

    /// Independent oracle: sum over all k-subsets.
    fn esym_subsets(kappa: &[f64], k: usize) -> f64 {
        let n = kappa.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                total += (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| kappa[i])
                    .product::<f64>();
            }
        }
        total / binomial(n, k)
    }

    #[test]
    fn order_zero_is_one() {
        assert_eq!(esym_eval(0, &spec(&[0.3, 7.0, 2.0])).unwrap(), 1.0);
    }

    #[test]
    fn umbilic_powers() {
        let s = CurvatureSpectrum::umbilic(3, 1.7).unwrap();
        for k in 0..=3 {
            assert_relative_eq!(esym_eval(k, &s).unwrap(), 1.7f64.powi(k as i32), max_relative = 1e-15);
        }
    }

    #[test]
    fn values_at_one_two_three() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let oracle: Vec<f64> = (1..=3).map(|k| esym_subsets(s.as_slice(), k)).collect();
        assert_relative_eq!(oracle[0], 2.0, max_relative = 1e-15);
        assert_relative_eq!(oracle[1], 11.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(oracle[2], 6.0, max_relative = 1e-15);
        for k in 1..=3 {
            assert_relative_eq!(esym_eval(k, &s).unwrap(), oracle[k - 1], max_relative = 1e-14);
        }
    }

    #[test]
    fn order_out_of_range() {
        let s = spec(&[1.0, 2.0]);
        assert!(matches!(esym_eval(3, &s), Err(Error::Domain(_))));
        assert!(esym_grad(3, &s).is_err());
        assert!(esym_hess(3, &s).is_err());
    }

    #[test]
    fn rejects_short_or_nonfinite_spectra() {
        assert!(CurvatureSpectrum::new(vec![1.0]).is_err());
        assert!(CurvatureSpectrum::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = esym_grad(1, &spec(&[0.5, 4.0, 9.0, 2.0])).unwrap();
        for gi in g {
            assert_relative_eq!(gi, 0.25, max_relative = 1e-15);
        }
        let g = esym_grad(2, &spec(&[1.5, 2.5])).unwrap();
        assert_relative_eq!(g[0], 2.5);
        assert_relative_eq!(g[1], 1.5);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let kappa = [1.0, 2.0, 3.0];
        let g = esym_grad(2, &spec(&kappa)).unwrap();
        let h = 1e-6;
        let mut fd = [0.0; 3];
        for i in 0..3 {
            let mut p = kappa;
            let mut m = kappa;
            p[i] += h;
            m[i] -= h;
            fd[i] = (esym_subsets(&p, 2) - esym_subsets(&m, 2)) / (2.0 * h);
        }
        // frozen from the finite-difference oracle
        let expected = [5.0 / 3.0, 4.0 / 3.0, 1.0];
        for i in 0..3 {
            assert!((fd[i] - expected[i]).abs() < 1e-8);
            assert!((g[i] - fd[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn hessian_structure() {
        let h = esym_hess(2, &spec(&[0.7, 1.9])).unwrap();
        assert_eq!(h[0][0], 0.0);
        assert_eq!(h[1][1], 0.0);
        assert_relative_eq!(h[0][1], 1.0);

        let kappa = [1.3, 0.4, 2.2];
        let h = esym_hess(2, &spec(&kappa)).unwrap();
        let step = 1e-6;
        for i in 0..3 {
            assert_eq!(h[i][i], 0.0);
            let mut p = kappa;
            let mut m = kappa;
            p[i] += step;
            m[i] -= step;
            let gp = esym_grad(2, &spec(&p)).unwrap();
            let gm = esym_grad(2, &spec(&m)).unwrap();
            for j in 0..3 {
                if i != j {
                    let fd = (gp[j] - gm[j]) / (2.0 * step);
                    assert!((fd - 1.0 / 3.0).abs() < 1e-8);
                    assert_relative_eq!(h[i][j], 1.0 / 3.0, max_relative = 1e-14);
                }
            }
        }
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_eval(2, &CurvatureSpectrum::umbilic(4, 1.4).unwrap()).unwrap();
        assert_relative_eq!(q.value, 1.4, max_relative = 1e-14);
        for g in &q.grad {
            assert_relative_eq!(*g, 0.25, max_relative = 1e-13);
        }
        let q = quotient_eval(1, &spec(&[1.2, 3.4])).unwrap();
        assert_relative_eq!(q.value, 2.3, max_relative = 1e-15);
        let q = quotient_eval(2, &spec(&[1.0, 2.0, 3.0])).unwrap();
        assert_relative_eq!(q.value, 11.0 / 6.0, max_relative = 1e-14);
        assert!(q.grad.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn quotient_outside_cone() {
        let err = quotient_eval(2, &spec(&[1.0, -1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::ConeViolation(_)));
        assert!(quotient_eval(3, &spec(&[1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn cone_checks_examples() {
        let r = cone_checks(&CurvatureSpectrum::umbilic(3, 1.8).unwrap(), 2).unwrap();
        assert!(r.all_hold());
        assert!(r.trace_lower.slack.abs() < 1e-14);
        assert!(r.sq_lower.slack.abs() < 1e-12);
        assert!(r.newton_maclaurin.iter().all(|i| i.slack.abs() < 1e-12));

        let r = cone_checks(&spec(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert!(r.all_hold());
        for ineq in [r.sq_lower, r.sq_upper, r.trace_lower, r.trace_upper] {
            assert!(ineq.slack > 1e-3, "{ineq:?}");
        }
    }
}
