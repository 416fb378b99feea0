//! The consolidated property suite behind `hypflow verify`.

use std::fmt;

use hypflow_core::conformal::{area_identity_check, conf_relation_residual, image_convexity_margin, to_ball};
use hypflow_core::flow::{self, FlowState, StopCriteria};
use hypflow_core::hyperbolic;
use hypflow_core::hypersurface::{
    ball_profile, generate_shape, geometry_fields, integrate, quermassintegrals, random_hconvex_shape,
    recenter, ShapeKind,
};
use hypflow_core::stability::{deficit_from_quermass, proof_trace_report};
use hypflow_core::symfunc::{binomial, cone_checks, esym_all, esym_grad, quotient_slice};
use hypflow_core::{CurvatureSpectrum, SphereGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Raised when any verify check fails.
#[derive(Debug)]
pub struct VerificationFailed {
    pub failed: Vec<&'static str>,
}

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.failed.join(", "))
    }
}

impl std::error::Error for VerificationFailed {}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn failed(name: &'static str, e: impl fmt::Display) -> Check {
    check(name, false, format!("error: {e}"))
}

/// `E_k` by summing over all `k`-subsets.
fn esym_by_subsets(kappa: &[f64], k: usize) -> f64 {
    let n = kappa.len();
    let total: f64 = (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| kappa[i]).product::<f64>())
        .sum();
    total / binomial(n, k)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn symfunc_fuzz(samples: usize, rng: &mut ChaCha8Rng) -> Check {
    let name = "symfunc fuzz";
    let mut violations = Vec::new();
    let mut e = [0.0; 16];
    let mut e2 = [0.0; 16];
    for sample in 0..samples {
        let n = rng.random_range(2..=6usize);
        let kappa: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.random::<f64>().powi(2)).collect();
        let other: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.random::<f64>()).collect();
        let t = 0.5 + 2.0 * rng.random::<f64>();
        let m = rng.random_range(1..n);
        let spec = CurvatureSpectrum::new(kappa.clone()).expect("finite spectrum");
        esym_all(&kappa, &mut e);
        let scaled: Vec<f64> = kappa.iter().map(|k| t * k).collect();
        esym_all(&scaled, &mut e2);
        for k in 0..=n {
            if !close(e[k], esym_by_subsets(&kappa, k), 1e-12) {
                violations.push(format!("sample {sample}: subset oracle at k = {k}"));
            }
            if !close(e2[k], t.powi(k as i32) * e[k], 1e-12) {
                violations.push(format!("sample {sample}: homogeneity at k = {k}"));
            }
            if k >= 1 {
                let grad = esym_grad(k, &spec).expect("k in range");
                if grad.iter().any(|&g| g.is_nan() || g <= 0.0) {
                    violations.push(format!("sample {sample}: monotonicity at k = {k}"));
                }
                let euler: f64 = grad.iter().zip(&kappa).map(|(g, x)| g * x).sum();
                if !close(euler, k as f64 * e[k], 1e-12) {
                    violations.push(format!("sample {sample}: Euler identity at k = {k}"));
                }
            }
        }
        let mid: Vec<f64> = kappa.iter().zip(&other).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = |x: &[f64]| quotient_slice(x, m, None).expect("positive cone");
        let chord = 0.5 * (f(&kappa) + f(&other));
        if f(&mid) < chord - 1e-12 * chord {
            violations.push(format!("sample {sample}: midpoint concavity"));
        }
        match cone_checks(&spec, m) {
            Ok(r) if r.all_hold() => {}
            _ => violations.push(format!("sample {sample}: cone inequalities")),
        }
    }
    let detail = match violations.first() {
        None => format!("{samples} samples"),
        Some(v) => format!("{} violations, first: {v}", violations.len()),
    };
    check(name, violations.is_empty(), detail)
}

fn shape_identities(count: usize, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let grid = match SphereGrid::full(96) {
        Ok(g) => g,
        Err(e) => return vec![failed("Minkowski formulas", e)],
    };
    let mut minkowski = 0.0f64;
    let mut worst_deficit = f64::INFINITY;
    let mut conf_res = 0.0f64;
    let mut conf_margin = f64::INFINITY;
    let mut area_mismatch = 0.0f64;
    for _ in 0..count {
        let result = (|| -> hypflow_core::Result<()> {
            let (_, g) = random_hconvex_shape(rng, &grid)?;
            let f = geometry_fields(&g)?;
            let n = f.n;
            let lp: Vec<f64> = f.radius.iter().map(|r| r.cosh()).collect();
            for k in 0..n {
                let ek = f.e(k);
                let ek1 = f.e(k + 1);
                let lhs = integrate(&f, &lp.iter().zip(&ek).map(|(a, b)| a * b).collect::<Vec<_>>())?;
                let rhs = integrate(&f, &f.support.iter().zip(&ek1).map(|(a, b)| a * b).collect::<Vec<_>>())?;
                minkowski = minkowski.max((lhs - rhs).abs() / rhs.abs());
            }
            let w = quermassintegrals(&g, &f)?;
            for m in 0..n {
                let d = deficit_from_quermass(&w, m)?;
                worst_deficit = worst_deficit.min(d.raw / w[m + 1]);
            }
            let image = to_ball(&g)?;
            conf_res = conf_res.max(conf_relation_residual(&f, &image).max);
            conf_margin = conf_margin.min(image_convexity_margin(&image));
            area_mismatch = area_mismatch.max(area_identity_check(&f, &image).relative_mismatch);
            Ok(())
        })();
        if let Err(e) = result {
            return vec![failed("random shape identities", e)];
        }
    }
    vec![
        check("Minkowski formulas", minkowski <= 1e-5, format!("max relative mismatch {minkowski:.3e} over {count} shapes")),
        check(
            "quermassintegral inequality",
            worst_deficit >= -1e-6,
            format!("min deficit / W_(m+1) = {worst_deficit:.3e}"),
        ),
        check(
            "conformal shape operator",
            conf_res <= 1e-4,
            format!("max residual {conf_res:.3e}"),
        ),
        check(
            "conformal image convexity",
            conf_margin >= -1e-8,
            format!("min margin {conf_margin:.3e}"),
        ),
        check("conformal area identity", area_mismatch <= 1e-4, format!("max mismatch {area_mismatch:.3e}")),
    ]
}

fn round_spheres() -> Check {
    let name = "sphere identities";
    let result = (|| -> hypflow_core::Result<(f64, f64, f64)> {
        let grid = SphereGrid::full(48)?;
        let g = generate_shape(&ShapeKind::Sphere { r0: 1.0 }, &grid)?;
        let f = geometry_fields(&g)?;
        let image = to_ball(&g)?;
        let res = conf_relation_residual(&f, &image).max;
        let w = quermassintegrals(&g, &f)?;
        let d = deficit_from_quermass(&w, 1)?.raw.abs();
        let speed = flow::normal_speed(&f, 1)?.normal.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        Ok((res, d, speed))
    })();
    match result {
        Ok((res, d, speed)) => check(
            name,
            res <= 1e-10 && d <= 1e-6 && speed <= 1e-10,
            format!("conformal residual {res:.3e}, deficit {d:.3e}, max speed {speed:.3e}"),
        ),
        Err(e) => failed(name, e),
    }
}

fn isometry_invariance() -> Check {
    let name = "isometry invariance";
    let result = (|| -> hypflow_core::Result<(f64, f64, f64)> {
        let grid = SphereGrid::axisymmetric(2, 96)?;
        let g = generate_shape(&ShapeKind::OffsetSphere { r0: 1.0, a: 0.3 }, &grid)?;
        let f = geometry_fields(&g)?;
        let w = quermassintegrals(&g, &f)?;
        let ball = (0..=2)
            .map(|k| (w[k] - ball_profile(2, k, 1.0)).abs() / ball_profile(2, k, 1.0))
            .fold(0.0, f64::max);
        let d = deficit_from_quermass(&w, 1)?.raw.abs();
        let moved = recenter(&g, &hyperbolic::from_polar(0.3, [0.0, 0.0, 1.0]))?;
        let gap = moved.values().iter().fold(0.0f64, |a, r| a.max((r - 1.0).abs()));
        Ok((ball, d, gap))
    })();
    match result {
        Ok((ball, d, gap)) => check(
            name,
            ball <= 1e-6 && d <= 1e-6 && gap <= 1e-8,
            format!("quermass vs ball {ball:.3e}, deficit {d:.3e}, recentered radius gap {gap:.3e}"),
        ),
        Err(e) => failed(name, e),
    }
}

/// Monitors, conservation, monotonicity and the accumulated deficit on a
/// fixed small run.
fn canned_run() -> Vec<Check> {
    let result = (|| -> hypflow_core::Result<_> {
        let grid = SphereGrid::axisymmetric(2, 48)?;
        let kind = ShapeKind::PerturbedSphere { r0: 1.0, eps: 0.05, l: 2, order: 0 };
        let run = flow::run(FlowState::new(generate_shape(&kind, &grid)?, 1)?, &StopCriteria::default())?;
        let report = proof_trace_report(&run)?;
        Ok((run, report))
    })();
    let (run, report) = match result {
        Ok(x) => x,
        Err(e) => return vec![failed("canned flow run", e)],
    };
    let rows = &run.trace.rows;
    let w1 = rows[0].quermass[1];
    let drift = rows.iter().map(|r| (r.quermass[1] - w1).abs() / w1).fold(0.0, f64::max);
    let rise = rows
        .windows(2)
        .map(|p| (p[1].quermass[2] - p[0].quermass[2]) / p[0].quermass[2].abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let rel = report.relative_error.unwrap_or(f64::INFINITY);
    vec![
        check(
            "flow monitors",
            run.flags.is_empty() && run.converged && run.rejected_steps == 0,
            format!(
                "{} steps, {} flags, converged {}, {} rejections",
                rows.len() - 1,
                run.flags.len(),
                run.converged,
                run.rejected_steps
            ),
        ),
        check(
            "conservation and monotonicity",
            drift <= 1e-4 && rise <= 1e-10,
            format!("W1 drift {drift:.3e}, largest relative W2 rise {rise:.3e}"),
        ),
        check(
            "accumulated deficit",
            rel <= 1e-2 && report.min_integrand >= -1e-8,
            format!(
                "integral {:.6e} vs predicted {:.6e} (relative {rel:.3e})",
                report.accumulated, report.predicted
            ),
        ),
    ]
}

pub fn run_suite(cfg: &ExperimentConfig) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = vec![symfunc_fuzz(cfg.verify.fuzz_samples, &mut rng), round_spheres(), isometry_invariance()];
    checks.extend(shape_identities(cfg.verify.shapes, &mut rng));
    checks.extend(canned_run());
    VerifyReport { checks }
}
