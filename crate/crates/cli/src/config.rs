//! Strict JSON experiment configuration.

use std::fmt;
use std::path::Path;

use hypflow_core::hypersurface::ShapeKind;
use hypflow_core::stability::SweepFamily;
use hypflow_core::{Backend, StopCriteria};
use serde::Deserialize;

/// Constraint violations or schema errors, each tagged with its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { issues: vec![Issue { path: path.into(), message: message.into() }] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for i in &self.issues {
            write!(f, "\n  {}: {}", i.path, i.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.1, 0.05, 0.025, 0.0125] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random spectra for the symmetric-function fuzz.
    pub fuzz_samples: usize,
    /// Random h-convex shapes for the integral identities.
    pub shapes: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { fuzz_samples: 20_000, shapes: 20 }
    }
}

/// Output file names, created inside the `--out` directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputNames {
    pub trace: String,
    pub sweep: String,
    pub conformal: String,
    pub verify: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        Self {
            trace: "flow.csv".into(),
            sweep: "sweep.csv".into(),
            conformal: "conformal.txt".into(),
            verify: "verify.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub backend: Backend,
    #[serde(rename = "J")]
    pub cells: usize,
    pub shape: ShapeKind,
    #[serde(default)]
    pub flow: StopCriteria,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for sweeps; `HYPFLOW_THREADS` takes precedence.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub outputs: OutputNames,
    #[serde(default)]
    pub verify: VerifyConfig,
}

pub fn parse_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single(path.display().to_string(), format!("cannot read config: {e}")))?;
    Ok(parse_str(&text)?)
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::single(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut bad = |path: &str, message: String| issues.push(Issue { path: path.into(), message });
        if self.n < 2 {
            bad("n", format!("n must be at least 2, got {}", self.n));
        }
        if self.m < 1 || self.m + 1 > self.n {
            bad("m", format!("m out of range 1..n-1 (m = {}, n = {})", self.m, self.n));
        }
        if self.backend == Backend::FullSphere && self.n != 2 {
            bad("backend", format!("backend \"full\" requires n = 2, got n = {}", self.n));
        }
        if self.cells < 16 {
            bad("J", format!("J must be at least 16, got {}", self.cells));
        }
        match self.shape {
            ShapeKind::Sphere { r0 } => {
                if !positive(r0) {
                    bad("shape.r0", format!("r0 must be positive, got {r0}"));
                }
            }
            ShapeKind::OffsetSphere { r0, a } => {
                if !positive(r0) {
                    bad("shape.r0", format!("r0 must be positive, got {r0}"));
                }
                if !(a.is_finite() && a >= 0.0 && a < r0) {
                    bad("shape.a", format!("a must lie in [0, r0), got {a}"));
                }
            }
            ShapeKind::PerturbedSphere { r0, eps, l, order } => {
                if !positive(r0) {
                    bad("shape.r0", format!("r0 must be positive, got {r0}"));
                }
                if !eps.is_finite() {
                    bad("shape.eps", format!("eps must be finite, got {eps}"));
                }
                if order > l {
                    bad("shape.order", format!("order {order} exceeds degree l = {l}"));
                }
                if order > 0 && self.backend == Backend::Axisymmetric {
                    bad("shape.order", "non-zonal modes need the full backend".into());
                }
            }
        }
        let stop = &self.flow;
        for (key, v) in [
            ("flow.c_cfl", stop.c_cfl),
            ("flow.tol_stop", stop.tol_stop),
            ("flow.speed_floor", stop.speed_floor),
            ("flow.t_max", stop.t_max),
        ] {
            if !positive(v) {
                bad(key, format!("tolerance must be positive, got {v}"));
            }
        }
        if stop.max_steps == 0 {
            bad("flow.max_steps", "max_steps must be positive".into());
        }
        if self.sweep.eps.is_empty() {
            bad("sweep.eps", "eps list is empty".into());
        }
        for (i, e) in self.sweep.eps.iter().enumerate() {
            if !(e.is_finite() && *e >= 0.0) {
                bad(&format!("sweep.eps[{i}]"), format!("eps must be finite and nonnegative, got {e}"));
            }
        }
        if self.threads == Some(0) {
            bad("threads", "threads must be positive".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    /// The sweep family spanned by the configured perturbed shape.
    pub fn sweep_family(&self) -> Result<SweepFamily, ConfigError> {
        match self.shape {
            ShapeKind::PerturbedSphere { r0, l, order, .. } if l >= 2 => Ok(SweepFamily { r0, l, order }),
            ShapeKind::PerturbedSphere { l, .. } => Err(ConfigError::single(
                "shape.l",
                format!("sweeps need modes l >= 2, got {l}"),
            )),
            _ => Err(ConfigError::single("shape.kind", "sweeps need a perturbed_sphere family")),
        }
    }
}
