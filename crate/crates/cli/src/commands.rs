use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use hypflow_core::conformal::{area_identity_check, conf_relation_residual, image_convexity_margin, to_ball};
use hypflow_core::flow::{self, FlowState, FlowTrace, TraceRow};
use hypflow_core::hypersurface::{
    generate_shape, geometry_fields, hconvexity_margin, inradius, quermassintegrals,
};
use hypflow_core::stability::{deficit_from_quermass, exponent_fit, stability_sweep, SweepOutcome, SweepRecord};
use hypflow_core::{RadialGraph, SphereGrid};

use crate::config::ExperimentConfig;
use crate::output::{create_file, sibling_plot, write_text, CsvWriter, Plot, Series};

pub fn build_graph(cfg: &ExperimentConfig) -> anyhow::Result<RadialGraph> {
    let grid = SphereGrid::new(cfg.backend, cfg.n, cfg.cells)?;
    Ok(generate_shape(&cfg.shape, &grid)?)
}

pub fn quermass(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let graph = build_graph(cfg)?;
    let fields = geometry_fields(&graph)?;
    let w = quermassintegrals(&graph, &fields)?;
    let d = deficit_from_quermass(&w, cfg.m)?;
    let mut s = String::new();
    for (k, wk) in w.iter().enumerate() {
        let _ = writeln!(s, "W{k} = {wk:.12}");
    }
    let _ = writeln!(s, "deficit (m = {}) = {:.6e}", cfg.m, d.raw);
    let _ = writeln!(s, "h-convexity margin = {:.6e}", hconvexity_margin(&fields));
    let _ = writeln!(s, "inradius = {:.12}", inradius(&graph).rho_minus);
    Ok(s)
}

fn trace_plots(trace: &FlowTrace, dir: &Path, name: &str) -> anyhow::Result<()> {
    let m = trace.m;
    let w = Plot {
        title: format!("W{} along the flow", m + 1),
        x_label: "t".into(),
        y_label: format!("W{}", m + 1),
        log_x: false,
        log_y: false,
        series: vec![Series {
            label: format!("W{}(t)", m + 1),
            points: trace.rows.iter().map(|r| (r.t, r.quermass[m + 1])).collect(),
            color: "steelblue",
            reference_slope: None,
            markers: false,
        }],
    };
    write_text(&sibling_plot(dir, name, "quermass"), &w.to_svg())?;
    let a = Plot {
        title: "traceless second fundamental form".into(),
        x_label: "t".into(),
        y_label: "norm".into(),
        log_x: false,
        log_y: true,
        series: vec![
            Series {
                label: "L2 norm".into(),
                points: trace.rows.iter().map(|r| (r.t, r.atr_l2)).collect(),
                color: "firebrick",
                reference_slope: None,
                markers: false,
            },
            Series {
                label: "max norm".into(),
                points: trace.rows.iter().map(|r| (r.t, r.atr_max)).collect(),
                color: "darkorange",
                reference_slope: None,
                markers: false,
            },
        ],
    };
    write_text(&sibling_plot(dir, name, "traceless"), &a.to_svg())
}

pub fn flow(cfg: &ExperimentConfig, dir: &Path, plot: bool) -> anyhow::Result<String> {
    let graph = build_graph(cfg)?;
    let path = dir.join(&cfg.outputs.trace);
    let mut csv = CsvWriter::new(create_file(&path)?, &FlowTrace::columns(cfg.n))
        .with_context(|| format!("writing {}", path.display()))?;
    let mut io_error = None;
    let result = FlowState::new(graph, cfg.m).and_then(|state| {
        flow::run_with(state, &cfg.flow, |row: &TraceRow| {
            if io_error.is_none() {
                io_error = csv.row(&row.values()).err();
            }
        })
    });
    if let Some(e) = io_error {
        return Err(anyhow::Error::new(e).context(format!("writing {}", path.display())));
    }
    let run = match result {
        Ok(run) => run,
        Err(e) => {
            csv.fail(&e.to_string()).with_context(|| format!("writing {}", path.display()))?;
            return Err(e.into());
        }
    };
    csv.finish().with_context(|| format!("writing {}", path.display()))?;
    if plot {
        trace_plots(&run.trace, dir, &cfg.outputs.trace)?;
    }

    let first = &run.trace.rows[0];
    let last = run.trace.rows.last().expect("trace has a first row");
    let m = cfg.m;
    let mut s = String::new();
    let _ = writeln!(s, "steps = {}", run.trace.rows.len() - 1);
    let _ = writeln!(s, "t = {:.6}", last.t);
    let _ = writeln!(s, "converged = {}", run.converged);
    let _ = writeln!(s, "rejected steps = {}", run.rejected_steps);
    let _ = writeln!(
        s,
        "W{m} drift = {:.3e}",
        (last.quermass[m] - first.quermass[m]).abs() / first.quermass[m]
    );
    let _ = writeln!(s, "W{} = {:.12} -> {:.12}", m + 1, first.quermass[m + 1], last.quermass[m + 1]);
    let _ = writeln!(s, "monitor flags = {}", run.flags.len());
    for f in &run.flags {
        let _ = writeln!(s, "  {} at t = {:.6}: {:.6e} vs {:.6e}", f.monitor, f.t, f.value, f.bound);
    }
    let _ = writeln!(s, "trace = {}", path.display());
    Ok(s)
}

/// Worker count: `HYPFLOW_THREADS`, then the config, then rayon's default.
pub fn worker_count(cfg: &ExperimentConfig) -> anyhow::Result<Option<usize>> {
    match std::env::var("HYPFLOW_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| crate::config::ConfigError {
                    issues: vec![crate::config::Issue {
                        path: "HYPFLOW_THREADS".into(),
                        message: format!("expected a positive integer, got {v:?}"),
                    }],
                })?;
            Ok(Some(n.max(1)))
        }
        Err(_) => Ok(cfg.threads),
    }
}

fn sweep_plot(out: &SweepOutcome) -> Plot {
    let m = out.m;
    let pts: Vec<(f64, f64)> = out
        .records
        .iter()
        .filter(|r| r.eps > 0.0 && r.deficit > 0.0 && r.dist > 0.0)
        .map(|r| (r.deficit, r.dist))
        .collect();
    let mut series = vec![Series {
        label: "dist vs deficit".into(),
        points: pts.clone(),
        color: "steelblue",
        reference_slope: None,
        markers: true,
    }];
    // reference lines through the largest perturbation
    if let (Some(&anchor), Some(lo)) = (pts.iter().max_by(|a, b| a.0.total_cmp(&b.0)), pts.iter().map(|p| p.0).reduce(f64::min)) {
        let p = 1.0 / (m as f64 + 2.0);
        for (slope, label, color) in [(p, format!("slope 1/{}", m + 2), "gray"), (0.5, "slope 1/2".to_string(), "seagreen")] {
            let y = |x: f64| anchor.1 * (x / anchor.0).powf(slope);
            series.push(Series {
                label,
                points: vec![(lo, y(lo)), (anchor.0, y(anchor.0))],
                color,
                reference_slope: Some(slope),
                markers: false,
            });
        }
    }
    Plot {
        title: format!("stability sweep, m = {m}"),
        x_label: "deficit".into(),
        y_label: "dist".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> anyhow::Result<()> {
    let ctx = || format!("writing {}", path.display());
    let mut csv = CsvWriter::new(create_file(path)?, &SweepRecord::COLUMNS).with_context(ctx)?;
    for r in records {
        csv.row(&r.values()).with_context(ctx)?;
    }
    csv.finish().with_context(ctx)
}

pub fn sweep(cfg: &ExperimentConfig, dir: &Path, plot: bool) -> anyhow::Result<String> {
    let family = cfg.sweep_family()?;
    let grid = SphereGrid::new(cfg.backend, cfg.n, cfg.cells)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_count(cfg)? {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("starting the worker pool")?;
    let out = pool.install(|| stability_sweep(&family, cfg.m, &grid, &cfg.sweep.eps));

    let path = dir.join(&cfg.outputs.sweep);
    write_sweep_csv(&path, &out.records)?;
    if plot {
        write_text(&sibling_plot(dir, &cfg.outputs.sweep, "loglog"), &sweep_plot(&out).to_svg())?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "members = {}, rejected = {}", out.records.len(), out.rejected.len());
    for (e, err) in &out.rejected {
        let _ = writeln!(s, "  eps = {e}: {err}");
    }
    let _ = writeln!(s, "realized constant C* = {:.6e}", out.realized_constant());
    match exponent_fit(&out.records) {
        Ok(fit) => {
            let _ = writeln!(s, "slope = {:.4} (r^2 = {:.6})", fit.slope, fit.r_squared);
        }
        Err(e) => {
            let _ = writeln!(s, "slope unavailable: {e}");
        }
    }
    let _ = writeln!(s, "sweep = {}", path.display());
    Ok(s)
}

pub fn conformal(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<String> {
    let graph = build_graph(cfg)?;
    let fields = geometry_fields(&graph)?;
    let image = to_ball(&graph)?;
    let res = conf_relation_residual(&fields, &image);
    let area = area_identity_check(&fields, &image);
    let mut s = String::new();
    let _ = writeln!(s, "shape_operator_residual_max = {:.6e}", res.max);
    let _ = writeln!(s, "shape_operator_residual_l2 = {:.6e}", res.l2);
    let _ = writeln!(s, "image_convexity_margin = {:.6e}", image_convexity_margin(&image));
    let _ = writeln!(s, "area = {:.12}", area.hyperbolic);
    let _ = writeln!(s, "weighted_image_area = {:.12}", area.weighted_image);
    let _ = writeln!(s, "image_area = {:.12}", area.image);
    let _ = writeln!(s, "area_relative_mismatch = {:.6e}", area.relative_mismatch);
    let _ = writeln!(s, "area_comparability = {:.12}", area.comparability);
    write_text(&dir.join(&cfg.outputs.conformal), &s)?;
    Ok(s)
}
