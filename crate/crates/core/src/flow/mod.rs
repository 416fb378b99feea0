//! The locally constrained flow `∂_t X = (λ'(r)/F − u) ν`, `F = E_m/E_{m-1}`,
//! integrated in graph gauge as `∂_t r = v λ'(r)/F − λ(r)` with explicit RK4.

mod checks;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::{
    geometry_fields, hconvexity_margin, inradius, quermassintegrals, radius_extremes, traceless_measures,
    GeometryFields, RadialGraph,
};
use crate::symfunc;

pub use checks::{pointwise_f_check, variational_check, PointwiseReport, VariationalReport};
pub use trace::{FlowTrace, Monitor, MonitorFlag, TraceRow};

/// Slack allowed on `κ_i ≥ 1` before a state counts as not h-convex.
pub const HCONVEX_TOL: f64 = 1e-8;
/// Allowed per-step relative increase of `W_{m+1}`.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Slack of the runtime monitors.
pub const MONITOR_TOL: f64 = 1e-8;
const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopCriteria {
    /// Stop once both `‖Å‖_∞` and `max |f|` fall below this.
    pub tol_stop: f64,
    /// Stop once `max |f|` falls below this alone.
    pub speed_floor: f64,
    pub t_max: f64,
    pub c_cfl: f64,
    pub max_steps: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self { tol_stop: 1e-6, speed_floor: 1e-10, t_max: 100.0, c_cfl: 0.2, max_steps: 2_000_000 }
    }
}

/// Normal speed `f = λ'/F − u` and the graph-gauge rate `∂_t r = f v`.
#[derive(Debug, Clone)]
pub struct Speed {
    pub normal: Vec<f64>,
    pub graph_rate: Vec<f64>,
}

pub fn normal_speed(fields: &GeometryFields, m: usize) -> Result<Speed> {
    let f = fields.quotient(m)?;
    let mut normal = Vec::with_capacity(fields.len());
    let mut graph_rate = Vec::with_capacity(fields.len());
    for (i, &fi) in f.iter().enumerate() {
        if !(fi > 0.0) {
            return Err(Error::ConeViolation(format!("F = {fi} at node {i}")));
        }
        let s = fields.warp.lambda_prime(fields.radius[i]) / fi - fields.support[i];
        normal.push(s);
        graph_rate.push(s * fields.grad_factor[i]);
    }
    Ok(Speed { normal, graph_rate })
}

fn rate(graph: &RadialGraph, m: usize) -> Result<Vec<f64>> {
    let fields = geometry_fields(graph)?;
    let mut rate = normal_speed(&fields, m)?.graph_rate;
    graph.grid().polar_filter(&mut rate);
    Ok(rate)
}

/// One classical RK4 step without acceptance tests; `dt` may be negative.
pub(crate) fn rk4_advance(graph: &RadialGraph, m: usize, dt: f64) -> Result<RadialGraph> {
    let grid = graph.grid();
    let r0 = graph.values();
    let stage = |k: &[f64], c: f64| -> Result<RadialGraph> {
        let vals = r0.iter().zip(k).map(|(r, k)| r + c * dt * k).collect();
        RadialGraph::new(grid.clone(), vals)
    };
    let k1 = rate(graph, m)?;
    let k2 = rate(&stage(&k1, 0.5)?, m)?;
    let k3 = rate(&stage(&k2, 0.5)?, m)?;
    let k4 = rate(&stage(&k3, 1.0)?, m)?;
    let vals = (0..r0.len())
        .map(|i| r0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    RadialGraph::new(grid.clone(), vals)
}

/// Quantities of the initial domain that the monitors compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub quermass: Vec<f64>,
    pub max_f: f64,
    pub min_r: f64,
    pub max_r: f64,
    /// `min r(0)` located between nodes; `u ≥ λ` of it along the flow.
    pub min_r_refined: f64,
    pub rho_minus: f64,
    pub radii: Vec<f64>,
}

/// A point of the flow: the graph at time `t` with its cached geometry.
#[derive(Debug, Clone)]
pub struct FlowState {
    graph: RadialGraph,
    t: f64,
    m: usize,
    fields: GeometryFields,
    quermass: Vec<f64>,
    speed: Speed,
    initial: std::sync::Arc<InitialData>,
}

impl FlowState {
    /// Starts a flow from an h-convex graph.
    pub fn new(graph: RadialGraph, m: usize) -> Result<Self> {
        let n = graph.n();
        if m == 0 || m >= n {
            return Err(Error::domain(format!("m = {m} out of range 1..{}", n - 1)));
        }
        let fields = geometry_fields(&graph)?;
        let margin = hconvexity_margin(&fields);
        if margin < -HCONVEX_TOL {
            return Err(Error::NotHConvex { min_kappa: 1.0 + margin });
        }
        let quermass = quermassintegrals(&graph, &fields)?;
        let speed = normal_speed(&fields, m)?;
        let f = fields.quotient(m)?;
        let initial = InitialData {
            quermass: quermass.clone(),
            max_f: f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_r: graph.min_radius(),
            max_r: graph.max_radius(),
            min_r_refined: radius_extremes(&graph).0,
            rho_minus: inradius(&graph).rho_minus,
            radii: graph.values().to_vec(),
        };
        Ok(Self { graph, t: 0.0, m, fields, quermass, speed, initial: initial.into() })
    }

    fn advanced(&self, graph: RadialGraph, t: f64) -> Result<Self> {
        let fields = geometry_fields(&graph)?;
        let quermass = quermassintegrals(&graph, &fields)?;
        let speed = normal_speed(&fields, self.m)?;
        Ok(Self { graph, t, m: self.m, fields, quermass, speed, initial: self.initial.clone() })
    }

    pub fn graph(&self) -> &RadialGraph {
        &self.graph
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn fields(&self) -> &GeometryFields {
        &self.fields
    }

    /// `W_0 … W_n` at the current time.
    pub fn quermass(&self) -> &[f64] {
        &self.quermass
    }

    pub fn speed(&self) -> &Speed {
        &self.speed
    }

    pub fn initial(&self) -> &InitialData {
        &self.initial
    }

    pub fn max_speed(&self) -> f64 {
        self.speed.normal.iter().fold(0.0, |a, s| a.max(s.abs()))
    }

    /// `c_cfl (λ_min Δθ)² min F² / max λ'`.
    pub fn stable_dt(&self, c_cfl: f64) -> f64 {
        let h = self.graph.grid().spacing();
        let lam_min = self.graph.min_radius().sinh();
        let max_lp = self.graph.max_radius().cosh();
        let min_f = self
            .fields
            .quotient(self.m)
            .map(|f| f.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(1.0);
        c_cfl * (lam_min * h).powi(2) * min_f * min_f / max_lp
    }

    /// Pointwise `λ'(E_m − E_{m+1}E_{m−1}/E_m)`, nonnegative by Newton–Maclaurin.
    pub fn deficit_integrand(&self) -> Vec<f64> {
        let m = self.m;
        (0..self.fields.len())
            .map(|i| {
                let e = self.fields.esym(i);
                let lp = self.fields.warp.lambda_prime(self.fields.radius[i]);
                lp * (e[m] - e[m + 1] * e[m - 1] / e[m])
            })
            .collect()
    }

    /// [`Self::deficit_integrand`] integrated over `M_t`.
    pub fn deficit_rate(&self) -> f64 {
        self.deficit_integrand()
            .iter()
            .enumerate()
            .map(|(i, x)| x * self.fields.measure(i))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: FlowState,
    /// Step actually taken.
    pub dt: f64,
    pub halvings: u32,
}

/// Advances by `dt`, halving until the new state is finite, h-convex and has
/// not increased `W_{m+1}`.
pub fn step(state: &FlowState, dt: f64) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step {dt} must be positive")));
    }
    let m = state.m;
    let w_next = state.quermass[m + 1];
    let mut h = dt;
    let mut reason = String::new();
    for halvings in 0..=MAX_HALVINGS {
        match try_step(state, h, w_next) {
            Ok(next) => return Ok(StepOutcome { state: next, dt: h, halvings }),
            Err(why) => reason = why,
        }
        h *= 0.5;
    }
    Err(Error::StepFailure { t: state.t, halvings: MAX_HALVINGS, reason })
}

fn try_step(state: &FlowState, dt: f64, w_next: f64) -> std::result::Result<FlowState, String> {
    let graph = rk4_advance(&state.graph, state.m, dt).map_err(|e| e.to_string())?;
    let next = state.advanced(graph, state.t + dt).map_err(|e| e.to_string())?;
    let margin = hconvexity_margin(&next.fields);
    if !(margin >= -HCONVEX_TOL) {
        return Err(format!("h-convexity lost (min κ − 1 = {margin:e})"));
    }
    let rise = next.quermass[state.m + 1] - w_next;
    if !(rise <= MONOTONE_TOL * w_next.abs()) {
        return Err(format!("W_{} increased by {rise:e}", state.m + 1));
    }
    if next.quermass.iter().any(|w| !w.is_finite()) {
        return Err("non-finite quermassintegral".into());
    }
    Ok(next)
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub state: FlowState,
    pub flags: Vec<MonitorFlag>,
    /// Whether a stopping tolerance (rather than `t_max` or the step cap) ended the run.
    pub converged: bool,
    pub rejected_steps: usize,
}

pub fn run(state: FlowState, stop: &StopCriteria) -> Result<FlowRun> {
    run_with(state, stop, |_| {})
}

/// Like [`run`], handing every trace row to `observer` as soon as it exists.
pub fn run_with<O>(mut state: FlowState, stop: &StopCriteria, mut observer: O) -> Result<FlowRun>
where
    O: FnMut(&TraceRow),
{
    let mut trace = FlowTrace::new(state.graph.n(), state.m);
    let mut flags = Vec::new();
    let mut monitor = trace::MonitorState::new(&state);

    let first = trace::row(&state, 0.0, 0.0);
    monitor.check(&state, &first, 0, &mut flags);
    observer(&first);
    trace.rows.push(first);

    let mut scale = 1.0;
    let mut rejected = 0;
    let mut converged = false;
    for _ in 0..stop.max_steps {
        let last = trace.rows.last().expect("trace has a first row");
        let max_speed = state.max_speed();
        if (last.atr_max < stop.tol_stop && max_speed < stop.tol_stop) || max_speed < stop.speed_floor {
            converged = true;
            break;
        }
        if state.t > stop.t_max {
            break;
        }
        let dt = scale * state.stable_dt(stop.c_cfl);
        let outcome = step(&state, dt)?;
        if outcome.halvings > 0 {
            rejected += outcome.halvings as usize;
            scale *= 0.5f64.powi(outcome.halvings as i32);
            log::debug!("t = {:.6}: step halved {} times", state.t, outcome.halvings);
        }
        let cum = last.cum_deficit_integral
            + 0.5 * outcome.dt * (last.deficit_rate + outcome.state.deficit_rate());
        state = outcome.state;
        let row = trace::row(&state, outcome.dt, cum);
        monitor.check(&state, &row, trace.rows.len(), &mut flags);
        observer(&row);
        trace.rows.push(row);
    }
    for f in &flags {
        log::warn!("monitor {} at t = {:.6}: {:e} vs bound {:e}", f.monitor, f.t, f.value, f.bound);
    }
    Ok(FlowRun { trace, state, flags, converged, rejected_steps: rejected })
}

/// `‖Å‖` norms and h-convexity margin of a state, used by the trace.
pub(crate) fn shape_summary(fields: &GeometryFields) -> (f64, f64, f64) {
    let t = traceless_measures(fields);
    (t.l2, t.max, hconvexity_margin(fields))
}

/// `F` field of a state.
pub(crate) fn quotient_field(fields: &GeometryFields, m: usize) -> Result<Vec<f64>> {
    (0..fields.len())
        .map(|i| symfunc::quotient_slice(fields.kappa(i), m, None))
        .collect()
}
