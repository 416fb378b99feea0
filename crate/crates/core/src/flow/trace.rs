use std::fmt;

use super::{quotient_field, shape_summary, FlowState, MONITOR_TOL};

/// Monitored quantities after one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub dt: f64,
    pub quermass: Vec<f64>,
    pub min_f: f64,
    pub max_f: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub min_r: f64,
    pub max_r: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub atr_l2: f64,
    pub atr_max: f64,
    pub min_kappa_minus_1: f64,
    /// `∫_0^t ∫ λ'(E_m − E_{m+1}E_{m−1}/E_m) dμ dt` by the trapezoid rule.
    pub cum_deficit_integral: f64,
    /// The inner integral at time `t`.
    pub deficit_rate: f64,
    /// Smallest pointwise value of its integrand.
    pub min_deficit_integrand: f64,
    pub max_speed: f64,
    /// `max v`, the largest radial stretch of the normal speed.
    pub max_grad_factor: f64,
}

impl TraceRow {
    /// Values in the order of [`FlowTrace::columns`].
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.dt];
        v.extend_from_slice(&self.quermass);
        v.extend_from_slice(&[
            self.min_f,
            self.max_f,
            self.min_h,
            self.max_h,
            self.min_r,
            self.max_r,
            self.min_u,
            self.atr_l2,
            self.atr_max,
            self.min_kappa_minus_1,
            self.cum_deficit_integral,
        ]);
        v
    }
}

fn extremes(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

pub(super) fn row(state: &FlowState, dt: f64, cum: f64) -> TraceRow {
    let fields = state.fields();
    let f = quotient_field(fields, state.m()).expect("accepted states lie in the cone");
    let (min_f, max_f) = extremes(&f);
    let (min_h, max_h) = extremes(&fields.mean_curvature());
    let (min_u, max_u) = extremes(&fields.support);
    let (atr_l2, atr_max, margin) = shape_summary(fields);
    TraceRow {
        t: state.t(),
        dt,
        quermass: state.quermass().to_vec(),
        min_f,
        max_f,
        min_h,
        max_h,
        min_r: state.graph().min_radius(),
        max_r: state.graph().max_radius(),
        min_u,
        max_u,
        atr_l2,
        atr_max,
        min_kappa_minus_1: margin,
        cum_deficit_integral: cum,
        deficit_rate: state.deficit_rate(),
        min_deficit_integrand: extremes(&state.deficit_integrand()).0,
        max_speed: state.max_speed(),
        max_grad_factor: extremes(&fields.grad_factor).1,
    }
}

/// Time series of a flow run, one row per accepted step after the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<TraceRow>,
}

impl FlowTrace {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m, rows: Vec::new() }
    }

    pub fn columns(n: usize) -> Vec<String> {
        let mut c = vec!["t".to_string(), "dt".to_string()];
        c.extend((0..=n).map(|k| format!("W{k}")));
        c.extend(
            [
                "minF",
                "maxF",
                "minH",
                "maxH",
                "minr",
                "maxr",
                "minu",
                "AtrL2",
                "AtrMax",
                "minKappaMinus1",
                "cumDeficitIntegral",
            ]
            .map(String::from),
        );
        c
    }

    /// `∫ ‖Å‖²_{L²} dt` over `[a, b]`, linear in time between rows.
    pub fn traceless_window(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for w in self.rows.windows(2) {
            let (t0, t1) = (w[0].t, w[1].t);
            let lo = t0.max(a);
            let hi = t1.min(b);
            if hi <= lo || t1 <= t0 {
                continue;
            }
            let y = |t: f64| {
                let s = (t - t0) / (t1 - t0);
                (1.0 - s) * w[0].atr_l2.powi(2) + s * w[1].atr_l2.powi(2)
            };
            total += 0.5 * (hi - lo) * (y(lo) + y(hi));
        }
        total
    }

    /// Smallest `‖Å‖_{L²}` over rows with `t ∈ [a, b]`.
    pub fn traceless_window_min(&self, a: f64, b: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.t >= a && r.t <= b)
            .map(|r| r.atr_l2)
            .reduce(f64::min)
    }
}

/// The a priori estimates checked along a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Monitor {
    /// `F ≥ 1`
    FLower,
    /// `F ≤ max F(0)`
    FUpper,
    /// `H ≥ n`
    HLower,
    /// `min r` non-decreasing
    MinRadius,
    /// `max r` non-increasing
    MaxRadius,
    /// `u ≥ λ(min r(0))`
    SupportLower,
    /// `u ≤ exp(ρ_−(Ω₀))`
    SupportUpper,
    /// `|f| ≤ 2 cosh ρ_−(Ω₀)`
    SpeedBound,
    /// radial gap to `M_0` at most `2 cosh ρ_−(Ω₀) · max v · t`
    DistanceGrowth,
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Monitor::FLower => "F >= 1",
            Monitor::FUpper => "F <= max F(0)",
            Monitor::HLower => "H >= n",
            Monitor::MinRadius => "min r non-decreasing",
            Monitor::MaxRadius => "max r non-increasing",
            Monitor::SupportLower => "u >= lambda(min r(0))",
            Monitor::SupportUpper => "u <= exp(rho_-)",
            Monitor::SpeedBound => "|f| <= 2 cosh(rho_-)",
            Monitor::DistanceGrowth => "dist(M_t, M_0) <= C t",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorFlag {
    pub monitor: Monitor,
    pub row: usize,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

pub(super) struct MonitorState {
    prev_min_r: f64,
    prev_max_r: f64,
    max_v: f64,
}

impl MonitorState {
    pub fn new(state: &FlowState) -> Self {
        let init = state.initial();
        Self { prev_min_r: init.min_r, prev_max_r: init.max_r, max_v: 1.0 }
    }

    pub fn check(&mut self, state: &FlowState, row: &TraceRow, index: usize, flags: &mut Vec<MonitorFlag>) {
        let init = state.initial();
        let n = state.graph().n() as f64;
        let mut flag = |monitor, ok: bool, value, bound| {
            if !ok {
                flags.push(MonitorFlag { monitor, row: index, t: row.t, value, bound });
            }
        };
        flag(Monitor::FLower, row.min_f >= 1.0 - MONITOR_TOL, row.min_f, 1.0);
        flag(Monitor::FUpper, row.max_f <= init.max_f + MONITOR_TOL, row.max_f, init.max_f);
        flag(Monitor::HLower, row.min_h >= n - MONITOR_TOL, row.min_h, n);
        flag(Monitor::MinRadius, row.min_r >= self.prev_min_r - MONITOR_TOL, row.min_r, self.prev_min_r);
        flag(Monitor::MaxRadius, row.max_r <= self.prev_max_r + MONITOR_TOL, row.max_r, self.prev_max_r);
        let u_floor = init.min_r_refined.sinh();
        flag(Monitor::SupportLower, row.min_u >= u_floor - MONITOR_TOL, row.min_u, u_floor);
        let u_ceiling = init.rho_minus.exp();
        flag(Monitor::SupportUpper, row.max_u <= u_ceiling + MONITOR_TOL, row.max_u, u_ceiling);
        let speed_bound = 2.0 * init.rho_minus.cosh();
        flag(Monitor::SpeedBound, row.max_speed <= speed_bound + MONITOR_TOL, row.max_speed, speed_bound);
        self.max_v = self.max_v.max(row.max_grad_factor);
        let gap = state
            .graph()
            .values()
            .iter()
            .zip(&init.radii)
            .fold(0.0f64, |a, (r, r0)| a.max((r - r0).abs()));
        let reach = speed_bound * self.max_v * row.t;
        flag(Monitor::DistanceGrowth, gap <= reach + MONITOR_TOL, gap, reach);
        self.prev_min_r = row.min_r;
        self.prev_max_r = row.max_r;
    }
}
