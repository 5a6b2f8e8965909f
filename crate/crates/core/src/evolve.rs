//! Semi-Lagrangian evolution of the graph in rescaled time.
//!
//! Characteristics move with u1 while the height relaxes through u2. The
//! default long-horizon mode evolves the rescaled height e^t f with the
//! linear decay integrated exactly, so only the damping remainder R is
//! discretized: f⁺(x) = f(X) exp(-dt (1 + R)). Monotone interpolation of the
//! backtraced height keeps the maximum principle and positivity intact step
//! by step; violations of the invariants abort the run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{monotone_interp, SampledGraph};
use crate::norms::{norm_report, NormReport};
use crate::scenario::Scenario;
use crate::velocity::{core_fields, core_fields_eps, damping_r, CoreFields};

/// Time stepping flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// f(X) + dt u2 at the midpoint state.
    Plain,
    /// e^t f advected with exact exponential damping of the linear part.
    Rescaled,
}

/// Discrete characteristic map: seed points, current positions, Jacobians,
/// and the accumulated logarithmic gain of e^t f along each trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowMap {
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    pub jac: Vec<f64>,
    pub log_gain: Vec<f64>,
    pub gain_valid: Vec<bool>,
}

impl FlowMap {
    /// Seeds trackers at every support endpoint plus a uniform sample of the
    /// hull interior.
    pub fn seed(components: &[(f64, f64)], hull: (f64, f64), uniform: usize) -> FlowMap {
        let mut pts: Vec<f64> = Vec::new();
        for &(a, b) in components {
            pts.push(a);
            pts.push(b);
        }
        for k in 0..uniform {
            pts.push(hull.0 + (hull.1 - hull.0) * (k as f64 + 0.5) / uniform as f64);
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let m = pts.len();
        FlowMap { x0: pts.clone(), x: pts, jac: vec![1.0; m], log_gain: vec![0.0; m], gain_valid: vec![true; m] }
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    /// Index of the tracker seeded exactly at x0 (within rounding).
    pub fn tracker_at(&self, x0: f64) -> Option<usize> {
        self.x0.iter().position(|&p| (p - x0).abs() < 1e-12)
    }
}

/// Inverse characteristic map by monotone interpolation of (x, x0) pairs.
pub fn flow_inverse(flow: &FlowMap, x: f64) -> Result<f64> {
    monotone_interp(&flow.x, &flow.x0, x)
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    pub clamped_mass: f64,
    pub min_pre_clamp: f64,
    pub u1_max_abs: f64,
    pub r_linf: f64,
    pub dt_max: f64,
}

fn field_graph(template: &SampledGraph, values: Vec<f64>) -> SampledGraph {
    SampledGraph { x_lo: template.x_lo, x_hi: template.x_hi, n: template.n, time: template.time, values }
}

fn fields_for(g: &SampledGraph, eps: Option<f64>) -> Result<CoreFields> {
    match eps {
        None => core_fields(g),
        Some(e) => core_fields_eps(g, e),
    }
}

struct AveragedFields {
    u1: SampledGraph,
    u2: SampledGraph,
    du1: SampledGraph,
    r: SampledGraph,
    r_linf: f64,
}

fn average_fields(g: &SampledGraph, a: &CoreFields, ga: &SampledGraph, b: &CoreFields, gb: &SampledGraph) -> AveragedFields {
    let mix = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| 0.5 * (x + y)).collect() };
    let ra = damping_r(ga, &a.u2);
    let rb = damping_r(gb, &b.u2);
    let r = mix(&ra, &rb);
    let r_linf = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    AveragedFields {
        u1: field_graph(g, mix(&a.u1, &b.u1)),
        u2: field_graph(g, mix(&a.u2, &b.u2)),
        du1: field_graph(g, mix(&a.du1, &b.du1)),
        r: field_graph(g, r),
        r_linf,
    }
}

/// One semi-Lagrangian update of the node values under frozen averaged fields.
fn sl_update(g: &SampledGraph, av: &AveragedFields, dt: f64, mode: Mode) -> (Vec<f64>, f64, f64) {
    let n = g.n;
    let mut vals = vec![0.0; n];
    let mut clamped = 0.0;
    let mut min_pre = f64::INFINITY;
    for i in 0..n {
        let x = g.x(i);
        let xm = x - 0.5 * dt * av.u1.values[i];
        let back = x - dt * av.u1.interpolate_signed(xm);
        let carried = g.interpolate(back);
        let v = match mode {
            Mode::Plain => carried + dt * av.u2.interpolate_signed(xm),
            Mode::Rescaled => carried * (-dt * (1.0 + av.r.interpolate_signed(xm))).exp(),
        };
        min_pre = min_pre.min(v);
        if v < 0.0 {
            clamped += -v;
            vals[i] = 0.0;
        } else {
            vals[i] = v;
        }
    }
    (vals, clamped * g.h(), min_pre)
}

fn advance_flow(flow: &FlowMap, av: &AveragedFields, g0: &SampledGraph, g1: &SampledGraph, dt: f64, guard: f64) -> FlowMap {
    let mut out = flow.clone();
    for k in 0..flow.len() {
        let x = flow.x[k];
        let xm = x + 0.5 * dt * av.u1.interpolate_signed(x);
        out.x[k] = x + dt * av.u1.interpolate_signed(xm);
        out.jac[k] = flow.jac[k] * (dt * av.du1.interpolate_signed(xm)).exp();
        let fmid = 0.5 * (g0.interpolate(xm) + g1.interpolate(xm));
        if fmid > guard {
            // d/dt ln(e^t f∘ψ) = -R along the characteristic
            out.log_gain[k] = flow.log_gain[k] - dt * av.r.interpolate_signed(xm);
        } else if flow.x0[k] > g0.x_lo && flow.x0[k] < g0.x_hi && g0.interpolate(flow.x0[k]) > guard {
            // an interior tracker left the guarded support: its gain is stale
            out.gain_valid[k] = false;
        }
    }
    out
}

fn step_impl(
    g: &SampledGraph,
    flow: &FlowMap,
    dt: f64,
    mode: Mode,
    eps: Option<f64>,
    guard: f64,
) -> Result<(SampledGraph, FlowMap, StepStats)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArg(format!("dt must be positive, got {dt}")));
    }
    let cf0 = fields_for(g, eps)?;
    let u1_max = cf0.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dt_max = 0.5 * g.h() / u1_max.max(1e-12);
    if dt > dt_max {
        return Err(Error::CflViolation { dt, dt_max });
    }

    // predictor under the frozen initial fields
    let av0 = average_fields(g, &cf0, g, &cf0, g);
    let (pred_vals, _, _) = sl_update(g, &av0, dt, mode);
    let g_star = SampledGraph { values: pred_vals, time: g.time + dt, ..g.clone() };
    let cf1 = fields_for(&g_star, eps)?;

    // corrector under time-averaged fields
    let av = average_fields(g, &cf0, g, &cf1, &g_star);
    let (vals, clamped_mass, min_pre_clamp) = sl_update(g, &av, dt, mode);
    if let Some(index) = vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "stepped graph values", index });
    }
    let g_next = SampledGraph { values: vals, time: g.time + dt, ..g.clone() };
    let flow_next = advance_flow(flow, &av, g, &g_next, dt, guard);
    let stats = StepStats { clamped_mass, min_pre_clamp, u1_max_abs: u1_max, r_linf: av.r_linf, dt_max };
    Ok((g_next, flow_next, stats))
}

/// One transport step under the full velocity laws.
pub fn step(g: &SampledGraph, flow: &FlowMap, dt: f64, mode: Mode) -> Result<(SampledGraph, FlowMap, StepStats)> {
    let guard = 1e-10 * g.linf().max(f64::MIN_POSITIVE);
    step_impl(g, flow, dt, mode, None, guard)
}

/// One transport step under the eps-truncated velocity laws.
pub fn step_eps(g: &SampledGraph, flow: &FlowMap, dt: f64, mode: Mode, eps: f64) -> Result<(SampledGraph, FlowMap, StepStats)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArg(format!("eps must be positive, got {eps}")));
    }
    let guard = 1e-10 * g.linf().max(f64::MIN_POSITIVE);
    step_impl(g, flow, dt, mode, Some(eps), guard)
}

/// Per-step monitor columns.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Monitors {
    pub time: Vec<f64>,
    pub mass: Vec<f64>,
    /// e^t |f|_L1 / |f0|_L1 - 1, the mass-law drift.
    pub scaled_mass_drift: Vec<f64>,
    pub linf: Vec<f64>,
    pub slope_linf: Vec<f64>,
    pub r_linf: Vec<f64>,
    pub support_lo: Vec<f64>,
    pub support_hi: Vec<f64>,
    pub min_f_support: Vec<f64>,
    pub clamped_mass: Vec<f64>,
    pub jac_min: Vec<f64>,
    pub jac_max: Vec<f64>,
    pub u1_max_abs: Vec<f64>,
}

/// One recorded state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub graph: SampledGraph,
    pub norms: NormReport,
    pub flow: FlowMap,
}

/// Named invariant with its worst observed violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantStat {
    pub name: String,
    pub max_violation: f64,
    pub time_of_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Full output of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scenario_name: String,
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    pub eps: Option<f64>,
    pub holder_s: f64,
    pub support_threshold: f64,
    pub initial_l1: f64,
    pub initial_linf: f64,
    pub initial_slope_linf: f64,
    pub initial_components: Vec<(f64, f64)>,
    pub snapshots: Vec<Snapshot>,
    pub monitors: Monitors,
    pub invariants: Vec<InvariantStat>,
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    abort: bool,
    max_violation: f64,
    time_of_max: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64, abort: bool) -> Self {
        Self { name, tolerance, abort, max_violation: 0.0, time_of_max: 0.0 }
    }

    fn update(&mut self, violation: f64, time: f64) -> Result<()> {
        if violation > self.max_violation {
            self.max_violation = violation;
            self.time_of_max = time;
        }
        if self.abort && violation > self.tolerance {
            return Err(Error::InvariantBreach {
                name: self.name,
                value: violation,
                tolerance: self.tolerance,
                time,
                node: None,
            });
        }
        Ok(())
    }

    fn stat(&self) -> InvariantStat {
        InvariantStat {
            name: self.name.into(),
            max_violation: self.max_violation,
            time_of_max: self.time_of_max,
            tolerance: self.tolerance,
            pass: self.max_violation <= self.tolerance,
        }
    }
}

/// Integrates a scenario to t_end, recording snapshots on the configured
/// cadence and asserting the transport invariants at every step.
pub fn run(sc: &Scenario) -> Result<TrajectoryRecord> {
    sc.validate()?;
    let mode = sc.resolved_mode();
    let eps = sc.solver.eps;
    let g0 = sc.initial_graph()?;
    let components0 = sc.initial_components()?;
    let support_threshold = 1e-10 * g0.linf().max(f64::MIN_POSITIVE);
    let hull = (g0.x_lo, g0.x_hi);
    let mut flow = FlowMap::seed(&components0, hull, 63);
    let mut g = g0.clone();
    let fp0 = g0.slope()?;
    let initial_l1 = g0.l1();
    let initial_linf = g0.linf();
    let initial_slope_linf = fp0.max_abs();

    let mut monitors = Monitors::default();
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut trackers = [
        Tracker::new("positivity", 1e-12, true),
        Tracker::new("max_principle", 1e-12, true),
        Tracker::new("support_confinement", 0.0, true),
        Tracker::new("endpoint_monotonicity", 1e-13, true),
        Tracker::new("flow_monotonicity", 0.0, true),
        Tracker::new("clamp_budget", 0.0, true),
        Tracker::new("slope_blowup_guard", 0.0, true),
        Tracker::new("jacobian_band", 0.0, false),
        Tracker::new("mass_law_drift", 1e-3, false),
    ];

    let record_monitors =
        |mon: &mut Monitors, g: &SampledGraph, flow: &FlowMap, r_linf: f64, clamped: f64, u1_max: f64| -> Result<()> {
            let fp = g.slope()?;
            let t = g.time;
            mon.time.push(t);
            let mass = g.l1();
            mon.mass.push(mass);
            mon.scaled_mass_drift.push(t.exp() * mass / initial_l1 - 1.0);
            mon.linf.push(g.linf());
            mon.slope_linf.push(fp.max_abs());
            mon.r_linf.push(r_linf);
            mon.support_lo.push(flow.x[0]);
            mon.support_hi.push(*flow.x.last().unwrap());
            let min_f = g
                .values
                .iter()
                .filter(|v| **v > support_threshold)
                .fold(f64::INFINITY, |m, v| m.min(*v));
            mon.min_f_support.push(if min_f.is_finite() { min_f } else { 0.0 });
            mon.clamped_mass.push(clamped);
            mon.jac_min.push(flow.jac.iter().fold(f64::INFINITY, |m, v| m.min(*v)));
            mon.jac_max.push(flow.jac.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)));
            mon.u1_max_abs.push(u1_max);
            Ok(())
        };

    let snap = |snaps: &mut Vec<Snapshot>, g: &SampledGraph, flow: &FlowMap| -> Result<()> {
        snaps.push(Snapshot {
            time: g.time,
            graph: g.clone(),
            norms: norm_report(g, sc.holder_s, support_threshold)?,
            flow: flow.clone(),
        });
        Ok(())
    };

    snap(&mut snapshots, &g, &flow)?;
    let mut next_snapshot = sc.outputs.snapshot_cadence;

    let n_steps = (sc.solver.t_end / sc.solver.dt).ceil() as usize;
    for k in 0..n_steps {
        let dt = sc.solver.dt.min(sc.solver.t_end - g.time).max(0.0);
        if dt <= 0.0 {
            break;
        }
        let prev_linf = g.linf();
        let prev_lo = flow.x[0];
        let prev_hi = *flow.x.last().unwrap();
        let (g_next, flow_next, stats) = step_impl(&g, &flow, dt, mode, eps, support_threshold)?;
        let t = g_next.time;

        record_monitors(&mut monitors, &g, &flow, stats.r_linf, stats.clamped_mass, stats.u1_max_abs)?;

        // hard invariants
        trackers[0].update((-stats.min_pre_clamp).max(0.0), t)?;
        let linf_next = g_next.linf();
        trackers[1].update((linf_next - prev_linf * (1.0 + 1e-12)).max(0.0) / prev_linf.max(1e-300), t)?;
        let boundary = g_next.values[0].abs().max(g_next.values[g_next.n - 1].abs());
        trackers[2].update(boundary, t)?;
        let endpoint_drift = (prev_lo - flow_next.x[0]).max(*flow_next.x.last().unwrap() - prev_hi).max(0.0);
        trackers[3].update(endpoint_drift, t)?;
        let min_gap = flow_next.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        trackers[4].update((-min_gap).max(0.0), t)?;
        let mass_now = g_next.l1();
        trackers[5].update((stats.clamped_mass - 1e-8 * mass_now).max(0.0), t)?;
        let slope_now = g_next.slope()?.max_abs();
        trackers[6].update((slope_now - 10.0 * initial_slope_linf.max(1e-300)).max(0.0), t)?;
        // recorded, non-aborting
        let j_dev = flow_next
            .jac
            .iter()
            .map(|j| (j - 1.0).abs())
            .fold(0.0f64, f64::max);
        trackers[7].update((j_dev - 0.5).max(0.0), t)?;
        trackers[8].update((t.exp() * mass_now / initial_l1 - 1.0).abs(), t)?;

        g = g_next;
        flow = flow_next;

        if g.time + 1e-12 >= next_snapshot || k + 1 == n_steps || g.time + 1e-12 >= sc.solver.t_end {
            snap(&mut snapshots, &g, &flow)?;
            while next_snapshot <= g.time + 1e-12 {
                next_snapshot += sc.outputs.snapshot_cadence;
            }
        }
        if g.time + 1e-12 >= sc.solver.t_end {
            break;
        }
    }

    // final monitor row with a fresh field evaluation
    let cf = fields_for(&g, eps)?;
    let r = damping_r(&g, &cf.u2);
    let r_linf = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let u1_max = cf.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    record_monitors(&mut monitors, &g, &flow, r_linf, 0.0, u1_max)?;

    Ok(TrajectoryRecord {
        scenario_name: sc.name.clone(),
        mode,
        dt: sc.solver.dt,
        t_end: sc.solver.t_end,
        eps,
        holder_s: sc.holder_s,
        support_threshold,
        initial_l1,
        initial_linf,
        initial_slope_linf,
        initial_components: components0,
        snapshots,
        monitors,
        invariants: trackers.iter().map(Tracker::stat).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn quick_scenario(n: usize, dt: f64, t_end: f64, mode: Mode) -> Scenario {
        let mut sc = builtin("small_bump").unwrap();
        sc.grid.n = n;
        sc.solver.dt = dt;
        sc.solver.t_end = t_end;
        sc.solver.mode = Some(mode);
        sc.outputs.snapshot_cadence = 0.25;
        sc
    }

    #[test]
    fn zero_scenario_stays_zero() {
        let g = SampledGraph::from_fn(-1.0, 1.0, 65, 0.0, |_| 0.0).unwrap();
        let flow = FlowMap::seed(&[(-0.5, 0.5)], (-1.0, 1.0), 16);
        let (g1, flow1, stats) = step(&g, &flow, 1e-2, Mode::Plain).unwrap();
        assert!(g1.values.iter().all(|v| *v == 0.0));
        assert_eq!(stats.clamped_mass, 0.0);
        for k in 0..flow.len() {
            assert!((flow1.x[k] - flow.x[k]).abs() < 1e-15);
            assert!((flow1.jac[k] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let sc = quick_scenario(129, 1e-3, 0.5, Mode::Plain);
        let g = sc.initial_graph().unwrap();
        let flow = FlowMap::seed(&sc.initial_components().unwrap(), (g.x_lo, g.x_hi), 8);
        let err = step(&g, &flow, 10.0, Mode::Plain).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn single_step_mass_drift_small() {
        // e^dt * mass_after / mass_before - 1 stays within the O(dt^2) +
        // spatial-floor envelope; the run-level dt study pins the order.
        let sc = quick_scenario(257, 1e-3, 0.5, Mode::Plain);
        let g = sc.initial_graph().unwrap();
        let flow = FlowMap::seed(&sc.initial_components().unwrap(), (g.x_lo, g.x_hi), 8);
        for &dt in &[4e-2, 2e-2, 1e-2] {
            let (g1, _, _) = step(&g, &flow, dt, Mode::Plain).unwrap();
            let drift = (dt.exp() * g1.l1() / g.l1() - 1.0).abs();
            assert!(drift < 1e-5, "dt={dt}: drift {drift}");
        }
    }

    #[test]
    fn max_principle_per_step() {
        let sc = quick_scenario(257, 2e-3, 0.5, Mode::Plain);
        let g = sc.initial_graph().unwrap();
        let flow = FlowMap::seed(&sc.initial_components().unwrap(), (g.x_lo, g.x_hi), 8);
        for mode in [Mode::Plain, Mode::Rescaled] {
            let (g1, _, stats) = step(&g, &flow, 2e-3, mode).unwrap();
            assert!(g1.linf() <= g.linf() * (1.0 + 1e-12));
            assert!(stats.min_pre_clamp > -1e-12);
        }
    }

    #[test]
    fn short_run_keeps_invariants_and_mass() {
        let sc = quick_scenario(193, 2e-3, 0.4, Mode::Plain);
        let rec = run(&sc).unwrap();
        for inv in &rec.invariants {
            assert!(inv.pass, "{}: {:.3e} > {:.3e}", inv.name, inv.max_violation, inv.tolerance);
        }
        let drift = rec.monitors.scaled_mass_drift.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(drift < 1e-3, "mass drift {drift}");
    }

    #[test]
    fn rescaled_and_plain_agree_over_short_horizon() {
        let sc_p = quick_scenario(193, 1e-3, 0.3, Mode::Plain);
        let sc_r = quick_scenario(193, 1e-3, 0.3, Mode::Rescaled);
        let rp = run(&sc_p).unwrap();
        let rr = run(&sc_r).unwrap();
        let gp = &rp.snapshots.last().unwrap().graph;
        let gr = &rr.snapshots.last().unwrap().graph;
        let gap = gp
            .values
            .iter()
            .zip(&gr.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 1e-5, "mode gap {gap}");
    }

    #[test]
    fn flow_inverse_round_trip() {
        let sc = quick_scenario(193, 2e-3, 0.5, Mode::Plain);
        let rec = run(&sc).unwrap();
        let flow = &rec.snapshots.last().unwrap().flow;
        // identity at t=0
        let f0 = &rec.snapshots[0].flow;
        assert!((flow_inverse(f0, 0.3).unwrap() - 0.3).abs() < 1e-12);
        for &k in &[3usize, 20, 40] {
            let x0 = flow.x0[k];
            let x = flow.x[k];
            let back = flow_inverse(flow, x).unwrap();
            assert!((back - x0).abs() < 1e-6, "tracker {k}: {back} vs {x0}");
        }
    }

    #[test]
    fn representation_along_characteristics() {
        // f(t, ψ(t,x0)) = f0(x0) e^{log_gain - t} along trackers
        let sc = quick_scenario(257, 1e-3, 1.0, Mode::Rescaled);
        let rec = run(&sc).unwrap();
        let last = rec.snapshots.last().unwrap();
        let f0 = &rec.snapshots[0].graph;
        let mut checked = 0;
        for k in 0..last.flow.len() {
            let x0 = last.flow.x0[k];
            let v0 = f0.interpolate(x0);
            if v0 > 1e-3 && last.flow.gain_valid[k] {
                let lhs = last.graph.interpolate(last.flow.x[k]);
                let rhs = v0 * (last.flow.log_gain[k] - last.time).exp();
                assert!((lhs - rhs).abs() < 1e-3 * v0, "tracker {k}: {lhs} vs {rhs}");
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn eps_step_full_truncation_freezes_decay_only() {
        // eps = hull width: both velocities vanish, plain mode freezes f
        let sc = quick_scenario(129, 2e-3, 0.5, Mode::Plain);
        let g = sc.initial_graph().unwrap();
        let flow = FlowMap::seed(&sc.initial_components().unwrap(), (g.x_lo, g.x_hi), 8);
        let (g1, flow1, _) = step_eps(&g, &flow, 2e-3, Mode::Plain, g.width()).unwrap();
        let gap = g1.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(gap == 0.0, "f must be frozen, gap {gap}");
        assert_eq!(flow1.x, flow.x);
    }

    #[test]
    fn eps_step_keeps_positivity_and_max_principle() {
        let sc = quick_scenario(193, 2e-3, 0.5, Mode::Plain);
        let g = sc.initial_graph().unwrap();
        let flow = FlowMap::seed(&sc.initial_components().unwrap(), (g.x_lo, g.x_hi), 8);
        for &eps in &[0.1, 0.025] {
            let (g1, _, stats) = step_eps(&g, &flow, 2e-3, Mode::Plain, eps).unwrap();
            assert!(stats.min_pre_clamp > -1e-12);
            assert!(g1.linf() <= g.linf() * (1.0 + 1e-12));
        }
    }
}
