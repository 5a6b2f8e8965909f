//! Long-time extraction: scattering profile, limit flow, limit support,
//! collapse rate, and the weak-limit checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{FlowMap, Mode, TrajectoryRecord};
use crate::fit::exp_rate;
use crate::graph::SampledGraph;

/// Fitted decay rates of the run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Rates {
    pub profile_gap: Option<f64>,
    pub flow_increment: Option<f64>,
    pub hausdorff: Option<f64>,
}

/// Per-tracker reconstruction of the profile exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GSample {
    pub x0: f64,
    pub x_inf: f64,
    /// log(Phi(x_inf) / f0(x0)) from the extracted profile.
    pub g_algebraic: f64,
    /// time integral of the damping remainder along the characteristic.
    pub g_dynamic: f64,
    pub masked: bool,
}

/// Estimated long-time limit of the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitProfile {
    /// e^t f(t_last) on the grid; the unnormalized profile.
    pub phi: SampledGraph,
    pub psi_inf: FlowMap,
    pub k_inf: Vec<(f64, f64)>,
    pub g_exponent: Vec<GSample>,
    /// sup gap between the last two profile iterates.
    pub cauchy_gap: f64,
    /// successive gap ratios over the late snapshot pairs.
    pub gap_ratios: Vec<f64>,
    pub rates: Rates,
}

fn scaled_values(g: &SampledGraph) -> Vec<f64> {
    let a = g.time.exp();
    g.values.iter().map(|v| a * v).collect()
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max)
}

/// Extracts the scattering profile as the final rescaled snapshot and
/// quantifies the truncation by the Cauchy gaps of the late iterates.
///
/// Requires a rescaled-mode run to t_end >= 6 with at least 3 snapshots
/// after t = 2. Non-decreasing late gaps flag non-convergence.
pub fn scattering_profile(rec: &TrajectoryRecord) -> Result<LimitProfile> {
    if rec.mode != Mode::Rescaled {
        return Err(Error::InvalidArg("profile extraction needs a rescaled-mode run".into()));
    }
    if rec.t_end < 6.0 {
        return Err(Error::InvalidArg(format!("profile extraction needs t_end >= 6, got {}", rec.t_end)));
    }
    let late: Vec<&crate::evolve::Snapshot> = rec.snapshots.iter().filter(|s| s.time >= 2.0).collect();
    if late.len() < 3 {
        return Err(Error::InvalidArg("profile extraction needs at least 3 late snapshots".into()));
    }

    let mut gaps: Vec<(f64, f64)> = Vec::new();
    for w in late.windows(2) {
        let g = sup_gap(&scaled_values(&w[0].graph), &scaled_values(&w[1].graph));
        gaps.push((0.5 * (w[0].time + w[1].time), g));
    }
    let gap_ratios: Vec<f64> = gaps.windows(2).map(|w| w[1].1 / w[0].1.max(1e-300)).collect();
    let mean_ratio = gap_ratios.iter().sum::<f64>() / gap_ratios.len().max(1) as f64;
    if mean_ratio >= 1.0 {
        return Err(Error::Aborted {
            time: rec.t_end,
            reason: format!("profile iterates do not contract (mean gap ratio {mean_ratio:.3}); outside the small-data regime"),
        });
    }
    let ts: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    let vs: Vec<f64> = gaps.iter().map(|g| g.1).collect();
    let rate = exp_rate(&ts, &vs);

    let last = rec.snapshots.last().unwrap();
    let phi = SampledGraph {
        values: scaled_values(&last.graph),
        ..last.graph.clone()
    };
    let psi_inf = last.flow.clone();
    let k_inf = limit_support(&psi_inf, &rec.initial_components)?;
    let g_exponent = reconstruct_g(rec, &phi, &psi_inf)?;

    Ok(LimitProfile {
        phi,
        psi_inf,
        k_inf,
        g_exponent,
        cauchy_gap: gaps.last().unwrap().1,
        gap_ratios,
        rates: Rates { profile_gap: rate, flow_increment: None, hausdorff: None },
    })
}

/// Limit flow diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowLimit {
    pub psi_inf: FlowMap,
    /// fitted decay rate of the tracker increments, target -1/2.
    pub increment_rate: Option<f64>,
    pub jac_min: f64,
    pub jac_max: f64,
    pub monotone: bool,
    /// set when the fitted rate is slower than e^{-0.3 t}.
    pub slow_convergence: bool,
}

/// Takes the final flow snapshot as the limit map and fits the decay rate of
/// the tracker increments between snapshots.
pub fn limit_flow(rec: &TrajectoryRecord) -> Result<FlowLimit> {
    if rec.snapshots.len() < 3 {
        return Err(Error::InvalidArg("limit flow needs at least 3 snapshots".into()));
    }
    let mut ts = Vec::new();
    let mut deltas = Vec::new();
    for w in rec.snapshots.windows(2) {
        let d = w[0]
            .flow
            .x
            .iter()
            .zip(&w[1].flow.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        ts.push(0.5 * (w[0].time + w[1].time));
        deltas.push(d);
    }
    let increment_rate = exp_rate(&ts, &deltas);
    let psi_inf = rec.snapshots.last().unwrap().flow.clone();
    let jac_min = rec.monitors.jac_min.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let jac_max = rec.monitors.jac_max.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let monotone = psi_inf.x.windows(2).all(|w| w[1] > w[0]);
    let slow_convergence = increment_rate.map(|r| r > -0.3).unwrap_or(true);
    Ok(FlowLimit { psi_inf, increment_rate, jac_min, jac_max, monotone, slow_convergence })
}

/// Images of the initial support components under the limit flow.
///
/// Components must stay disjoint and keep at least half their length;
/// a merge flags the run as outside the small-data regime.
pub fn limit_support(psi_inf: &FlowMap, initial: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &(a, b) in initial {
        let ia = psi_inf
            .tracker_at(a)
            .ok_or_else(|| Error::InvalidArg(format!("no tracker seeded at component endpoint {a}")))?;
        let ib = psi_inf
            .tracker_at(b)
            .ok_or_else(|| Error::InvalidArg(format!("no tracker seeded at component endpoint {b}")))?;
        out.push((psi_inf.x[ia], psi_inf.x[ib]));
    }
    for w in out.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::Aborted {
                time: f64::NAN,
                reason: "limit support components merged; outside the small-data regime".into(),
            });
        }
    }
    Ok(out)
}

/// Set distance between the patch at each snapshot and the limit segments:
/// the larger of the amplitude sup and the endpoint displacement, per
/// component. Exact for graph regions over their limit segments.
pub fn hausdorff_series(rec: &TrajectoryRecord, k_inf: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if k_inf.len() != rec.initial_components.len() {
        return Err(Error::InvalidArg("component count mismatch".into()));
    }
    let mut series = Vec::new();
    for snap in &rec.snapshots {
        let mut d = 0.0f64;
        for (ci, &(a0, b0)) in rec.initial_components.iter().enumerate() {
            let ia = snap.flow.tracker_at(a0).ok_or_else(|| Error::InvalidArg("missing endpoint tracker".into()))?;
            let ib = snap.flow.tracker_at(b0).ok_or_else(|| Error::InvalidArg("missing endpoint tracker".into()))?;
            let (at, bt) = (snap.flow.x[ia], snap.flow.x[ib]);
            let amp = snap
                .graph
                .values
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let x = snap.graph.x(*i);
                    x >= at - snap.graph.h() && x <= bt + snap.graph.h()
                })
                .map(|(_, v)| *v)
                .fold(0.0f64, f64::max);
            let disp = (at - k_inf[ci].0).abs().max((bt - k_inf[ci].1).abs());
            d = d.max(amp.max(disp));
        }
        series.push((snap.time, d));
    }
    Ok(series)
}

/// Least-squares decay rate of the set distance over the fit window
/// t in [1, t_end - 2] (the tail is biased because the limit comes from the
/// final snapshot itself).
pub fn hausdorff_decay(rec: &TrajectoryRecord, k_inf: &[(f64, f64)]) -> Result<(f64, Vec<(f64, f64)>)> {
    let series = hausdorff_series(rec, k_inf)?;
    if series.iter().filter(|(t, _)| *t >= 1.0).count() < 5 {
        return Err(Error::InvalidArg("collapse fit needs at least 5 snapshots past t = 1".into()));
    }
    let window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, d)| *t >= 1.0 && *t <= rec.t_end - 2.0 && *d > 0.0)
        .collect();
    if window.len() < 3 {
        return Err(Error::InvalidArg("Hausdorff fit needs at least 3 usable snapshots".into()));
    }
    let ts: Vec<f64> = window.iter().map(|p| p.0).collect();
    let ds: Vec<f64> = window.iter().map(|p| p.1).collect();
    let rate = exp_rate(&ts, &ds).ok_or_else(|| Error::InvalidArg("degenerate Hausdorff series".into()))?;
    Ok((rate, series))
}

/// Test functions for the weak-limit comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFn {
    One,
    X,
    XSquared,
    GaussX { center: f64, sigma: f64 },
    Y,
    YSquared,
}

impl TestFn {
    pub fn name(&self) -> String {
        match self {
            TestFn::One => "1".into(),
            TestFn::X => "x".into(),
            TestFn::XSquared => "x^2".into(),
            TestFn::GaussX { center, sigma } => format!("gauss({center},{sigma})"),
            TestFn::Y => "y".into(),
            TestFn::YSquared => "y^2".into(),
        }
    }

    /// Exact vertical integral over the column |y| <= f at abscissa x.
    fn column_integral(&self, x: f64, f: f64) -> f64 {
        match self {
            TestFn::One => 2.0 * f,
            TestFn::X => 2.0 * f * x,
            TestFn::XSquared => 2.0 * f * x * x,
            TestFn::GaussX { center, sigma } => {
                let u = (x - center) / sigma;
                2.0 * f * (-0.5 * u * u).exp()
            }
            TestFn::Y => 0.0,
            TestFn::YSquared => 2.0 * f * f * f / 3.0,
        }
    }

    fn on_axis(&self, x: f64) -> f64 {
        match self {
            TestFn::One => 1.0,
            TestFn::X => x,
            TestFn::XSquared => x * x,
            TestFn::GaussX { center, sigma } => {
                let u = (x - center) / sigma;
                (-0.5 * u * u).exp()
            }
            TestFn::Y | TestFn::YSquared => 0.0,
        }
    }
}

pub fn default_test_fns() -> Vec<TestFn> {
    vec![
        TestFn::One,
        TestFn::X,
        TestFn::XSquared,
        TestFn::GaussX { center: 0.0, sigma: 0.4 },
        TestFn::Y,
        TestFn::YSquared,
    ]
}

/// One row of the weak-limit table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakTestRow {
    pub test_fn: String,
    pub limit_value: f64,
    /// (t, I_t, gap to the limit)
    pub series: Vec<(f64, f64, f64)>,
    pub fitted_gap_decay: Option<f64>,
}

fn grid_integral(g: &SampledGraph, f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = g.h();
    let mut acc = 0.0;
    for i in 0..g.n {
        let w = if i == 0 || i == g.n - 1 { 0.5 * h } else { h };
        acc += w * f(g.x(i), g.values[i]);
    }
    acc
}

/// Compares e^t ∬ φ dA over the patch against the limit 2 ∫ Φ(x) φ(x,0) dx
/// for each test function.
pub fn weak_convergence_test(rec: &TrajectoryRecord, profile: &LimitProfile, fns: &[TestFn]) -> Vec<WeakTestRow> {
    fns.iter()
        .map(|tf| {
            let limit_value = 2.0 * grid_integral(&profile.phi, |x, phi| phi * tf.on_axis(x));
            let series: Vec<(f64, f64, f64)> = rec
                .snapshots
                .iter()
                .map(|s| {
                    let i_t = s.time.exp() * grid_integral(&s.graph, |x, f| tf.column_integral(x, f));
                    (s.time, i_t, (i_t - limit_value).abs())
                })
                .collect();
            let ts: Vec<f64> = series.iter().map(|r| r.0).collect();
            let gs: Vec<f64> = series.iter().map(|r| r.2).collect();
            WeakTestRow { test_fn: tf.name(), limit_value, series, fitted_gap_decay: exp_rate(&ts, &gs) }
        })
        .collect()
}

/// Dual reconstruction of the profile exponent at each tracker: algebraic
/// inversion of the profile against f0, versus the damping integral carried
/// by the flow. Trackers near component edges or where the graph falls below
/// 1e-3 of its peak are masked — there the relative interpolation error of
/// the profile overwhelms the logarithm.
pub fn reconstruct_g(rec: &TrajectoryRecord, phi: &SampledGraph, psi_inf: &FlowMap) -> Result<Vec<GSample>> {
    let f0 = &rec.snapshots.first().unwrap().graph;
    let edge_margin = 2.0 * f0.h();
    let floor = 1e-3 * rec.initial_linf;
    let mut out = Vec::new();
    for k in 0..psi_inf.len() {
        let x0 = psi_inf.x0[k];
        let x_inf = psi_inf.x[k];
        let v0 = f0.interpolate(x0);
        let near_edge = rec
            .initial_components
            .iter()
            .any(|&(a, b)| (x0 - a).abs() < edge_margin || (x0 - b).abs() < edge_margin);
        let inside = rec.initial_components.iter().any(|&(a, b)| x0 > a && x0 < b);
        let masked = !inside || near_edge || v0 <= floor.max(rec.support_threshold) || !psi_inf.gain_valid[k];
        let g_algebraic = if masked { 0.0 } else { (phi.interpolate(x_inf) / v0).ln() };
        let g_dynamic = if masked { 0.0 } else { psi_inf.log_gain[k] };
        out.push(GSample { x0, x_inf, g_algebraic, g_dynamic, masked });
    }
    Ok(out)
}

/// Largest disagreement between the two exponent reconstructions over the
/// unmasked trackers.
pub fn g_reconstruction_gap(samples: &[GSample]) -> f64 {
    samples
        .iter()
        .filter(|s| !s.masked)
        .map(|s| (s.g_algebraic - s.g_dynamic).abs())
        .fold(0.0f64, f64::max)
}
