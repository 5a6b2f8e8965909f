//! Velocity laws of the boundary graph.
//!
//! The horizontal and vertical velocities on the curve are offset integrals
//! of the graph,
//!
//!   u1(x) = (1/2π) ∫ [ atan(Δ⁻f/y) + atan(Δ⁺f/y) ] dy,
//!   u2(x) = (1/4π) ∫ ln[ (y² + (Δ⁻f)²) / (y² + (Δ⁺f)²) ] dy,
//!
//! with Δ±f(x) = f(x+y) ± f(x), together with their x-derivatives and the
//! source terms F, G that drive the slope. Every integral is restricted to
//! the offset window [-M, M], M = hull width: once x+y leaves the support
//! the arctan pair cancels and the log ratio is 1, so the truncation is
//! exact for x inside the hull.
//!
//! Numerics: offsets are grid-aligned (y = j·h), +y and -y samples are paired
//! before summation (exact odd-part cancellation, which realizes the
//! principal values), removable limits at y = 0 get their analytic values,
//! and the log kernel splits off its 2·ln|y| part, integrated in closed form.
//! Summation order is fixed, so results are bitwise reproducible and
//! node-parallel evaluation is safe.

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::SampledGraph;
use crate::quad::{integral_log_quadratic, simpson_weights};

/// Relative threshold below which a node counts as off-support for
/// guarded divisions (R = -u2/f - 1 and the G-kernel center value).
const GUARD_REL: f64 = 1e-12;

/// All per-node fields derived from one snapshot.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub du1: Vec<f64>,
    pub du2: Vec<f64>,
    pub src_f: Vec<f64>,
    pub src_g: Vec<f64>,
    /// Damping remainder R with u2 = -f(1+R) on the guarded support.
    pub damping: Vec<f64>,
}

/// The subset of fields needed by one transport step.
#[derive(Debug, Clone)]
pub struct CoreFields {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub du1: Vec<f64>,
}

struct NodeEnv<'a> {
    f: &'a [f64],
    fp: &'a [f64],
    fpp: &'a [f64],
    n: i64,
    h: f64,
    guard: f64,
}

impl NodeEnv<'_> {
    #[inline]
    fn fv(&self, i: i64) -> f64 {
        if i < 0 || i >= self.n { 0.0 } else { self.f[i as usize] }
    }
    #[inline]
    fn fpv(&self, i: i64) -> f64 {
        if i < 0 || i >= self.n { 0.0 } else { self.fp[i as usize] }
    }
}

/// Paired arctan sample of the u1 integrand at offset j >= 1.
#[inline]
fn u1_pair(env: &NodeEnv, i: i64, j: i64) -> f64 {
    let y = j as f64 * env.h;
    let fi = env.fv(i);
    let fr = env.fv(i + j);
    let fl = env.fv(i - j);
    ((fr - fi) / y).atan() + ((fr + fi) / y).atan() - ((fl - fi) / y).atan() - ((fl + fi) / y).atan()
}

/// Paired limit of the u1 integrand at y = 0.
#[inline]
fn u1_center(env: &NodeEnv, i: i64) -> f64 {
    let a = 2.0 * env.fpv(i).atan();
    if env.fv(i) > env.guard { a } else { 2.0 * a }
}

fn eval_u1(env: &NodeEnv, i: i64, w: &[f64]) -> f64 {
    let mut acc = w[0] * u1_center(env, i);
    for j in 1..env.n {
        acc += w[j as usize] * u1_pair(env, i, j);
    }
    acc / (2.0 * std::f64::consts::PI)
}

/// Paired divided log kernel of the linearized graph,
/// ln(1 + ((a+by)/y)²) + ln(1 + ((a-by)/y)²).
#[inline]
fn log_model(a: f64, b: f64, y: f64) -> f64 {
    let qr = (a + b * y) / y;
    let ql = (a - b * y) / y;
    ((1.0 + qr * qr) * (1.0 + ql * ql)).ln()
}

/// Exact integral of `log_model` over [0, m].
#[inline]
fn log_model_integral(a: f64, b: f64, m: f64) -> f64 {
    integral_log_quadratic(a, b, m) + integral_log_quadratic(a, -b, m) - 4.0 * (m * m.ln() - m)
}

/// u2 at a node. The log ratio is evaluated in the divided form
/// ln[(1 + (Δ⁻f/y)²)/(1 + (Δ⁺f/y)²)]: both factors scale with the graph, so
/// the quadrature error stays relative to the decaying field instead of
/// accumulating an absolute floor (the rescaled dynamics amplifies any
/// absolute u2 bias by e^t). The numerator factor is smooth through y = 0.
/// The denominator factor concentrates on a peak of width ~2f that the grid
/// cannot resolve once f falls near h, so the linearized kernel with
/// a = 2f(x), b = f'(x) is integrated in closed form over the whole window
/// and only the smooth residual is sampled.
fn eval_u2(env: &NodeEnv, i: i64, w_full: &[f64]) -> f64 {
    let fi = env.fv(i);
    if fi <= 0.0 {
        // the log ratio is identically 1 off the graph
        return 0.0;
    }
    let h = env.h;
    let m = (env.n - 1) as f64 * h;
    let fpi = env.fpv(i);
    let a = 2.0 * fi;
    let mut minus = w_full[0] * 2.0 * (1.0 + fpi * fpi).ln();
    let mut resid = 0.0; // residual vanishes at y = 0
    for j in 1..env.n {
        let y = j as f64 * h;
        let fr = env.fv(i + j);
        let fl = env.fv(i - j);
        let qmr = (fr - fi) / y;
        let qml = (fl - fi) / y;
        minus += w_full[j as usize] * ((1.0 + qmr * qmr) * (1.0 + qml * qml)).ln();
        let qpr = (fr + fi) / y;
        let qpl = (fl + fi) / y;
        let plus = ((1.0 + qpr * qpr) * (1.0 + qpl * qpl)).ln();
        resid += w_full[j as usize] * (plus - log_model(a, fpi, y));
    }
    let plus_total = log_model_integral(a, fpi, m) + resid;
    (minus - plus_total) / (4.0 * std::f64::consts::PI)
}

struct DerivSamples {
    /// paired Δ⁻ slope kernel (first term of the u1 derivative)
    a: f64,
    /// paired Δ⁺ slope kernel (second term of the u1 derivative)
    b: f64,
    /// paired Δ⁻ mixed kernel (first term of the u2 derivative)
    c: f64,
    /// paired Δ⁺ mixed kernel (second term of the u2 derivative)
    d: f64,
}

#[inline]
fn deriv_pair(env: &NodeEnv, i: i64, j: i64) -> DerivSamples {
    let y = j as f64 * env.h;
    let fi = env.fv(i);
    let fpi = env.fpv(i);
    let (fr, fl) = (env.fv(i + j), env.fv(i - j));
    let (fpr, fpl) = (env.fpv(i + j), env.fpv(i - j));
    let (dmr, dml) = (fr - fi, fl - fi);
    let (dpr, dpl) = (fr + fi, fl + fi);
    let inv_mr = 1.0 / (y * y + dmr * dmr);
    let inv_ml = 1.0 / (y * y + dml * dml);
    let inv_pr = 1.0 / (y * y + dpr * dpr);
    let inv_pl = 1.0 / (y * y + dpl * dpl);
    let (emr, eml) = (fpr - fpi, fpl - fpi);
    let (epr, epl) = (fpr + fpi, fpl + fpi);
    DerivSamples {
        a: y * (emr * inv_mr - eml * inv_ml),
        b: y * (epr * inv_pr - epl * inv_pl),
        c: dmr * emr * inv_mr + dml * eml * inv_ml,
        d: dpr * epr * inv_pr + dpl * epl * inv_pl,
    }
}

#[inline]
fn deriv_center(env: &NodeEnv, i: i64) -> DerivSamples {
    let fi = env.fv(i);
    let fpi = env.fpv(i);
    let fppi = env.fpp[i as usize];
    let curv = 2.0 * fppi / (1.0 + fpi * fpi);
    if fi > env.guard {
        DerivSamples { a: curv, b: 0.0, c: fpi * curv, d: 2.0 * fpi / fi }
    } else {
        DerivSamples { a: curv, b: curv, c: fpi * curv, d: 0.0 }
    }
}

fn eval_derivs(env: &NodeEnv, i: i64, w: &[f64]) -> (f64, f64, f64, f64) {
    let fpi = env.fpv(i);
    let s0 = deriv_center(env, i);
    let mut acc_a = w[0] * s0.a;
    let mut acc_b = w[0] * s0.b;
    let mut acc_c = w[0] * s0.c;
    let mut acc_d = w[0] * s0.d;
    for j in 1..env.n {
        let s = deriv_pair(env, i, j);
        let wj = w[j as usize];
        acc_a += wj * s.a;
        acc_b += wj * s.b;
        acc_c += wj * s.c;
        acc_d += wj * s.d;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let du1 = (acc_a + acc_b) / two_pi;
    let du2 = (acc_c - acc_d) / two_pi;
    // F and G reuse the same kernel samples:
    //   F-integrand = c - f'(x) a,  G-integrand = d + f'(x) b
    let src_f = acc_c - fpi * acc_a;
    let src_g = acc_d + fpi * acc_b;
    (du1, du2, src_f, src_g)
}

fn prepare<'a>(g: &'a SampledGraph, fp: &'a SampledGraph, fpp: &'a SampledGraph) -> NodeEnv<'a> {
    NodeEnv {
        f: &g.values,
        fp: &fp.values,
        fpp: &fpp.values,
        n: g.n as i64,
        h: g.h(),
        guard: GUARD_REL * g.linf().max(f64::MIN_POSITIVE),
    }
}

/// Transport fields (u1, u2, ∂x u1) at every node.
pub fn core_fields(g: &SampledGraph) -> Result<CoreFields> {
    let fp = g.slope()?;
    let fpp = fp.slope()?;
    let env = prepare(g, &fp, &fpp);
    let w_full = simpson_weights(g.n - 1, g.h());
    let rows: Vec<(f64, f64, f64)> = (0..g.n as i64)
        .into_par_iter()
        .map(|i| {
            let u1 = eval_u1(&env, i, &w_full);
            let u2 = eval_u2(&env, i, &w_full);
            let s0 = deriv_center(&env, i);
            let mut acc_a = w_full[0] * s0.a;
            let mut acc_b = w_full[0] * s0.b;
            for j in 1..env.n {
                let s = deriv_pair(&env, i, j);
                acc_a += w_full[j as usize] * s.a;
                acc_b += w_full[j as usize] * s.b;
            }
            (u1, u2, (acc_a + acc_b) / (2.0 * std::f64::consts::PI))
        })
        .collect();
    Ok(CoreFields {
        u1: rows.iter().map(|r| r.0).collect(),
        u2: rows.iter().map(|r| r.1).collect(),
        du1: rows.iter().map(|r| r.2).collect(),
    })
}

/// Every field at every node: velocities, their x-derivatives, the sources
/// F and G, and the damping remainder.
pub fn velocity_field(g: &SampledGraph) -> Result<VelocityField> {
    let fp = g.slope()?;
    let fpp = fp.slope()?;
    let env = prepare(g, &fp, &fpp);
    let w_full = simpson_weights(g.n - 1, g.h());
    let rows: Vec<(f64, f64, f64, f64, f64, f64)> = (0..g.n as i64)
        .into_par_iter()
        .map(|i| {
            let u1 = eval_u1(&env, i, &w_full);
            let u2 = eval_u2(&env, i, &w_full);
            let (du1, du2, sf, sg) = eval_derivs(&env, i, &w_full);
            (u1, u2, du1, du2, sf, sg)
        })
        .collect();
    let u2: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let damping = damping_r(g, &u2);
    Ok(VelocityField {
        u1: rows.iter().map(|r| r.0).collect(),
        u2,
        du1: rows.iter().map(|r| r.2).collect(),
        du2: rows.iter().map(|r| r.3).collect(),
        src_f: rows.iter().map(|r| r.4).collect(),
        src_g: rows.iter().map(|r| r.5).collect(),
        damping,
    })
}

/// Damping remainder R with u2 = -f (1 + R) on the guarded support, 0 elsewhere.
pub fn damping_r(g: &SampledGraph, u2: &[f64]) -> Vec<f64> {
    let guard = GUARD_REL * g.linf().max(f64::MIN_POSITIVE);
    g.values
        .iter()
        .zip(u2)
        .map(|(&f, &v)| if f > guard { -v / f - 1.0 } else { 0.0 })
        .collect()
}

/// Truncated fields with the window |y| >= eps removed, per the regularized
/// model. eps is snapped to the nearest positive multiple of the grid
/// spacing; eps >= M empties the window and both fields vanish.
pub fn core_fields_eps(g: &SampledGraph, eps: f64) -> Result<CoreFields> {
    if !(eps > 0.0) {
        return Err(crate::error::Error::InvalidArg(format!("eps must be positive, got {eps}")));
    }
    let fp = g.slope()?;
    let fpp = fp.slope()?;
    let env = prepare(g, &fp, &fpp);
    let h = g.h();
    let n = g.n;
    let j0 = ((eps / h).round() as i64).max(1);
    if j0 >= n as i64 {
        return Ok(CoreFields { u1: vec![0.0; n], u2: vec![0.0; n], du1: vec![0.0; n] });
    }
    let cells = n - 1 - j0 as usize;
    let w = simpson_weights(cells, h);
    let rows: Vec<(f64, f64, f64)> = (0..n as i64)
        .into_par_iter()
        .map(|i| {
            let fi = env.fv(i);
            let mut acc1 = 0.0;
            let mut acc2 = 0.0;
            let mut acc_a = 0.0;
            let mut acc_b = 0.0;
            for j in j0..n as i64 {
                let wj = w[(j - j0) as usize];
                acc1 += wj * u1_pair(&env, i, j);
                let y = j as f64 * h;
                let (fr, fl) = (env.fv(i + j), env.fv(i - j));
                let (dmr, dml) = (fr - fi, fl - fi);
                let (dpr, dpl) = (fr + fi, fl + fi);
                let num = (y * y + dmr * dmr) * (y * y + dml * dml);
                let den = (y * y + dpr * dpr) * (y * y + dpl * dpl);
                acc2 += wj * (num / den).ln();
                let s = deriv_pair(&env, i, j);
                acc_a += wj * s.a;
                acc_b += wj * s.b;
            }
            let two_pi = 2.0 * std::f64::consts::PI;
            (acc1 / two_pi, acc2 / (4.0 * std::f64::consts::PI), (acc_a + acc_b) / two_pi)
        })
        .collect();
    Ok(CoreFields {
        u1: rows.iter().map(|r| r.0).collect(),
        u2: rows.iter().map(|r| r.1).collect(),
        du1: rows.iter().map(|r| r.2).collect(),
    })
}

/// Horizontal velocity at an arbitrary point of the grid domain.
///
/// Offsets stay grid-aligned relative to x; the graph is interpolated at the
/// shifted points. At a grid node this reproduces the array evaluation.
pub fn u1_at(g: &SampledGraph, x: f64) -> Result<f64> {
    assert!(x.is_finite(), "u1_at: x must be finite");
    let fp = g.slope()?;
    let h = g.h();
    let n = g.n;
    let w = simpson_weights(n - 1, h);
    let fi = g.interpolate(x);
    let fpi = fp.interpolate_signed(x);
    let guard = GUARD_REL * g.linf().max(f64::MIN_POSITIVE);
    let center = {
        let a = 2.0 * fpi.atan();
        if fi > guard { a } else { 2.0 * a }
    };
    let mut acc = w[0] * center;
    for j in 1..n {
        let y = j as f64 * h;
        let fr = g.interpolate(x + y);
        let fl = g.interpolate(x - y);
        acc += w[j]
            * (((fr - fi) / y).atan() + ((fr + fi) / y).atan()
                - ((fl - fi) / y).atan()
                - ((fl + fi) / y).atan());
    }
    Ok(acc / (2.0 * std::f64::consts::PI))
}

/// Vertical velocity at an arbitrary point of the grid domain; same divided
/// log-ratio scheme as the array evaluation.
pub fn u2_at(g: &SampledGraph, x: f64) -> Result<f64> {
    assert!(x.is_finite(), "u2_at: x must be finite");
    let fi = g.interpolate(x);
    if fi <= 0.0 {
        return Ok(0.0);
    }
    let fp = g.slope()?;
    let fpi = fp.interpolate_signed(x);
    let h = g.h();
    let n = g.n;
    let m = (n - 1) as f64 * h;
    let w_full = simpson_weights(n - 1, h);
    let a = 2.0 * fi;

    let mut minus = w_full[0] * 2.0 * (1.0 + fpi * fpi).ln();
    let mut resid = 0.0;
    for j in 1..n {
        let y = j as f64 * h;
        let fr = g.interpolate(x + y);
        let fl = g.interpolate(x - y);
        let qmr = (fr - fi) / y;
        let qml = (fl - fi) / y;
        minus += w_full[j] * ((1.0 + qmr * qmr) * (1.0 + qml * qml)).ln();
        let qpr = (fr + fi) / y;
        let qpl = (fl + fi) / y;
        let plus = ((1.0 + qpr * qpr) * (1.0 + qpl * qpl)).ln();
        resid += w_full[j] * (plus - log_model(a, fpi, y));
    }
    let plus_total = log_model_integral(a, fpi, m) + resid;
    Ok((minus - plus_total) / (4.0 * std::f64::consts::PI))
}

/// Decomposition of the G source into its exact linear part, the smoothing
/// remainder L, and the nonlinear rest N = G - 2π f' - L.
#[derive(Debug, Clone)]
pub struct GDecomposition {
    pub linear: Vec<f64>,
    pub l_part: Vec<f64>,
    pub n_part: Vec<f64>,
}

/// Splits G(x) = 2π f'(x) + L(x) + N(x) with
/// L(x) = 2 ∫ [f'(x + f(x) z) - f'(x)] / (z² + 4) dz,
/// evaluated through the substitution z = 2 tan θ which makes the kernel
/// integral a plain average over θ in (-π/2, π/2).
pub fn decompose_g(g: &SampledGraph, vf: &VelocityField) -> Result<GDecomposition> {
    let fp = g.slope()?;
    let n = g.n;
    let two_pi = 2.0 * std::f64::consts::PI;
    let n_theta = 512usize;
    let dtheta = std::f64::consts::PI / n_theta as f64;
    let w = simpson_weights(n_theta, dtheta);
    let guard = GUARD_REL * g.linf().max(f64::MIN_POSITIVE);

    let l_part: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let fi = g.values[i];
            if fi <= guard {
                return 0.0;
            }
            let x = g.x(i);
            let fpi = fp.values[i];
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let theta = -0.5 * std::f64::consts::PI + k as f64 * dtheta;
                let shifted = if k == 0 || k == n_theta {
                    0.0 // tan(±π/2): the argument leaves every compact set
                } else {
                    fp.interpolate_signed(x + 2.0 * fi * theta.tan())
                };
                acc += wk * (shifted - fpi);
            }
            acc
        })
        .collect();

    let linear: Vec<f64> = fp.values.iter().map(|d| two_pi * d).collect();
    let n_part: Vec<f64> = (0..n).map(|i| vf.src_g[i] - linear[i] - l_part[i]).collect();
    Ok(GDecomposition { linear, l_part, n_part })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_graph(n: usize, amp: f64) -> SampledGraph {
        SampledGraph::from_fn(-1.2, 1.2, n, 0.0, |x| {
            let u: f64 = 1.0 - x * x;
            if u > 0.0 { amp * u.powi(3) } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn zero_graph_all_fields_vanish() {
        let g = SampledGraph::from_fn(-1.0, 1.0, 65, 0.0, |_| 0.0).unwrap();
        let vf = velocity_field(&g).unwrap();
        for arr in [&vf.u1, &vf.u2, &vf.du1, &vf.du2, &vf.src_f, &vf.src_g, &vf.damping] {
            assert!(arr.iter().all(|v| v.abs() < 1e-14));
        }
        assert_eq!(u1_at(&g, 0.3).unwrap(), 0.0);
        assert_eq!(u2_at(&g, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn parity_even_bump() {
        // f even about 0: u1 odd, u2 even, to rounding
        let g = bump_graph(201, 0.1);
        let vf = velocity_field(&g).unwrap();
        let n = g.n;
        let scale = vf.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            assert!((vf.u1[i] + vf.u1[n - 1 - i]).abs() < 1e-10 * scale.max(1e-30));
            assert!((vf.u2[i] - vf.u2[n - 1 - i]).abs() < 1e-10);
        }
        // u1 vanishes at the symmetry point
        assert!(vf.u1[n / 2].abs() < 1e-12);
    }

    #[test]
    fn u2_strictly_negative_on_support() {
        let g = bump_graph(201, 0.1);
        let vf = velocity_field(&g).unwrap();
        for i in 0..g.n {
            assert!(vf.u2[i] <= 1e-12, "u2 must be nonpositive up to rounding, got {}", vf.u2[i]);
            if g.values[i] > 1e-6 {
                assert!(vf.u2[i] < 0.0, "u2 must be strictly negative where f > 0");
            }
        }
    }

    #[test]
    fn point_eval_matches_arrays_at_nodes() {
        let g = bump_graph(129, 0.1);
        let vf = velocity_field(&g).unwrap();
        for &i in &[10usize, 40, 64, 90, 120] {
            let x = g.x(i);
            assert!((u1_at(&g, x).unwrap() - vf.u1[i]).abs() < 1e-13, "u1 node {i}");
            assert!((u2_at(&g, x).unwrap() - vf.u2[i]).abs() < 1e-13, "u2 node {i}");
        }
    }

    #[test]
    fn ham_identity_residual_is_quadrature_exact() {
        // 2π(-∂x u1 f' + ∂x u2) = F - G holds sample-by-sample in the shared
        // quadrature, so the residual is pure rounding noise.
        let g = bump_graph(201, 0.1);
        let vf = velocity_field(&g).unwrap();
        let fp = g.slope().unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for i in 0..g.n {
            let lhs = two_pi * (-vf.du1[i] * fp.values[i] + vf.du2[i]);
            let rhs = vf.src_f[i] - vf.src_g[i];
            assert!((lhs - rhs).abs() < 1e-11, "node {i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn du1_consistent_with_finite_difference_of_u1() {
        let g = bump_graph(401, 0.1);
        let vf = velocity_field(&g).unwrap();
        let h = g.h();
        let mut worst = 0.0f64;
        for &i in &[100usize, 160, 200, 260, 300] {
            let x = g.x(i);
            let fd = (u1_at(&g, x + h).unwrap() - u1_at(&g, x - h).unwrap()) / (2.0 * h);
            worst = worst.max((fd - vf.du1[i]).abs());
        }
        let scale = vf.du1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 2e-3 * scale.max(1e-3), "worst {worst}, scale {scale}");
    }

    #[test]
    fn du2_consistent_with_finite_difference_of_u2() {
        let g = bump_graph(401, 0.1);
        let vf = velocity_field(&g).unwrap();
        let h = g.h();
        let mut worst = 0.0f64;
        for &i in &[100usize, 160, 200, 260, 300] {
            let x = g.x(i);
            let fd = (u2_at(&g, x + h).unwrap() - u2_at(&g, x - h).unwrap()) / (2.0 * h);
            worst = worst.max((fd - vf.du2[i]).abs());
        }
        let scale = vf.du2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 2e-3 * scale.max(1e-3), "worst {worst}, scale {scale}");
    }

    #[test]
    fn du1_bound_ratio_refinement_stable() {
        // |∂x u1|_inf against |f'|_D + |f'|_inf |f'|_D: finite and stable
        // under grid refinement
        let mut ratios = Vec::new();
        for &n in &[201usize, 401] {
            let g = bump_graph(n, 0.1);
            let vf = velocity_field(&g).unwrap();
            let fp = g.slope().unwrap();
            let dini = crate::norms::dini_norm(&fp);
            let denom = dini + fp.max_abs() * dini;
            let du1_inf = vf.du1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ratios.push(du1_inf / denom);
        }
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        let factor = ratios[1] / ratios[0];
        assert!(factor > 0.5 && factor < 2.0, "{ratios:?}");
    }

    #[test]
    fn du2_vanishes_off_support_where_sources_cancel() {
        // off the support hull the two kernels coincide sample by sample, so
        // ∂x u2 vanishes and F = G exactly (neither is zero on its own there)
        let g = bump_graph(241, 0.1);
        let vf = velocity_field(&g).unwrap();
        let margin = 3.0 * g.h();
        for i in 0..g.n {
            if g.values[i] == 0.0 && g.x(i) < -1.0 - margin {
                assert!(vf.du2[i].abs() < 1e-15, "node {i}: {}", vf.du2[i]);
                assert!((vf.src_f[i] - vf.src_g[i]).abs() < 1e-15, "node {i}");
            }
        }
    }

    #[test]
    fn window_extension_leaves_velocities_unchanged() {
        // the offset window is the hull width; widening the grid (same h)
        // adds only vanishing samples, so u1 and u2 agree up to the Simpson
        // weight repartition
        let bump = |x: f64| {
            let u: f64 = 1.0 - x * x;
            if u > 0.0 { 0.1 * u.powi(3) } else { 0.0 }
        };
        let narrow = SampledGraph::from_fn(-1.0, 1.0, 321, 0.0, bump).unwrap();
        let wide = SampledGraph::from_fn(-1.3, 1.3, 417, 0.0, bump).unwrap();
        assert!((narrow.h() - wide.h()).abs() < 1e-15);
        for &x in &[0.3, -0.55, 0.0] {
            let du1 = (u1_at(&narrow, x).unwrap() - u1_at(&wide, x).unwrap()).abs();
            let du2 = (u2_at(&narrow, x).unwrap() - u2_at(&wide, x).unwrap()).abs();
            assert!(du1 < 1e-9, "u1 window dependence {du1:.3e} at {x}");
            assert!(du2 < 1e-9, "u2 window dependence {du2:.3e} at {x}");
        }
    }

    #[test]
    fn eps_full_truncation_is_zero() {
        let g = bump_graph(101, 0.1);
        let cf = core_fields_eps(&g, g.width()).unwrap();
        assert!(cf.u1.iter().all(|v| *v == 0.0));
        assert!(cf.u2.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn eps_fields_converge_to_untruncated() {
        let g = bump_graph(401, 0.1);
        let base = core_fields(&g).unwrap();
        let mut gaps = Vec::new();
        for &eps in &[0.2, 0.1, 0.05] {
            let cf = core_fields_eps(&g, eps).unwrap();
            let gap = cf
                .u1
                .iter()
                .zip(&base.u1)
                .chain(cf.u2.iter().zip(&base.u2))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            gaps.push(gap);
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 0.05, "{gaps:?}");
    }

    #[test]
    fn eps_u2_stays_nonpositive() {
        let g = bump_graph(201, 0.1);
        for &eps in &[0.3, 0.05] {
            let cf = core_fields_eps(&g, eps).unwrap();
            assert!(cf.u2.iter().all(|v| *v <= 0.0));
        }
    }

    #[test]
    fn damping_reconstructs_u2() {
        let g = bump_graph(201, 0.1);
        let vf = velocity_field(&g).unwrap();
        let guard = 1e-12 * g.linf();
        for i in 0..g.n {
            if g.values[i] > guard {
                let back = -g.values[i] * (1.0 + vf.damping[i]);
                assert!((back - vf.u2[i]).abs() < 1e-15 + 1e-12 * vf.u2[i].abs());
            } else {
                assert_eq!(vf.damping[i], 0.0);
            }
        }
    }

    #[test]
    fn damping_shrinks_with_amplitude() {
        // ||R||_inf -> 0 as the bump scales down, at least like amp^(1/2)
        let mut norms = Vec::new();
        let amps = [0.1, 0.05, 0.025];
        for &amp in &amps {
            let g = bump_graph(401, amp);
            let vf = velocity_field(&g).unwrap();
            norms.push(vf.damping.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
        let order = (norms[0] / norms[2]).ln() / 4f64.ln();
        assert!(order >= 0.5, "fitted order {order}, norms {norms:?}");
    }

    #[test]
    fn g_decomposition_zero_graph() {
        let g = SampledGraph::from_fn(-1.0, 1.0, 65, 0.0, |_| 0.0).unwrap();
        let vf = velocity_field(&g).unwrap();
        let dec = decompose_g(&g, &vf).unwrap();
        for arr in [&dec.linear, &dec.l_part, &dec.n_part] {
            assert!(arr.iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn g_decomposition_sums_and_shrinks() {
        let g = bump_graph(401, 0.05);
        let vf = velocity_field(&g).unwrap();
        let dec = decompose_g(&g, &vf).unwrap();
        // defining identity
        for i in 0..g.n {
            let sum = dec.linear[i] + dec.l_part[i] + dec.n_part[i];
            assert!((sum - vf.src_g[i]).abs() < 1e-12);
        }
        // L is controlled by the slope and shrinks against it for small data
        let fp = g.slope().unwrap();
        let l_inf = dec.l_part.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fp_inf = fp.max_abs();
        assert!(l_inf <= 2.0 * std::f64::consts::PI * fp_inf);

        let g_small = bump_graph(401, 0.005);
        let vf_small = velocity_field(&g_small).unwrap();
        let dec_small = decompose_g(&g_small, &vf_small).unwrap();
        let l_small = dec_small.l_part.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fp_small = g_small.slope().unwrap().max_abs();
        assert!(l_small / fp_small < 0.5 * l_inf / fp_inf, "L/|f'| must shrink with amplitude");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]
            #[test]
            fn u2_nonpositive_for_random_positive_graphs(
                amps in proptest::collection::vec(0.005f64..0.3, 1..3),
                centers in proptest::collection::vec(-0.5f64..0.5, 3),
                widths in proptest::collection::vec(0.1f64..0.4, 3),
            ) {
                let g = SampledGraph::from_fn(-1.2, 1.2, 97, 0.0, |x| {
                    amps.iter()
                        .zip(&centers)
                        .zip(&widths)
                        .map(|((a, c), w)| {
                            let u = (x - c) / w;
                            let s = 1.0 - u * u;
                            if s > 0.0 { a * s * s * s } else { 0.0 }
                        })
                        .sum()
                })
                .unwrap();
                let cf = core_fields(&g).unwrap();
                for (i, v) in cf.u2.iter().enumerate() {
                    prop_assert!(*v <= 1e-12, "u2[{i}] = {v}");
                }
            }
        }
    }

    #[test]
    fn source_f_ratio_refinement_stable() {
        // |F|_inf <= C |f'|_inf |f'|_D with a grid-stable empirical constant
        let mut ratios = Vec::new();
        for &n in &[201usize, 401] {
            let g = bump_graph(n, 0.1);
            let vf = velocity_field(&g).unwrap();
            let fp = g.slope().unwrap();
            let f_inf = vf.src_f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let denom = fp.max_abs() * crate::norms::dini_norm(&fp);
            ratios.push(f_inf / denom);
        }
        assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        let factor = ratios[1] / ratios[0];
        assert!(factor > 0.5 && factor < 2.0, "{ratios:?}");
    }
}
