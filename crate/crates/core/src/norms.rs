//! Discrete norms and support geometry of a sampled graph.
//!
//! The modulus of continuity is computed over grid pairs, so every quantity
//! built from it (Dini integral, Hölder quotient) is a lower bound for its
//! continuum counterpart. The Dini integral is truncated below at r = h;
//! diagnostics therefore compare ratios across grids, never absolute values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SampledGraph;

/// Norm diagnostics of one snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormReport {
    pub linf: f64,
    pub l1: f64,
    pub slope_linf: f64,
    pub dini: f64,
    pub holder_s: f64,
    pub holder_exponent: f64,
    pub support: Vec<(f64, f64)>,
}

/// Max of |g_i - g_j| over all pairs with lag <= l, for every lag.
///
/// Entry 0 is 0; the table is nondecreasing by construction.
pub fn omega_by_lag(g: &SampledGraph) -> Vec<f64> {
    let n = g.n;
    let v = &g.values;
    let mut table = vec![0.0f64; n];
    for lag in 1..n {
        let mut m = 0.0f64;
        for i in 0..n - lag {
            m = m.max((v[i + lag] - v[i]).abs());
        }
        table[lag] = table[lag - 1].max(m);
    }
    table
}

/// Modulus of continuity at radius `r`: max over grid pairs within distance r.
pub fn modulus_of_continuity(g: &SampledGraph, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArg(format!("modulus radius must be >= 0, got {r}")));
    }
    let table = omega_by_lag(g);
    Ok(omega_at(&table, g.h(), r))
}

#[inline]
fn omega_at(table: &[f64], h: f64, r: f64) -> f64 {
    let lag = ((r / h).floor() as usize).min(table.len() - 1);
    table[lag]
}

/// Discrete Dini seminorm: the exact integral of the piecewise-constant grid
/// modulus omega(r)/r over r in [h, 1].
///
/// Lower-biased estimator of the continuum seminorm (grid pairs only, lower
/// cutoff at one grid spacing).
pub fn dini_norm(g: &SampledGraph) -> f64 {
    let table = omega_by_lag(g);
    let h = g.h();
    if h >= 1.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut lag = 1usize;
    loop {
        let r_lo = lag as f64 * h;
        if r_lo >= 1.0 {
            break;
        }
        let r_hi = ((lag + 1) as f64 * h).min(1.0);
        let w = omega_at(&table, h, r_lo);
        acc += w * (r_hi / r_lo).ln();
        if lag + 1 >= table.len() {
            // beyond the widest lag omega is constant
            if r_hi < 1.0 {
                acc += table[table.len() - 1] * (1.0 / r_hi).ln();
            }
            break;
        }
        lag += 1;
    }
    acc
}

/// Discrete Hölder seminorm sup_{0<r<1} omega(r)/r^s over the grid radii.
pub fn holder_seminorm(g: &SampledGraph, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArg(format!("Hölder exponent must lie in (0,1), got {s}")));
    }
    let table = omega_by_lag(g);
    let h = g.h();
    let mut best = 0.0f64;
    let mut lag = 1usize;
    while lag < table.len() {
        let r = lag as f64 * h;
        if r >= 1.0 {
            break;
        }
        best = best.max(table[lag] / r.powf(s));
        lag += 1;
    }
    Ok(best)
}

/// Maximal intervals on which g exceeds `threshold`, sorted and disjoint.
pub fn support_components(g: &SampledGraph, threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..g.n {
        let above = g.values[i] > threshold;
        match (above, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((g.x(s), g.x(i - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((g.x(s), g.x(g.n - 1)));
    }
    out
}

/// Finite-sample probe of the pointwise slope bound for positive graphs:
/// max over supported nodes of |g'| / (|g'|_s^{1/(1+s)} g^{s/(1+s)}).
///
/// Returns 0 for a flat graph.
pub fn slope_bound_ratio(g: &SampledGraph, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArg(format!("exponent must lie in (0,1), got {s}")));
    }
    if g.values.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArg("slope_bound_ratio needs a nonnegative graph".into()));
    }
    let d = g.slope()?;
    let hol = holder_seminorm(&d, s)?;
    if hol == 0.0 || d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let threshold = 1e-10 * g.linf();
    let denom_pow = hol.powf(1.0 / (1.0 + s));
    let mut best = 0.0f64;
    for i in 0..g.n {
        if g.values[i] > threshold {
            let ratio = d.values[i].abs() / (denom_pow * g.values[i].powf(s / (1.0 + s)));
            best = best.max(ratio);
        }
    }
    Ok(best)
}

/// Full diagnostic report for one snapshot.
pub fn norm_report(g: &SampledGraph, holder_exponent: f64, support_threshold: f64) -> Result<NormReport> {
    let d = g.slope()?;
    Ok(NormReport {
        linf: g.linf(),
        l1: g.l1(),
        slope_linf: d.max_abs(),
        dini: dini_norm(&d),
        holder_s: holder_seminorm(&d, holder_exponent)?,
        holder_exponent,
        support: support_components(g, support_threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(vals: Vec<f64>) -> SampledGraph {
        let n = vals.len();
        SampledGraph::new(0.0, (n - 1) as f64 * 0.01, vals, 0.0).unwrap()
    }

    #[test]
    fn modulus_constant_graph_is_zero() {
        let g = graph(vec![2.0; 100]);
        for &r in &[0.0, 0.1, 0.5, 3.0] {
            assert_eq!(modulus_of_continuity(&g, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn modulus_rejects_negative_radius() {
        let g = graph(vec![0.0; 10]);
        assert!(modulus_of_continuity(&g, -0.1).is_err());
    }

    #[test]
    fn modulus_linear_graph() {
        // slope m = 2 on [0, 0.99]: omega(r) = m * (grid-rounded r)
        let n = 100;
        let h = 0.01;
        let g = graph((0..n).map(|i| 2.0 * i as f64 * h).collect());
        for &r in &[0.05, 0.2, 0.53] {
            let lag = (r / h).floor();
            let expect = 2.0 * lag * h;
            assert!((modulus_of_continuity(&g, r).unwrap() - expect).abs() < 1e-12);
        }
        assert_eq!(modulus_of_continuity(&g, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dini_of_linear_piece() {
        // omega(r) = m*r up to width; integral over [h,1] of m dr = m(1-h)
        // (grid omega is the floor-rounded radius, so compare loosely)
        let n = 1001;
        let g = SampledGraph::from_fn(0.0, 1.0, n, 0.0, |x| 0.7 * x).unwrap();
        let d = dini_norm(&g);
        let h = g.h();
        let expect = 0.7 * (1.0 - h);
        assert!((d - expect).abs() < 0.01 * expect, "{d} vs {expect}");
    }

    #[test]
    fn dini_of_holder_bump_matches_closed_form() {
        // g = |x|^s near 0: omega(r) = r^s, integral_h^1 r^{s-1} dr = (1-h^s)/s
        let s = 0.5;
        let g = SampledGraph::from_fn(-1.0, 1.0, 4001, 0.0, |x| x.abs().powf(s)).unwrap();
        let h = g.h();
        let expect = (1.0 - h.powf(s)) / s;
        let d = dini_norm(&g);
        assert!((d - expect).abs() < 0.1 * expect, "{d} vs {expect}");
    }

    #[test]
    fn holder_identity_graph() {
        let g = SampledGraph::from_fn(0.0, 1.0, 2001, 0.0, |x| x).unwrap();
        let s = 0.3;
        let got = holder_seminorm(&g, s).unwrap();
        // sup r^{1-s} over r<1 is 1, attained near r -> 1
        assert!((got - 1.0).abs() < 5e-3, "{got}");
    }

    #[test]
    fn holder_rejects_bad_exponent() {
        let g = graph(vec![0.0; 10]);
        assert!(holder_seminorm(&g, 0.0).is_err());
        assert!(holder_seminorm(&g, 1.0).is_err());
        assert!(slope_bound_ratio(&g, 1.3).is_err());
    }

    #[test]
    fn support_components_basic() {
        let g = graph(vec![0.0; 50]);
        assert!(support_components(&g, 0.0).is_empty());

        let mut v = vec![0.0; 50];
        for i in 5..12 {
            v[i] = 1.0;
        }
        for i in 30..40 {
            v[i] = 0.5;
        }
        let g = graph(v);
        let comps = support_components(&g, 1e-12);
        assert_eq!(comps.len(), 2);
        assert!(comps[0].1 < comps[1].0);
        // threshold above the max: empty
        assert!(support_components(&g, 2.0).is_empty());
    }

    #[test]
    fn slope_bound_zero_graph() {
        let g = graph(vec![0.0; 64]);
        assert_eq!(slope_bound_ratio(&g, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn slope_bound_ratio_stable_under_refinement() {
        let bump = |x: f64| {
            let u: f64 = 1.0 - x * x;
            if u > 0.0 { 0.1 * u.powi(3) } else { 0.0 }
        };
        let g1 = SampledGraph::from_fn(-1.2, 1.2, 301, 0.0, bump).unwrap();
        let g2 = SampledGraph::from_fn(-1.2, 1.2, 601, 0.0, bump).unwrap();
        let r1 = slope_bound_ratio(&g1, 0.5).unwrap();
        let r2 = slope_bound_ratio(&g2, 0.5).unwrap();
        assert!(r1.is_finite() && r1 > 0.0);
        assert!((r2 / r1 - 1.0).abs() < 0.1, "{r1} vs {r2}");
    }

    #[test]
    fn slope_bound_scale_invariant() {
        let bump = |x: f64| {
            let u: f64 = 1.0 - x * x;
            if u > 0.0 { 0.1 * u.powi(3) } else { 0.0 }
        };
        let g = SampledGraph::from_fn(-1.2, 1.2, 301, 0.0, bump).unwrap();
        let gl = SampledGraph::from_fn(-1.2, 1.2, 301, 0.0, |x| 7.0 * bump(x)).unwrap();
        let r = slope_bound_ratio(&g, 0.4).unwrap();
        let rl = slope_bound_ratio(&gl, 0.4).unwrap();
        assert!((rl / r - 1.0).abs() < 1e-9, "{r} vs {rl}");
    }

    proptest! {
        #[test]
        fn omega_monotone_and_lag_subadditive(vals in proptest::collection::vec(-1.0f64..1.0, 8..40)) {
            let g = graph(vals);
            let t = omega_by_lag(&g);
            for l in 1..t.len() {
                prop_assert!(t[l] >= t[l - 1]);
            }
            for l1 in 0..t.len() {
                for l2 in 0..t.len() - l1 {
                    prop_assert!(t[l1 + l2] <= t[l1] + t[l2] + 1e-12);
                }
            }
        }

        #[test]
        fn norms_absolutely_homogeneous(vals in proptest::collection::vec(0.0f64..1.0, 16..48), lambda in 0.1f64..10.0) {
            let g = graph(vals.clone());
            let gl = graph(vals.iter().map(|v| lambda * v).collect());
            let (d, dl) = (dini_norm(&g), dini_norm(&gl));
            prop_assert!((dl - lambda * d).abs() <= 1e-9 * (1.0 + dl.abs()));
            let (h, hl) = (holder_seminorm(&g, 0.5).unwrap(), holder_seminorm(&gl, 0.5).unwrap());
            prop_assert!((hl - lambda * h).abs() <= 1e-9 * (1.0 + hl.abs()));
        }

        #[test]
        fn support_components_sorted_disjoint(vals in proptest::collection::vec(0.0f64..1.0, 8..64), thr in 0.0f64..0.8) {
            let g = graph(vals);
            let comps = support_components(&g, thr);
            for w in comps.windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for c in &comps {
                prop_assert!(c.0 <= c.1);
            }
        }
    }
}
