//! Independent ground truth: direct planar field quadrature over the patch,
//! the exact ellipse-axes dynamics, and the semicircle limit law.
//!
//! Nothing here shares code with the graph velocity module; agreement between
//! the two is the primary cross-validation of the velocity laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SampledGraph;

/// Planar attraction field of the symmetric patch {(x, y): |y| <= f(x)} at an
/// arbitrary point, v = -(1/2π) ∬ (X-Y)/|X-Y|² dA.
///
/// The inner vertical integral is done analytically per column (arctan and
/// log antiderivatives), which removes the kernel singularity from the
/// numerical part; columns are midpoints of a uniform grid anchored at the
/// evaluation abscissa, so the singular column never coincides with a sample
/// and the odd part cancels by symmetry. When the point sits on the graph
/// itself the log kernel keeps an integrable 2 ln|a| part which is split off
/// and integrated in closed form.
///
/// Accuracy is quadrature-limited near the boundary; `columns` controls the
/// resolution.
pub fn biot_savart_patch(g: &SampledGraph, point: (f64, f64), columns: usize) -> (f64, f64) {
    let (px, py) = point;
    assert!(px.is_finite() && py.is_finite(), "evaluation point must be finite");
    let h = g.width() / columns as f64;
    // cells anchored at px, covering the hull with one spare cell per side
    let k_min = (((g.x_lo - px) / h).floor() as i64) - 1;
    let k_max = (((g.x_hi - px) / h).ceil() as i64) + 1;

    // horizontal component: zero-extension makes out-of-hull cells exact zeros
    let mut v1 = 0.0;
    for k in k_min..=k_max {
        let y1 = px + (k as f64 + 0.5) * h;
        let a = px - y1;
        let f = g.interpolate(y1);
        if f == 0.0 && py == 0.0 {
            continue;
        }
        v1 += ((f - py) / a).atan() + ((f + py) / a).atan();
    }
    v1 *= -h / (2.0 * std::f64::consts::PI);

    // vertical component
    let abs_py = py.abs();
    let near_curve = abs_py > 0.0 && (abs_py - g.interpolate(px)).abs() <= 4.0 * h * (1.0 + 2.0 * g.linf() / g.width());
    let mut v2 = 0.0;
    if !near_curve {
        for k in k_min..=k_max {
            let y1 = px + (k as f64 + 0.5) * h;
            let a = px - y1;
            let f = g.interpolate(y1);
            if f == 0.0 {
                continue;
            }
            let num = a * a + (py - f) * (py - f);
            let den = a * a + (py + f) * (py + f);
            v2 += (num / den).ln();
        }
        v2 *= h / (4.0 * std::f64::consts::PI);
    } else {
        // On-curve point: ln(a² + (py-f)²) = 2 ln|a| + ln(1 + ((py-f)/a)²).
        // Restrict to cells with midpoint inside the hull and integrate the
        // 2 ln|a| part exactly over their span.
        assert!(px > g.x_lo && px < g.x_hi, "on-curve evaluation needs an interior abscissa");
        let mut w_lo = f64::INFINITY;
        let mut w_hi = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for k in k_min..=k_max {
            let y1 = px + (k as f64 + 0.5) * h;
            if y1 < g.x_lo || y1 > g.x_hi {
                continue;
            }
            w_lo = w_lo.min(px + k as f64 * h);
            w_hi = w_hi.max(px + (k as f64 + 1.0) * h);
            let a = px - y1;
            let f = g.interpolate(y1);
            let q = (py.abs() - f) / a;
            let den = a * a + (py.abs() + f) * (py.abs() + f);
            acc += (1.0 + q * q).ln() - den.ln();
        }
        let l = px - w_lo;
        let r = w_hi - px;
        let log_part = 2.0 * (l * (l.ln() - 1.0) + r * (r.ln() - 1.0));
        v2 = (log_part + acc * h) / (4.0 * std::f64::consts::PI);
        if py < 0.0 {
            v2 = -v2;
        }
    }
    (v1, v2)
}

/// Semi-axes of the exactly solvable ellipse patch x²/a² + y²/b² <= 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EllipseState {
    pub a: f64,
    pub b: f64,
    pub time: f64,
}

impl EllipseState {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= b && b > 0.0) {
            return Err(Error::InvalidArg(format!("ellipse needs a >= b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b, time: 0.0 })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.a * self.b
    }

    /// Sample the upper boundary as a graph on [-a, a].
    pub fn boundary_graph(&self, n: usize) -> SampledGraph {
        let (a, b) = (self.a, self.b);
        SampledGraph::from_fn(-a, a, n, self.time, move |x| {
            let u: f64 = 1.0 - (x / a) * (x / a);
            if u > 0.0 { b * u.sqrt() } else { 0.0 }
        })
        .unwrap()
    }
}

/// Attraction field inside the uniform ellipse patch: the linear field
/// (-b x₁, -a x₂)/(a+b), with divergence exactly -1.
///
/// The coefficients are a derived closed form: validate them against
/// `biot_savart_patch` (see `validate_ellipse_field`) before relying on them.
pub fn ellipse_interior_field(e: &EllipseState, point: (f64, f64)) -> Result<(f64, f64)> {
    let (x, y) = point;
    if (x / e.a) * (x / e.a) + (y / e.b) * (y / e.b) >= 1.0 {
        return Err(Error::OutOfRange(x));
    }
    Ok((-e.b * x / (e.a + e.b), -e.a * y / (e.a + e.b)))
}

/// Compares the linear interior field with the direct patch quadrature on a
/// boundary-resolved ellipse; returns the maximum absolute error over a
/// fixed set of strictly interior points.
pub fn validate_ellipse_field(e: &EllipseState, graph_n: usize, columns: usize, points: usize) -> Result<f64> {
    let g = e.boundary_graph(graph_n);
    let mut worst = 0.0f64;
    for k in 0..points {
        let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.31) / points as f64;
        let r = 0.25 + 0.5 * (k as f64 / points as f64);
        let p = (r * e.a * angle.cos(), r * e.b * angle.sin());
        let exact = ellipse_interior_field(e, p)?;
        let quad = biot_savart_patch(&g, p, columns);
        worst = worst.max((exact.0 - quad.0).abs()).max((exact.1 - quad.1).abs());
    }
    Ok(worst)
}

/// One classical four-stage step of the axes dynamics
/// da/dτ = db/dτ = -ab/(a+b).
///
/// Both axes receive bitwise-identical increments, so a - b is conserved
/// exactly; the area contracts by e^{-dt} to O(dt⁵) per step.
pub fn ellipse_ode_step(e: &EllipseState, dt: f64) -> Result<EllipseState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArg(format!("dt must be positive, got {dt}")));
    }
    let rate = |a: f64, b: f64| -a * b / (a + b);
    let k1 = rate(e.a, e.b);
    let k2 = rate(e.a + 0.5 * dt * k1, e.b + 0.5 * dt * k1);
    let k3 = rate(e.a + 0.5 * dt * k2, e.b + 0.5 * dt * k2);
    let k4 = rate(e.a + dt * k3, e.b + dt * k3);
    let incr = dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    let next = EllipseState { a: e.a + incr, b: e.b + incr, time: e.time + dt };
    if next.b < 1e-12 * e.a.max(1.0) {
        return Err(Error::Aborted {
            time: next.time,
            reason: "minor axis collapsed below resolution".into(),
        });
    }
    Ok(next)
}

/// Semicircle density 2 sqrt(x0² - x²) / (π x0²) on [-x0, x0].
pub fn semicircle_density(x0: f64, x: f64) -> f64 {
    assert!(x0 > 0.0, "semicircle radius must be positive");
    let u = x0 * x0 - x * x;
    if u <= 0.0 { 0.0 } else { 2.0 * u.sqrt() / (std::f64::consts::PI * x0 * x0) }
}

/// x-marginal of the unit-mass normalized ellipse patch measure,
/// 2 sqrt(1 - x²/a²) / (π a); tends to the semicircle of radius a - b.
pub fn ellipse_marginal(e: &EllipseState, x: f64) -> f64 {
    let u = 1.0 - (x / e.a) * (x / e.a);
    if x.abs() >= e.a || u <= 0.0 {
        0.0
    } else {
        2.0 * u.sqrt() / (std::f64::consts::PI * e.a)
    }
}

/// Indices of `count` nodes spread over the region where the graph exceeds
/// `floor_frac` of its maximum; used to place cross-validation points.
pub fn interior_sample_nodes(g: &SampledGraph, count: usize, floor_frac: f64) -> Vec<usize> {
    let fmax = g.linf();
    let candidates: Vec<usize> = (0..g.n).filter(|&i| g.values[i] > floor_frac * fmax).collect();
    if candidates.is_empty() || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![candidates[candidates.len() / 2]];
    }
    let mut out: Vec<usize> = (0..count)
        .map(|k| candidates[k * (candidates.len() - 1) / (count - 1)])
        .collect();
    out.dedup();
    out
}

/// Certified lower bound for the width of the symmetric section:
/// d0 - 2 ∫ |v(τ)|_inf dτ, trapezoid in time.
pub fn endpoint_gap_monitor(times: &[f64], sup_v: &[f64], d0: f64) -> f64 {
    assert_eq!(times.len(), sup_v.len());
    let mut integral = 0.0;
    for k in 1..times.len() {
        integral += 0.5 * (sup_v[k] + sup_v[k - 1]) * (times[k] - times[k - 1]);
    }
    d0 - 2.0 * integral
}
