//! Sampled boundary graph on a fixed uniform grid.
//!
//! The upper boundary of the symmetric patch is a nonnegative compactly
//! supported function f sampled on the convex hull of its initial support.
//! The grid never moves; all evolution rewrites the node values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function sampled on a fixed uniform grid over `[x_lo, x_hi]`.
///
/// Outside the grid the function is extended by zero. The same container is
/// used for the graph f itself (nonnegative) and for derived signed fields
/// such as its slope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledGraph {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    /// Rescaled time of the snapshot.
    pub time: f64,
    pub values: Vec<f64>,
}

impl SampledGraph {
    pub fn new(x_lo: f64, x_hi: f64, values: Vec<f64>, time: f64) -> Result<Self> {
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidArg(format!(
                "grid endpoints must be finite with x_hi > x_lo, got [{x_lo}, {x_hi}]"
            )));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArg("grid needs at least 2 nodes".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "graph values", index });
        }
        let n = values.len();
        Ok(Self { x_lo, x_hi, n, time, values })
    }

    pub fn from_fn(x_lo: f64, x_hi: f64, n: usize, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (x_hi - x_lo) / (n - 1) as f64;
        let values = (0..n).map(|i| f(x_lo + i as f64 * h)).collect();
        Self::new(x_lo, x_hi, values, time)
    }

    pub fn zero_like(&self) -> Self {
        Self { values: vec![0.0; self.n], ..self.clone() }
    }

    /// Grid spacing.
    #[inline]
    pub fn h(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n - 1) as f64
    }

    /// Width of the hull, which is also the half-width of the offset window
    /// used by the velocity integrals.
    #[inline]
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Node abscissa; the endpoints are returned exactly so grid/interval
    /// arithmetic agrees bitwise at the boundary.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 { self.x_hi } else { self.x_lo + i as f64 * self.h() }
    }

    /// Node value with zero extension outside the grid.
    #[inline]
    pub fn value_ext(&self, i: i64) -> f64 {
        if i < 0 || i >= self.n as i64 { 0.0 } else { self.values[i as usize] }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn linf(&self) -> f64 {
        self.max_abs()
    }

    /// Trapezoid mass; exact h * sum for compactly supported data because the
    /// boundary nodes vanish.
    pub fn l1(&self) -> f64 {
        let h = self.h();
        let inner: f64 = self.values[1..self.n - 1].iter().sum();
        h * (inner + 0.5 * (self.values[0] + self.values[self.n - 1]))
    }

    /// Monotone piecewise-cubic interpolation (Fritsch-Carlson limited),
    /// clamped below at 0 and extended by zero outside the grid.
    ///
    /// Reproduces node values exactly and never exceeds the local node range,
    /// so it cannot create new maxima or negative values from nonnegative data.
    pub fn interpolate(&self, x: f64) -> f64 {
        self.interpolate_signed(x).max(0.0)
    }

    /// Same interpolant without the lower clamp, for signed fields.
    pub fn interpolate_signed(&self, x: f64) -> f64 {
        assert!(x.is_finite(), "interpolation point must be finite");
        if x <= self.x_lo || x >= self.x_hi {
            // Zero extension; the endpoints themselves carry node values.
            if x == self.x_lo {
                return self.values[0];
            }
            if x == self.x_hi {
                return self.values[self.n - 1];
            }
            return 0.0;
        }
        let h = self.h();
        let k = (((x - self.x_lo) / h) as usize).min(self.n - 2);
        let t = (x - self.x(k)) / h;
        let (d0, d1) = (self.node_derivative(k), self.node_derivative(k + 1));
        hermite(self.values[k], self.values[k + 1], d0 * h, d1 * h, t)
    }

    /// Fritsch-Carlson limited derivative at node `i` (slope units).
    fn node_derivative(&self, i: usize) -> f64 {
        let h = self.h();
        let s = |k: usize| (self.values[k + 1] - self.values[k]) / h;
        if i == 0 {
            return s(0);
        }
        if i == self.n - 1 {
            return s(self.n - 2);
        }
        let (sm, sp) = (s(i - 1), s(i));
        if sm * sp <= 0.0 {
            return 0.0;
        }
        let d = 0.5 * (sm + sp);
        let cap = 3.0 * sm.abs().min(sp.abs());
        d.signum() * d.abs().min(cap)
    }

    /// Fourth-order finite-difference slope on the same grid.
    ///
    /// Centered five-point stencil in the interior, one-sided five-point
    /// stencils at the first and last two nodes.
    pub fn slope(&self) -> Result<SampledGraph> {
        if self.n < 5 {
            return Err(Error::InvalidArg("slope needs at least 5 nodes".into()));
        }
        let n = self.n;
        let h = self.h();
        let v = &self.values;
        let mut d = vec![0.0; n];
        d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
        d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
        for i in 2..n - 2 {
            d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        }
        d[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]) / (12.0 * h);
        d[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]) / (12.0 * h);
        SampledGraph::new(self.x_lo, self.x_hi, d, self.time)
    }
}

#[inline]
fn hermite(v0: f64, v1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    // Cubic Hermite basis on [0, 1] with scaled derivatives m = d * h.
    let t2 = t * t;
    let t3 = t2 * t;
    v0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * (t3 - 2.0 * t2 + t)
        + v1 * (-2.0 * t3 + 3.0 * t2)
        + m1 * (t3 - t2)
}

/// Monotone cubic interpolation through arbitrary strictly monotone abscissae.
///
/// Used for inverting the characteristic flow from tracker pairs.
pub fn monotone_interp(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidArg("interpolation needs at least 2 points".into()));
    }
    if x < xs[0] || x > xs[n - 1] {
        return Err(Error::OutOfRange(x));
    }
    let k = match xs.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
        Ok(i) => return Ok(ys[i]),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let hk = xs[k + 1] - xs[k];
    let s = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    let deriv = |j: usize| -> f64 {
        if j == 0 {
            s(0)
        } else if j == n - 1 {
            s(n - 2)
        } else {
            let (sm, sp) = (s(j - 1), s(j));
            if sm * sp <= 0.0 {
                0.0
            } else {
                let d = 0.5 * (sm + sp);
                d.signum() * d.abs().min(3.0 * sm.abs().min(sp.abs()))
            }
        }
    };
    let t = (x - xs[k]) / hk;
    Ok(hermite(ys[k], ys[k + 1], deriv(k) * hk, deriv(k + 1) * hk, t))
}
