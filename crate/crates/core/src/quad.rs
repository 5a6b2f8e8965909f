//! Quadrature helpers for the offset integrals.
//!
//! All singular integrals are evaluated after pairing the +y and -y samples,
//! which realizes principal values by exact cancellation of the odd part.
//! The remaining smooth integrands use composite Simpson weights on the
//! grid-aligned offsets; an odd cell count falls back to a 3/8 tail.

/// Composite Simpson weights for `cells` uniform cells of width `h`
/// (`cells + 1` samples). Odd cell counts close with a Simpson 3/8 tail.
pub fn simpson_weights(cells: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; cells + 1];
    match cells {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let paired = if cells % 2 == 0 { cells } else { cells - 3 };
            let mut k = 0;
            while k + 2 <= paired {
                w[k] += h / 3.0;
                w[k + 1] += 4.0 * h / 3.0;
                w[k + 2] += h / 3.0;
                k += 2;
            }
            if cells % 2 != 0 {
                let b = cells - 3;
                w[b] += 3.0 * h / 8.0;
                w[b + 1] += 9.0 * h / 8.0;
                w[b + 2] += 9.0 * h / 8.0;
                w[b + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Exact integral of ln(y^2 + (a + b y)^2) over [0, h], a >= 0.
///
/// Closed form of the near-origin cell of the log kernel; stays finite for
/// all a >= 0 including a = 0.
pub fn integral_log_quadratic(a: f64, b: f64, h: f64) -> f64 {
    debug_assert!(a >= 0.0 && h > 0.0);
    let big_a = 1.0 + b * b;
    if a == 0.0 {
        // ln((1+b^2) y^2)
        return h * big_a.ln() + 2.0 * h * (h.ln() - 1.0);
    }
    let delta = a * b / big_a;
    let gamma = a / big_a;
    let lambda = |u: f64| -> f64 {
        if u == 0.0 && gamma == 0.0 {
            return 0.0;
        }
        u * (u * u + gamma * gamma).ln() - 2.0 * u + 2.0 * gamma * (u / gamma).atan()
    };
    h * big_a.ln() + lambda(h + delta) - lambda(delta)
}
