//! Least-squares rate fitting for monitor time series.

/// Ordinary least squares line through (x, y); returns (slope, intercept).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fitted exponential rate of a positive series v(t) ~ C e^{rate t}.
///
/// Returns None if fewer than two samples are strictly positive.
pub fn exp_rate(ts: &[f64], vs: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = ts
        .iter()
        .zip(vs)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}
