//! Shape-preserving and natural cubic interpolation.
//!
//! `pchip` is the Fritsch-Carlson piecewise cubic Hermite scheme with
//! harmonic-mean slopes: it never overshoots the data on monotone segments.
//! `cubic_spline` is a natural cubic spline (zero second derivative at the
//! ends), which is smoother but rings around sudden level changes.

use crate::{Error, Result};

fn validate_knots(xs: &[f64], ys: &[f64], min_knots: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "{} knots vs {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < min_knots {
        return Err(Error::InvalidInput(format!(
            "need at least {min_knots} knots, got {}",
            xs.len()
        )));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("knots must be strictly increasing".into()));
    }
    Ok(())
}

fn segment_of(xs: &[f64], q: f64) -> Result<usize> {
    let n = xs.len();
    if q < xs[0] || q > xs[n - 1] {
        return Err(Error::OutOfRange(format!(
            "query {q} outside [{}, {}]",
            xs[0],
            xs[n - 1]
        )));
    }
    // Rightmost segment whose left knot is <= q, clamped so q == xs[n-1]
    // evaluates on the final segment.
    let i = xs.partition_point(|&x| x <= q);
    Ok(i.saturating_sub(1).min(n - 2))
}

/// Fritsch-Carlson slopes with harmonic-mean interior weights.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = ys
        .windows(2)
        .zip(&h)
        .map(|(w, h)| (w[1] - w[0]) / h)
        .collect();

    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }

    let endpoint = |h0: f64, h1: f64, del0: f64, del1: f64| -> f64 {
        let mut slope = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if slope.signum() != del0.signum() || del0 == 0.0 {
            slope = 0.0;
        } else if del0.signum() != del1.signum() && slope.abs() > 3.0 * del0.abs() {
            slope = 3.0 * del0;
        }
        slope
    };
    d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);

    for i in 1..n - 1 {
        let (prev, next) = (delta[i - 1], delta[i]);
        if prev == 0.0 || next == 0.0 || prev.signum() != next.signum() {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / prev + w2 / next);
        }
    }
    d
}

/// Piecewise cubic Hermite interpolation (shape preserving).
pub fn pchip(xs: &[f64], ys: &[f64], query_xs: &[f64]) -> Result<Vec<f64>> {
    validate_knots(xs, ys, 2)?;
    let d = pchip_slopes(xs, ys);
    query_xs
        .iter()
        .map(|&q| {
            let i = segment_of(xs, q)?;
            let h = xs[i + 1] - xs[i];
            let t = (q - xs[i]) / h;
            let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
            let h10 = t * (1.0 - t) * (1.0 - t);
            let h01 = t * t * (3.0 - 2.0 * t);
            let h11 = t * t * (t - 1.0);
            Ok(h00 * ys[i] + h10 * h * d[i] + h01 * ys[i + 1] + h11 * h * d[i + 1])
        })
        .collect()
}

/// Natural cubic spline interpolation (zero curvature at both ends).
pub fn cubic_spline(xs: &[f64], ys: &[f64], query_xs: &[f64]) -> Result<Vec<f64>> {
    validate_knots(xs, ys, 3)?;
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

    // Thomas algorithm for the interior second derivatives, m[0] = m[n-1] = 0.
    let mut m = vec![0.0; n];
    if n > 2 {
        let dim = n - 2;
        let mut diag = vec![0.0; dim];
        let mut rhs = vec![0.0; dim];
        let mut upper = vec![0.0; dim];
        for i in 0..dim {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            upper[i] = h[i + 1];
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        for i in 1..dim {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[dim] = rhs[dim - 1] / diag[dim - 1];
        for i in (0..dim - 1).rev() {
            m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
        }
    }

    query_xs
        .iter()
        .map(|&q| {
            let i = segment_of(xs, q)?;
            let t = q - xs[i];
            let hi = h[i];
            let b = (ys[i + 1] - ys[i]) / hi - hi * (2.0 * m[i] + m[i + 1]) / 6.0;
            let c = m[i] / 2.0;
            let d = (m[i + 1] - m[i]) / (6.0 * hi);
            Ok(ys[i] + t * (b + t * (c + t * d)))
        })
        .collect()
}
