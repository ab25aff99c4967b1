//! Signal helpers used to read periods and wavelengths off sampled data.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Centred moving average with half-width `half`; the window shrinks at the
/// ends.
pub fn moving_average(y: &[f64], half: usize) -> Vec<f64> {
    let n = y.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in y {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Upward crossings of the sample mean, located by linear interpolation.
pub fn mean_crossings(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = mean(y);
    let mut out = Vec::new();
    for i in 1..y.len() {
        let (a, b) = (y[i - 1] - m, y[i] - m);
        if a < 0.0 && b >= 0.0 {
            let f = a / (a - b);
            out.push(x[i - 1] + f * (x[i] - x[i - 1]));
        }
    }
    out
}

/// Period from the spacing of upward mean crossings.
pub fn crossing_period(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Precondition("abscissa and samples differ in length".into()));
    }
    let c = mean_crossings(x, y);
    if c.len() < 2 {
        return Err(Error::Degenerate(format!("only {} mean crossings found", c.len())));
    }
    Ok((c[c.len() - 1] - c[0]) / (c.len() - 1) as f64)
}

/// Residual of the best fit `a cos(kx) + b sin(kx) + c`.
fn cosine_residual(x: &[f64], y: &[f64], k: f64) -> f64 {
    // Normal equations for the three basis functions.
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let b = [(k * xi).cos(), (k * xi).sin(), 1.0];
        for p in 0..3 {
            r[p] += b[p] * yi;
            for q in 0..3 {
                m[p][q] += b[p] * b[q];
            }
        }
    }
    let coef = match solve3(m, r) {
        Some(c) => c,
        None => return f64::INFINITY,
    };
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let f = coef[0] * (k * xi).cos() + coef[1] * (k * xi).sin() + coef[2];
            (yi - f) * (yi - f)
        })
        .sum()
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            r[row] -= f * r[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = r[row];
        for c in row + 1..3 {
            s -= m[row][c] * out[c];
        }
        out[row] = s / m[row][row];
    }
    Some(out)
}

/// Angular frequency of the least-squares cosine fit, searched over
/// `[k_lo, k_hi]` by a coarse scan followed by golden-section refinement.
pub fn fit_cosine_frequency(x: &[f64], y: &[f64], k_lo: f64, k_hi: f64) -> Result<f64> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::Precondition("need at least 4 matching samples".into()));
    }
    if !(k_lo > 0.0 && k_hi > k_lo) {
        return Err(Error::param("k_range", "need 0 < k_lo < k_hi"));
    }
    let scan = 400;
    let step = (k_hi - k_lo) / scan as f64;
    let best = (0..=scan)
        .map(|i| k_lo + i as f64 * step)
        .map(|k| (k, cosine_residual(x, y, k)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .unwrap();
    let (mut a, mut b) = ((best - step).max(k_lo), (best + step).min(k_hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (cosine_residual(x, y, c), cosine_residual(x, y, d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = cosine_residual(x, y, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = cosine_residual(x, y, d);
        }
    }
    Ok((a + b) / 2.0)
}

/// Wavelength of the dominant cosine in `[lambda_lo, lambda_hi]`.
pub fn fit_wavelength(x: &[f64], y: &[f64], lambda_lo: f64, lambda_hi: f64) -> Result<f64> {
    let k = fit_cosine_frequency(x, y, 2.0 * PI / lambda_hi, 2.0 * PI / lambda_lo)?;
    Ok(2.0 * PI / k)
}
