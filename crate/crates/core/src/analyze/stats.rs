//! Estimators used on tail windows.

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population coefficient of variation `std / |mean|`.
pub fn coefficient_of_variation(x: &[f64]) -> f64 {
    let m = mean(x);
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64;
    var.sqrt() / m.abs()
}

/// Least-squares line `y = a + b x`, returning `(a, b)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples(x.len()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Domain {
            function: "least_squares",
            reason: "abscissae are all equal".into(),
        });
    }
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Exponent `p` of a power law `y ~ x^p` fitted in log-log coordinates.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain {
            function: "power_law_exponent",
            reason: "log-log fit needs positive data".into(),
        });
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(least_squares(&lx, &ly)?.1)
}

/// First index of the final `fraction` of `len` samples.
pub fn tail_start(len: usize, fraction: f64) -> usize {
    let keep = ((len as f64) * fraction).ceil() as usize;
    len - keep.clamp(2.min(len), len)
}

/// Interval index `k` and weight `w` with `x = start + (k + w) step`, for a
/// grid of `len` points; `None` outside the grid.
pub fn locate_uniform(len: usize, start: f64, step: f64, x: f64) -> Option<(usize, f64)> {
    if len < 2 {
        return None;
    }
    let pos = (x - start) / step;
    if !(pos >= -1e-9 && pos <= (len - 1) as f64 + 1e-9) {
        return None;
    }
    let k = (pos.floor().max(0.0) as usize).min(len - 2);
    Some((k, pos - k as f64))
}

/// Linear interpolation of a series sampled at `start + k * step`.
pub fn interpolate_uniform(values: &[f64], start: f64, step: f64, x: f64) -> Option<f64> {
    let (k, w) = locate_uniform(values.len(), start, step, x)?;
    Some(values[k] + w * (values[k + 1] - values[k]))
}
