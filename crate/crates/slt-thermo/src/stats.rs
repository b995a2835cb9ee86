//! Moment, entropy and finite-difference estimators used by every other
//! module. All functions are pure; errors cover the degenerate inputs named
//! in their contracts.

use crate::error::{Error, Result};
use crate::math;
use serde::{Deserialize, Serialize};

/// A labelled sequence of finite reals (posterior draws of one observable,
/// an entropy curve over a grid, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    label: String,
}

impl Series {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_value("series", "must not be empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid_value("series", format!("non-finite value {v}")));
        }
        Ok(Series {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Unbiased sample variance, Σ(x - x̄)² / (S - 1).
pub fn sample_variance(x: &Series) -> Result<f64> {
    variance_slice(x.values())
}

/// Slice-level variant used by downstream consumers working on raw draws.
pub fn variance_slice(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: x.len() });
    }
    let m = math::mean(x);
    let ss = math::kahan_sum(x.iter().map(|v| (v - m) * (v - m)));
    Ok(ss / (x.len() - 1) as f64)
}

/// Unbiased cross moment, Σ(x - x̄)(y - ȳ) / (S - 1).
pub fn sample_covariance(x: &Series, y: &Series) -> Result<f64> {
    covariance_slice(x.values(), y.values())
}

pub fn covariance_slice(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: x.len() });
    }
    let mx = math::mean(x);
    let my = math::mean(y);
    let s = math::kahan_sum(x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)));
    Ok(s / (x.len() - 1) as f64)
}

/// Plug-in Shannon entropy (nats) of empirical occupancy counts, with the
/// convention 0·log 0 = 0. Bounded by log K.
pub fn discrete_entropy(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDistribution);
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.ln();
        }
    }
    Ok(h.max(0.0))
}

/// Equal-width histogram over the sample range. Returns counts plus the left
/// edge and bin width so callers can reproduce the exact binning.
pub fn histogram(x: &[f64], bins: usize) -> Result<(Vec<u64>, f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: x.len() });
    }
    if bins < 2 {
        return Err(Error::invalid_value("bins", "need at least 2 bins"));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateSupport);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in x {
        let mut k = ((v - lo) / width) as usize;
        if k >= bins {
            k = bins - 1; // right edge lands in the last bin
        }
        counts[k] += 1;
    }
    Ok((counts, lo, width))
}

/// Differential-entropy estimate (nats): plug-in entropy of the binned
/// empirical distribution plus the log bin-width correction.
pub fn histogram_entropy(x: &Series, bins: usize) -> Result<f64> {
    histogram_entropy_slice(x.values(), bins)
}

pub(crate) fn histogram_entropy_slice(x: &[f64], bins: usize) -> Result<f64> {
    let (counts, _lo, width) = histogram(x, bins)?;
    Ok(discrete_entropy(&counts)? + width.ln())
}

/// Histogram entropy with the default bin count.
pub fn histogram_entropy_auto(x: &[f64]) -> Result<f64> {
    histogram_entropy_slice(x, default_bins(x))
}

/// Default bin count: max(16, Freedman-Diaconis estimate). Falls back to 16
/// when the IQR degenerates.
pub fn default_bins(x: &[f64]) -> usize {
    let iqr = math::interquartile_range(x);
    if iqr <= 0.0 {
        return 16;
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = 2.0 * iqr / (x.len() as f64).cbrt();
    let fd = ((hi - lo) / width).ceil() as usize;
    fd.clamp(16, 512)
}

/// Pearson correlation coefficient; requires positive variance on both sides.
pub fn pearson_correlation(x: &Series, y: &Series) -> Result<f64> {
    pearson_slice(x.values(), y.values())
}

pub(crate) fn pearson_slice(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientSamples { need: 3, got: x.len() });
    }
    let vx = variance_slice(x)?;
    let vy = variance_slice(y)?;
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::DegenerateInput("zero variance in correlation input"));
    }
    let c = covariance_slice(x, y)?;
    Ok((c / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Derivative of `f` with respect to log(grid): central differences at
/// interior points, one-sided first order at the endpoints. Output length
/// equals input length so short scan grids keep their transition peaks.
pub fn log_grid_derivative(grid: &Series, f: &Series) -> Result<Series> {
    let g = grid.values();
    let y = f.values();
    if g.len() != y.len() {
        return Err(Error::ShapeMismatch { left: g.len(), right: y.len() });
    }
    if g.len() < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: g.len() });
    }
    if g.windows(2).any(|w| w[1] <= w[0]) || g[0] <= 0.0 {
        return Err(Error::InvalidGrid);
    }
    let lg: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let m = g.len();
    let mut out = Vec::with_capacity(m);
    out.push((y[1] - y[0]) / (lg[1] - lg[0]));
    for i in 1..m - 1 {
        out.push((y[i + 1] - y[i - 1]) / (lg[i + 1] - lg[i - 1]));
    }
    out.push((y[m - 1] - y[m - 2]) / (lg[m - 1] - lg[m - 2]));
    Series::new(format!("d{}_dlog_{}", f.label(), grid.label()), out)
}
