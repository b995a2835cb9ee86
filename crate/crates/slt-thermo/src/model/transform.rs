//! Constraining transforms with exact log-Jacobians.

use crate::math::{logit, sigmoid};

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Stick-breaking map from one logit to a two-point simplex.
/// Returns (w1, w2, log_jacobian) with log_jacobian = log σ'(t).
/// w2 is computed as σ(−t) so both weights stay strictly positive even far
/// in the tails where 1 − σ(t) would round to zero.
pub fn simplex2(t: f64) -> (f64, f64, f64) {
    let w1 = sigmoid(t);
    let w2 = sigmoid(-t);
    // log σ'(t) = log w1 + log w2 = −softplus(−t) − softplus(t)
    let lj = -softplus(-t) - softplus(t);
    (w1, w2, lj)
}

pub fn simplex2_inverse(w1: f64) -> f64 {
    logit(w1)
}
