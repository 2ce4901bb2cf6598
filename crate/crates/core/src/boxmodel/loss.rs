//! Margin loss over one positive and k negative distances.

use crate::error::{Error, Result};

use super::query::sigmoid;

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `−ln σ(γ − d⁺) − (1/k) Σ ln σ(d⁻ − γ)`.
pub fn loss(d_pos: f64, d_neg: &[f64], gamma: f64) -> Result<f64> {
    if d_neg.is_empty() {
        return Err(Error::NoNegatives);
    }
    let k = d_neg.len() as f64;
    let neg: f64 = d_neg.iter().map(|d| softplus(gamma - d)).sum();
    Ok(softplus(d_pos - gamma) + neg / k)
}

/// Derivatives of [`loss`] with respect to `d⁺` and each `d⁻`.
pub fn loss_grad(d_pos: f64, d_neg: &[f64], gamma: f64) -> (f64, Vec<f64>) {
    let k = d_neg.len() as f64;
    (
        sigmoid(d_pos - gamma),
        d_neg.iter().map(|d| -sigmoid(gamma - d) / k).collect(),
    )
}
