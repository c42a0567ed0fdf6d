//! Closed-form statistics of the inner suppression round.
//!
//! Writing `u = ε_data + ε_GKP` and `v = ε_data − ε_GKP`, the data residual is
//! `v/2 + m√π` where `m` indexes the lattice cell containing `u`. The residual
//! is therefore a mixture of `N(m√π, σ²/2)` components with weights
//! `P_m = ½[erf((m+½)√π/σ) − erf((m−½)√π/σ)]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phase_space::SQRT_PI;
use crate::special::{erf, erfc, q_function as q_tail};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Stop once the first omitted `|m|` term falls below this.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { tolerance: 1e-17, max_terms: 10_000 }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be finite and > 0, got {sigma}")))
    }
}

/// Probability that `ε_data + ε_GKP` falls in cell `m` (symmetric in `m`).
fn cell_weight(m: usize, sigma: f64) -> f64 {
    if m == 0 {
        erf(0.5 * SQRT_PI / sigma)
    } else {
        // both arguments positive: use erfc differences to avoid cancellation
        let lo = (m as f64 - 0.5) * SQRT_PI / sigma;
        let hi = (m as f64 + 0.5) * SQRT_PI / sigma;
        0.5 * (erfc(lo) - erfc(hi))
    }
}

/// Default truncation `M = ⌈3 + 6σ/√π⌉`.
fn default_cutoff(sigma: f64) -> usize {
    (3.0 + 6.0 * sigma / SQRT_PI).ceil() as usize
}

/// Smallest `M ≥ default` whose first omitted term is below tolerance.
fn truncation<F: Fn(usize) -> f64>(sigma: f64, ctrl: &SeriesControl, term: F) -> Result<usize> {
    if !(ctrl.tolerance > 0.0) {
        return Err(invalid("series tolerance must be > 0"));
    }
    let mut m = default_cutoff(sigma).min(ctrl.max_terms);
    loop {
        let next = term(m + 1);
        if next.abs() < ctrl.tolerance {
            return Ok(m);
        }
        if m >= ctrl.max_terms {
            return Err(Error::SeriesNotConverged { max_terms: ctrl.max_terms, last_term: next });
        }
        m += 1;
    }
}

/// Density of the data-quadrature residual after one suppression round.
pub fn residual_pdf(xi: f64, sigma: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_sigma(sigma)?;
    if !xi.is_finite() {
        return Err(invalid("xi must be finite"));
    }
    let norm = 1.0 / (SQRT_PI * sigma);
    let term = |m: i64| {
        let center = m as f64 * SQRT_PI;
        norm * (-(center - xi).powi(2) / (sigma * sigma)).exp() * cell_weight(m.unsigned_abs() as usize, sigma)
    };
    // weights bound every term, so truncating on them is conservative
    let cutoff = truncation(sigma, ctrl, |m| norm * cell_weight(m, sigma))? as i64;
    let mut total = term(0);
    for m in 1..=cutoff {
        total += term(m) + term(-m);
    }
    Ok(total.max(0.0))
}

/// Variance of the data-quadrature residual, `Σ_m P_m (m²π + σ²/2)`.
pub fn residual_variance(sigma: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_sigma(sigma)?;
    let half_var = 0.5 * sigma * sigma;
    let term = |m: usize| {
        let mf = m as f64;
        (mf * mf * std::f64::consts::PI + half_var) * cell_weight(m, sigma)
    };
    let cutoff = truncation(sigma, ctrl, |m| 2.0 * term(m))?;
    // accumulate small terms first
    let mut total = 0.0;
    for m in (1..=cutoff).rev() {
        total += 2.0 * term(m);
    }
    Ok(total + term(0))
}

/// `σ²/2 + e^{-2r}/8`: the residual variance under finite squeezing without
/// the lattice-crossing correction.
pub fn finite_squeezing_residual_variance(sigma: f64, r: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if !(r > 0.0) || r.is_nan() {
        return Err(invalid(format!("squeezing parameter r must be > 0, got {r}")));
    }
    Ok(0.5 * sigma * sigma + 0.125 * (-2.0 * r).exp())
}

/// Squeezing above which the suppressed variance beats the raw variance
/// `σ²`: `r > −ln(2σ)`.
pub fn suppression_gain_threshold(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(-(2.0 * sigma).ln())
}

/// `erfc(√π / (2√2 σ))`, the two-sided probability that an `N(0, σ²)`
/// displacement exceeds `√π/2` in magnitude.
pub fn lattice_crossing_probability(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(erfc(SQRT_PI / (2.0 * std::f64::consts::SQRT_2 * sigma)))
}

pub fn q_function(x: f64) -> f64 {
    q_tail(x)
}
