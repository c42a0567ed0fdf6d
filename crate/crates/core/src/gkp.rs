//! One round of inner Gaussian-error suppression: a data qumode coupled to a
//! GKP ancilla through a 50:50 beam splitter, modular syndrome readout and
//! half-syndrome feedforward on both modes.
//!
//! A finitely squeezed GKP ancilla is treated as an ideal grid state carrying
//! an extra Gaussian displacement of variance `e^{-2r}/2` (the peak noise).
//! The peak noise is part of the ancilla's displacement, so it enters the
//! syndrome and the ancilla residual alike.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};
use crate::phase_space::{reduce_unchecked, NoiseParams, RngStream, SQRT_PI};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuppressionInput {
    pub eps_x_data: f64,
    pub eps_p_data: f64,
    pub eps_x_gkp: f64,
    pub eps_p_gkp: f64,
    pub gkp_peak_noise_x: f64,
    pub gkp_peak_noise_p: f64,
}

impl SuppressionInput {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("eps_x_data", self.eps_x_data)?;
        ensure_finite("eps_p_data", self.eps_p_data)?;
        ensure_finite("eps_x_gkp", self.eps_x_gkp)?;
        ensure_finite("eps_p_gkp", self.eps_p_gkp)?;
        ensure_finite("gkp_peak_noise_x", self.gkp_peak_noise_x)?;
        ensure_finite("gkp_peak_noise_p", self.gkp_peak_noise_p)
    }

    /// Pre-modulo argument of the position syndrome.
    fn x_argument(&self) -> f64 {
        self.eps_x_data + self.eps_x_gkp + self.gkp_peak_noise_x
    }

    /// Pre-modulo argument of the momentum syndrome (note the sign).
    fn p_argument(&self) -> f64 {
        -self.eps_p_data - self.eps_p_gkp - self.gkp_peak_noise_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuppressionOutcome {
    pub s_x: f64,
    pub s_p: f64,
    pub xi_x_data: f64,
    pub xi_p_data: f64,
    pub xi_x_gkp: f64,
    pub xi_p_gkp: f64,
    pub crossed_x: bool,
    pub crossed_p: bool,
}

fn outside_cell(v: f64) -> bool {
    !(-SQRT_PI..SQRT_PI).contains(&v)
}

pub fn extract_syndromes(input: &SuppressionInput) -> Result<(f64, f64)> {
    input.validate()?;
    Ok(syndromes_unchecked(input))
}

#[inline]
fn syndromes_unchecked(input: &SuppressionInput) -> (f64, f64) {
    (reduce_unchecked(input.x_argument()), reduce_unchecked(input.p_argument()))
}

/// Residual displacements after subtracting half the measured syndrome.
///
/// The momentum syndrome is read out with inverted sign, so the feedforward
/// adds `s_p / 2`; off the cell boundary this equals subtracting
/// `R(ε_p,data + ε_p,GKP) / 2`.
pub fn apply_feedforward(input: &SuppressionInput, s_x: f64, s_p: f64) -> SuppressionOutcome {
    SuppressionOutcome {
        s_x,
        s_p,
        xi_x_data: input.eps_x_data - 0.5 * s_x,
        xi_p_data: input.eps_p_data + 0.5 * s_p,
        xi_x_gkp: input.eps_x_gkp + input.gkp_peak_noise_x - 0.5 * s_x,
        xi_p_gkp: input.eps_p_gkp + input.gkp_peak_noise_p + 0.5 * s_p,
        crossed_x: outside_cell(input.x_argument()),
        crossed_p: outside_cell(input.p_argument()),
    }
}

/// Syndrome extraction followed by feedforward.
pub fn suppress(input: &SuppressionInput) -> Result<SuppressionOutcome> {
    let (s_x, s_p) = extract_syndromes(input)?;
    Ok(apply_feedforward(input, s_x, s_p))
}

#[inline]
pub(crate) fn suppress_unchecked(input: &SuppressionInput) -> SuppressionOutcome {
    let (s_x, s_p) = syndromes_unchecked(input);
    apply_feedforward(input, s_x, s_p)
}

/// Draws this round's displacements: four independent `N(0, σ²)` errors and,
/// under finite squeezing, the two GKP peak-noise terms.
pub fn sample_input(stream: &mut RngStream, params: &NoiseParams) -> SuppressionInput {
    let sigma = params.sigma;
    let eps_x_data = stream.normal_unchecked(sigma);
    let eps_p_data = stream.normal_unchecked(sigma);
    let eps_x_gkp = stream.normal_unchecked(sigma);
    let eps_p_gkp = stream.normal_unchecked(sigma);
    let peak = params.peak_std();
    let gkp_peak_noise_x = stream.normal_unchecked(peak);
    let gkp_peak_noise_p = stream.normal_unchecked(peak);
    SuppressionInput { eps_x_data, eps_p_data, eps_x_gkp, eps_p_gkp, gkp_peak_noise_x, gkp_peak_noise_p }
}

pub fn run_suppression_round(stream: &mut RngStream, params: &NoiseParams) -> Result<SuppressionOutcome> {
    // NoiseParams::new already validated sigma and r; re-check in case the
    // struct was built by hand.
    let checked = NoiseParams::new(params.sigma, params.squeezing)?;
    Ok(suppress_unchecked(&sample_input(stream, &checked)))
}
