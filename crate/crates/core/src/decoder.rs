//! Error localization and magnitude estimation for the outer code.
//!
//! The plain matched filter projects the syndrome onto each signature column.
//! The whitened filter does the same in the metric `Σ⁻¹` of the syndrome
//! covariance, which makes every statistic unit-variance under pure noise and
//! turns the magnitude estimate into the generalized least-squares fit.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::phase_space::{Quadrature, Squeezing, CODE_SIZE};
use crate::special::q_function;
use crate::steane::{qumode_index, SyndromeModel};

/// Default trigger threshold on `max_j |T_j|` for whitened decoding.
pub const DEFAULT_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub quadrature: Quadrature,
    /// 1-based qumode index.
    pub j_star: usize,
    pub d_hat: f64,
    pub t: [f64; CODE_SIZE],
    pub triggered: bool,
}

fn column_vector(model: &SyndromeModel, q: Quadrature, j: usize) -> Vector3<f64> {
    let c = model.column0(q, j);
    Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64)
}

/// Lowest index attaining the largest `|T_j|`.
fn argmax_abs(t: &[f64; CODE_SIZE]) -> usize {
    let mut best = 0;
    for j in 1..CODE_SIZE {
        if t[j].abs() > t[best].abs() {
            best = j;
        }
    }
    best
}

fn check_syndrome(s: &[f64; 3]) -> Result<()> {
    for &v in s {
        ensure_finite("syndrome", v)?;
    }
    Ok(())
}

/// Unwhitened matched filter. Always reports `triggered = true`.
pub fn matched_filter_plain(model: &SyndromeModel, q: Quadrature, s: &[f64; 3]) -> Result<DecodeResult> {
    check_syndrome(s)?;
    let sv = Vector3::from_column_slice(s);
    let mut t = [0.0; CODE_SIZE];
    let mut norms_sq = [0.0; CODE_SIZE];
    for j in 0..CODE_SIZE {
        let m = column_vector(model, q, j);
        norms_sq[j] = m.norm_squared();
        t[j] = m.dot(&sv) / norms_sq[j].sqrt();
    }
    let j = argmax_abs(&t);
    Ok(DecodeResult {
        quadrature: q,
        j_star: j + 1,
        d_hat: t[j] / norms_sq[j].sqrt(),
        t,
        triggered: true,
    })
}

/// Covariance of one quadrature's syndrome vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeCovariance {
    quadrature: Quadrature,
    sigma_res_sq: f64,
    sigma: Matrix3<f64>,
    inverse: Matrix3<f64>,
    cholesky_l: Matrix3<f64>,
}

impl SyndromeCovariance {
    /// Wraps an explicit symmetric positive-definite matrix.
    pub fn from_matrix(quadrature: Quadrature, sigma: Matrix3<f64>, sigma_res_sq: f64) -> Result<Self> {
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(invalid("covariance entries must be finite"));
        }
        if (sigma - sigma.transpose()).abs().max() > 1e-12 * sigma.abs().max() {
            return Err(invalid("covariance must be symmetric"));
        }
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::DegenerateModel("syndrome covariance is not positive-definite".into()))?;
        let inverse = chol.inverse();
        Ok(Self { quadrature, sigma_res_sq, sigma, inverse, cholesky_l: chol.l() })
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn sigma_res_sq(&self) -> f64 {
        self.sigma_res_sq
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.sigma
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    pub fn cholesky_factor(&self) -> &Matrix3<f64> {
        &self.cholesky_l
    }
}

/// `Σ = σ²_res M Mᵀ + ½e^{-2r} A Aᵀ`.
pub fn build_covariance(
    model: &SyndromeModel,
    q: Quadrature,
    sigma_res_sq: f64,
    squeezing: Squeezing,
) -> Result<SyndromeCovariance> {
    if !(sigma_res_sq.is_finite() && sigma_res_sq >= 0.0) {
        return Err(invalid(format!("sigma_res_sq must be finite and >= 0, got {sigma_res_sq}")));
    }
    let peak_var = crate::phase_space::squeezed_variance(squeezing)?;
    if sigma_res_sq == 0.0 && peak_var == 0.0 {
        return Err(Error::DegenerateModel(
            "noiseless ideal syndrome has singular covariance; use the plain matched filter".into(),
        ));
    }
    let g = model.gram(q);
    let ga = model.ancilla_gram(q);
    let sigma = Matrix3::from_fn(|a, b| sigma_res_sq * g[a][b] as f64 + peak_var * ga[a][b] as f64);
    SyndromeCovariance::from_matrix(q, sigma, sigma_res_sq)
}

/// Precomputed `Σ⁻¹ m_j` and `m_jᵀ Σ⁻¹ m_j` for repeated decoding.
#[derive(Debug, Clone)]
pub struct WhitenedDecoder {
    quadrature: Quadrature,
    weights: [Vector3<f64>; CODE_SIZE],
    information: [f64; CODE_SIZE],
    columns: [Vector3<f64>; CODE_SIZE],
    inverse: Matrix3<f64>,
}

impl WhitenedDecoder {
    pub fn new(model: &SyndromeModel, cov: &SyndromeCovariance) -> Self {
        let q = cov.quadrature();
        let columns: [Vector3<f64>; CODE_SIZE] = std::array::from_fn(|j| column_vector(model, q, j));
        let weights = columns.map(|m| cov.inverse() * m);
        let information = std::array::from_fn(|j| columns[j].dot(&weights[j]));
        Self { quadrature: q, weights, information, columns, inverse: *cov.inverse() }
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    #[inline]
    pub fn decode_unchecked(&self, s: &[f64; 3], threshold: f64) -> DecodeResult {
        let sv = Vector3::new(s[0], s[1], s[2]);
        let t: [f64; CODE_SIZE] = std::array::from_fn(|j| self.weights[j].dot(&sv) / self.information[j].sqrt());
        let j = argmax_abs(&t);
        DecodeResult {
            quadrature: self.quadrature,
            j_star: j + 1,
            d_hat: t[j] / self.information[j].sqrt(),
            triggered: t[j].abs() > threshold,
            t,
        }
    }

    pub fn decode(&self, s: &[f64; 3], threshold: f64) -> Result<DecodeResult> {
        check_syndrome(s)?;
        if threshold.is_nan() {
            return Err(invalid("threshold must not be NaN"));
        }
        Ok(self.decode_unchecked(s, threshold))
    }

    /// `Var(d̂_j) = 1 / (m_jᵀ Σ⁻¹ m_j)` for a 0-based index.
    pub(crate) fn estimator_variance0(&self, j: usize) -> f64 {
        1.0 / self.information[j]
    }

    /// `Δ²_jk = (m_j − m_k)ᵀ Σ⁻¹ (m_j − m_k)` for 0-based indices.
    pub(crate) fn separation0(&self, j: usize, k: usize) -> f64 {
        let diff = self.columns[j] - self.columns[k];
        diff.dot(&(self.inverse * diff))
    }

    /// Minimum-distance localization with the magnitude `d` known:
    /// `argmin_k (s − d m_k)ᵀ Σ⁻¹ (s − d m_k)`. This is the decision rule the
    /// pairwise error probabilities `Q(d Δ_jk / 2)` describe.
    pub fn localize_known_magnitude(&self, s: &[f64; 3], d: f64) -> usize {
        let sv = Vector3::new(s[0], s[1], s[2]);
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for k in 0..CODE_SIZE {
            let r = sv - self.columns[k] * d;
            let dist = r.dot(&(self.inverse * r));
            if dist < best_dist {
                best_dist = dist;
                best = k;
            }
        }
        best + 1
    }
}

pub fn matched_filter_whitened(
    model: &SyndromeModel,
    cov: &SyndromeCovariance,
    s: &[f64; 3],
    threshold: f64,
) -> Result<DecodeResult> {
    WhitenedDecoder::new(model, cov).decode(s, threshold)
}

pub fn estimator_variance(model: &SyndromeModel, cov: &SyndromeCovariance, qumode: usize) -> Result<f64> {
    let j = qumode_index(qumode)?;
    Ok(WhitenedDecoder::new(model, cov).estimator_variance0(j))
}

/// Post-correction variance bookkeeping for one qumode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceChange {
    pub qumode: usize,
    pub var_d_hat: f64,
    /// `Var(d̂) − 2σ²_res` (the tabulated quantity).
    pub minus_two_sigma_sq: f64,
    /// `Var(d̂) − σ²_res`, the corrected qumode's variance.
    pub minus_sigma_sq: f64,
}

/// Detailed form of [`variance_change_table`], carrying both differences.
pub fn variance_changes(model: &SyndromeModel, cov: &SyndromeCovariance) -> [VarianceChange; CODE_SIZE] {
    let dec = WhitenedDecoder::new(model, cov);
    let s2 = cov.sigma_res_sq();
    std::array::from_fn(|j| {
        let v = dec.estimator_variance0(j);
        VarianceChange { qumode: j + 1, var_d_hat: v, minus_two_sigma_sq: v - 2.0 * s2, minus_sigma_sq: v - s2 }
    })
}

/// `Var(d̂_j) − 2σ²_res` for `j = 1..7`.
pub fn variance_change_table(model: &SyndromeModel, cov: &SyndromeCovariance) -> [f64; CODE_SIZE] {
    variance_changes(model, cov).map(|c| c.minus_two_sigma_sq)
}

/// `Δ²_jk` for 1-based qumodes.
pub fn pairwise_separation(model: &SyndromeModel, cov: &SyndromeCovariance, j: usize, k: usize) -> Result<f64> {
    let (j, k) = (qumode_index(j)?, qumode_index(k)?);
    Ok(WhitenedDecoder::new(model, cov).separation0(j, k))
}

/// `Pr(j → k) = Q(d Δ_jk / 2)`.
pub fn pairwise_miscorrection(
    model: &SyndromeModel,
    cov: &SyndromeCovariance,
    j: usize,
    k: usize,
    d: f64,
) -> Result<f64> {
    let delta_sq = pairwise_separation(model, cov, j, k)?;
    Ok(q_function(0.5 * d * delta_sq.sqrt()))
}

/// Union bound `Σ_{k≠j} Q(d Δ_jk / 2)` on the probability of localizing an
/// error of magnitude `d` on qumode `j` anywhere else. Not clipped to 1.
pub fn miscorrection_bound(model: &SyndromeModel, cov: &SyndromeCovariance, qumode: usize, d: f64) -> Result<f64> {
    let j = qumode_index(qumode)?;
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid(format!("magnitude d must be finite and >= 0, got {d}")));
    }
    let dec = WhitenedDecoder::new(model, cov);
    Ok((0..CODE_SIZE)
        .filter(|&k| k != j)
        .map(|k| q_function(0.5 * d * dec.separation0(j, k).sqrt()))
        .sum())
}
