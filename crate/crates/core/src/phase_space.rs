//! Displacement-picture primitives: quadrature vectors, lattice reduction,
//! seeded Gaussian sampling and the squeezing convention.
//!
//! Units follow ℏ = 1 with vacuum quadrature variance 1/2, so the GKP peak
//! spacing is 2√π.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};

/// Number of data qumodes in the outer code block.
pub const CODE_SIZE: usize = 7;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// GKP lattice period `2√π`.
pub const LATTICE_SPACING: f64 = 2.0 * SQRT_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::X, Quadrature::P];

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

impl std::fmt::Display for Quadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Quadrature {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Quadrature::X),
            "p" | "P" => Ok(Quadrature::P),
            other => Err(invalid(format!("unknown quadrature `{other}` (expected x or p)"))),
        }
    }
}

/// Per-qumode displacement deviations of a code block.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisplacementState {
    pub x: [f64; CODE_SIZE],
    pub p: [f64; CODE_SIZE],
}

impl DisplacementState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn quadrature(&self, q: Quadrature) -> &[f64; CODE_SIZE] {
        match q {
            Quadrature::X => &self.x,
            Quadrature::P => &self.p,
        }
    }

    pub fn quadrature_mut(&mut self, q: Quadrature) -> &mut [f64; CODE_SIZE] {
        match q {
            Quadrature::X => &mut self.x,
            Quadrature::P => &mut self.p,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }
}

/// Squeezing of the GKP peaks and eigenstate ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Squeezing {
    Ideal,
    Finite { r: f64 },
}

impl Squeezing {
    pub fn finite(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(format!("squeezing parameter r must be finite and > 0, got {r}")));
        }
        Ok(Squeezing::Finite { r })
    }

    /// Squeezing expressed in dB, `10·log10(e^{2r})`.
    pub fn from_db(db: f64) -> Result<Self> {
        Self::finite(db * std::f64::consts::LN_10 / 20.0)
    }

    /// `e^{-2r}`, zero when ideal.
    pub fn noise_factor(self) -> f64 {
        match self {
            Squeezing::Ideal => 0.0,
            Squeezing::Finite { r } => (-2.0 * r).exp(),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Squeezing::Ideal => Ok(()),
            Squeezing::Finite { r } => Self::finite(r).map(|_| ()),
        }
    }
}

/// Variance along the squeezed quadrature: 0 when ideal, `e^{-2r}/2` otherwise.
pub fn squeezed_variance(squeezing: Squeezing) -> Result<f64> {
    squeezing.validate()?;
    Ok(0.5 * squeezing.noise_factor())
}

/// Noise configuration of one inner suppression round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub sigma: f64,
    pub squeezing: Squeezing,
    /// Residual variance on a data quadrature after inner suppression.
    pub sigma_res_sq: f64,
}

impl NoiseParams {
    /// Derives the residual variance: the full folded-series variance when
    /// ideal, `σ²/2 + e^{-2r}/8` under finite squeezing.
    pub fn new(sigma: f64, squeezing: Squeezing) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        squeezing.validate()?;
        let sigma_res_sq = match squeezing {
            Squeezing::Ideal if sigma == 0.0 => 0.0,
            Squeezing::Ideal => crate::gkp_analytics::residual_variance(sigma, &Default::default())?,
            Squeezing::Finite { r } => crate::gkp_analytics::finite_squeezing_residual_variance(sigma, r)?,
        };
        Ok(Self { sigma, squeezing, sigma_res_sq })
    }

    pub fn peak_std(&self) -> f64 {
        (0.5 * self.squeezing.noise_factor()).sqrt()
    }
}

/// Reduces `v` into `[−√π, √π)` modulo `2√π`. Ties at `+√π` map to `−√π`.
pub fn modular_reduce(v: f64) -> Result<f64> {
    ensure_finite("value", v)?;
    Ok(reduce_unchecked(v))
}

#[inline]
pub(crate) fn reduce_unchecked(v: f64) -> f64 {
    // `round` is odd-symmetric, so reduce(-v) == -reduce(v) off the boundary
    let k = (v / LATTICE_SPACING).round();
    let mut r = v - k * LATTICE_SPACING;
    if r >= SQRT_PI {
        r -= LATTICE_SPACING;
    } else if r < -SQRT_PI {
        r += LATTICE_SPACING;
    }
    r
}

/// Independent, reproducible random stream for one trajectory.
///
/// The generator is ChaCha12 keyed by `master_seed` with the stream id
/// selecting the ChaCha stream, so trajectory `i` draws the same sequence
/// whatever order or thread it runs on.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self { master_seed, stream_id, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    #[inline]
    pub(crate) fn normal_unchecked(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            0.0
        } else {
            sigma * self.standard_normal()
        }
    }
}

/// Draws from `N(0, σ²)`; `σ = 0` returns exactly 0 without consuming the stream.
pub fn sample_gaussian(stream: &mut RngStream, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    Ok(stream.normal_unchecked(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulp(v: f64) -> f64 {
        let v = v.abs().max(f64::MIN_POSITIVE);
        f64::from_bits(v.to_bits() + 1) - v
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(modular_reduce(0.0).unwrap(), 0.0);
        assert_eq!(modular_reduce(LATTICE_SPACING).unwrap(), 0.0);
        assert_eq!(modular_reduce(SQRT_PI).unwrap(), -SQRT_PI);
        assert_eq!(modular_reduce(-SQRT_PI).unwrap(), -SQRT_PI);
        let r = modular_reduce(2.0).unwrap();
        assert!((r - (2.0 - LATTICE_SPACING)).abs() < 1e-15);
        assert!((r + 1.544_907_701_811_032).abs() < 1e-12);
    }

    #[test]
    fn reduce_rejects_non_finite() {
        assert!(matches!(modular_reduce(f64::NAN), Err(crate::Error::InvalidArgument(_))));
        assert!(modular_reduce(f64::INFINITY).is_err());
    }

    #[test]
    fn squeezing_variance() {
        assert_eq!(squeezed_variance(Squeezing::Ideal).unwrap(), 0.0);
        // 10 dB means e^{-2r} = 0.1
        let ten_db = Squeezing::from_db(10.0).unwrap();
        assert!((squeezed_variance(ten_db).unwrap() - 0.05).abs() < 1e-15);
        assert!(squeezed_variance(Squeezing::Finite { r: 400.0 }).unwrap() < 1e-300);
        assert!(squeezed_variance(Squeezing::Finite { r: 0.0 }).is_err());
        assert!(squeezed_variance(Squeezing::Finite { r: -1.0 }).is_err());
    }

    #[test]
    fn gaussian_sampling_contract() {
        let mut s = RngStream::new(7, 0);
        assert_eq!(sample_gaussian(&mut s, 0.0).unwrap(), 0.0);
        assert!(sample_gaussian(&mut s, -1.0).is_err());

        let draw = |seed| {
            let mut s = RngStream::new(seed, 3);
            (0..64).map(|_| sample_gaussian(&mut s, 1.3).unwrap().to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn sample_variance_law_of_large_numbers() {
        let sigma = 0.2f64.sqrt();
        let mut s = RngStream::new(2024, 0);
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let v = sample_gaussian(&mut s, sigma).unwrap();
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((var - 0.2).abs() < 0.002, "variance {var}");
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 1_000_000;
        let mut a = RngStream::new(99, 0);
        let mut b = RngStream::new(99, 1);
        let (mut sab, mut saa, mut sbb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = a.standard_normal();
            let y = b.standard_normal();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - sa * sb / nf / nf;
        let corr = cov / ((saa / nf - (sa / nf).powi(2)) * (sbb / nf - (sb / nf).powi(2))).sqrt();
        assert!(corr.abs() < 3.0 / nf.sqrt(), "correlation {corr}");
    }

    proptest! {
        #[test]
        fn reduce_lands_in_interval(v in -1e6f64..1e6) {
            let r = modular_reduce(v).unwrap();
            prop_assert!((-SQRT_PI..SQRT_PI).contains(&r));
            let k = (v - r) / LATTICE_SPACING;
            prop_assert!((k - k.round()).abs() * LATTICE_SPACING <= 4.0 * ulp(v));
        }

        #[test]
        fn reduce_is_periodic(v in -50.0f64..50.0, k in -1_000_000i64..1_000_000) {
            let shifted = v + LATTICE_SPACING * k as f64;
            let a = modular_reduce(shifted).unwrap();
            let b = modular_reduce(v).unwrap();
            // compare on the circle so a wrap across the boundary counts as close
            let d = (a - b).abs();
            let d = d.min(LATTICE_SPACING - d);
            prop_assert!(d <= 8.0 * ulp(shifted), "{a} vs {b}");
        }

        #[test]
        fn reduce_is_odd_away_from_boundary(v in -1e4f64..1e4) {
            let r = modular_reduce(v).unwrap();
            prop_assume!(r != -SQRT_PI);
            prop_assert_eq!(modular_reduce(-v).unwrap(), -r);
        }
    }
}
