//! Error function, complementary error function and the standard normal tail.
//!
//! `erf` uses the positive-term Maclaurin expansion
//! `erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))` for small and
//! moderate arguments, which has no alternating cancellation. `erfc` for
//! `x ≥ 1.5` is evaluated from the Laplace continued fraction with the
//! modified Lentz algorithm. Both reach ~1e-15 relative accuracy over the
//! ranges where they are used.

use std::f64::consts::PI;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Above this `erfc` switches from `1 - erf` to the continued fraction.
const ERFC_CF_CUTOFF: f64 = 1.5;
/// Above this `erf` is computed as `1 - erfc`.
const ERF_SERIES_CUTOFF: f64 = 2.5;
/// `erfc(x)` underflows to zero past this point.
const ERFC_UNDERFLOW: f64 = 27.3;

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / f64::from(2 * n + 1);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || n > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// `erfc(x)` for `x ≥ ERFC_CF_CUTOFF` via
/// `erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..2000u32 {
        let a = f64::from(n) * 0.5;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < ERF_SERIES_CUTOFF {
        erf_series(ax)
    } else {
        1.0 - erfc(ax)
    };
    v.copysign(x)
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < ERFC_CF_CUTOFF {
        1.0 - erf_series(x)
    } else if x < ERFC_UNDERFLOW {
        erfc_continued_fraction(x)
    } else {
        0.0
    }
}

/// Right tail of the standard normal distribution, `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}
