//! Special functions used by the negative binomial likelihood and the χ² test.
//!
//! All functions are defined for positive real arguments only; anything else
//! is reported as a [`DomainError`]. Crate-internal callers that have already
//! validated their arguments use the `*_pos` variants directly.

use core::fmt;

use crate::math::{exp, ln, ln_1p};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Argument outside the domain of a special function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainError {
    pub function: &'static str,
    pub arg: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: argument {} outside domain", self.function, self.arg)
    }
}

impl core::error::Error for DomainError {}

fn check_positive(function: &'static str, x: f64) -> Result<f64, DomainError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(DomainError { function, arg: x })
    }
}

/// ζ(k) − 1 for k = 2, 3, …, 31.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 30] = [
    6.449_340_668_482_264e-1,
    2.020_569_031_595_943e-1,
    8.232_323_371_113_819e-2,
    3.692_775_514_336_993e-2,
    1.734_306_198_444_914e-2,
    8.349_277_381_922_827e-3,
    4.077_356_197_944_340e-3,
    2.008_392_826_082_214e-3,
    9.945_751_278_180_853e-4,
    4.941_886_041_194_645e-4,
    2.460_865_533_080_483e-4,
    1.227_133_475_784_891e-4,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_763e-6,
    3.817_293_264_999_840e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_962e-7,
    4.769_329_867_878_064e-7,
    2.384_505_027_277_330e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_430e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
];

/// ln Γ(2 + z) for |z| ≤ 1/2, via the ζ-series
/// ln Γ(2 + z) = (1 − γ) z + Σ_{k≥2} (−1)^k (ζ(k) − 1) z^k / k.
/// Terms shrink like (z/2)^k, so there is no cancellation at z = 0.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let mut acc = 0.0;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * c / k;
    }
    z * ((1.0 - EULER_GAMMA) + z * acc)
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            + r2 * (-1.0 / 360.0
                + r2 * (1.0 / 1260.0
                    + r2 * (-1.0 / 1680.0
                        + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))));
    (x - 0.5) * ln(x) - x + HALF_LN_TWO_PI + series
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x
        return ln_gamma_pos(x + 1.0) - ln(x);
    }
    if x < 1.5 {
        // ln Γ(1 + z) = ln Γ(2 + z) − ln(1 + z)
        let z = x - 1.0;
        return ln_gamma_two_plus(z) - ln_1p(z);
    }
    if x < 2.5 {
        return ln_gamma_two_plus(x - 2.0);
    }
    if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return ln_gamma_two_plus(y - 2.0) + ln(prod);
    }
    ln_gamma_stirling(x)
}

pub(crate) fn digamma_pos(x: f64) -> f64 {
    let mut y = x;
    let mut shift = 0.0;
    while y < RECURRENCE_SHIFT {
        shift += 1.0 / y;
        y += 1.0;
    }
    let r2 = 1.0 / (y * y);
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    ln(y) - 0.5 / y - tail - shift
}

pub(crate) fn trigamma_pos(x: f64) -> f64 {
    let mut y = x;
    let mut shift = 0.0;
    while y < RECURRENCE_SHIFT {
        shift += 1.0 / (y * y);
        y += 1.0;
    }
    let r = 1.0 / y;
    let r2 = r * r;
    let series = r
        + r2 / 2.0
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0
                    - r2 * (1.0 / 42.0
                        - r2 * (1.0 / 30.0
                            - r2 * (5.0 / 66.0 - r2 * (691.0 / 2730.0 - r2 * 7.0 / 6.0))))));
    series + shift
}

/// Natural log of the gamma function for `x > 0`.
///
/// Uses a ζ-series around 1 and 2 (accurate near the zeros of ln Γ), the
/// downward recurrence on `[2.5, 10)` and the Stirling series beyond.
pub fn ln_gamma(x: f64) -> Result<f64, DomainError> {
    check_positive("ln_gamma", x).map(ln_gamma_pos)
}

/// Digamma ψ(x) = Γ′(x)/Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64, DomainError> {
    check_positive("digamma", x).map(digamma_pos)
}

/// Trigamma ψ′(x) for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64, DomainError> {
    check_positive("trigamma", x).map(trigamma_pos)
}

/// Digamma and trigamma recur upward to this point before switching to the
/// asymptotic series; truncation error there is below 1e-16.
const RECURRENCE_SHIFT: f64 = 10.0;

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

// Lower regularized gamma P(a, x) by its power series; use for x < a + 1.
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * exp(-x + a * ln(x) - ln_gamma_pos(a))
}

// Upper regularized gamma Q(a, x) by modified Lentz continued fraction; use
// for x ≥ a + 1.
fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    exp(-x + a * ln(x) - ln_gamma_pos(a)) * h
}

/// Regularized upper incomplete gamma Q(a, x) for `a > 0`, `x ≥ 0`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64, DomainError> {
    check_positive("gamma_q", a)?;
    if x.is_nan() || x < 0.0 {
        return Err(DomainError {
            function: "gamma_q",
            arg: x,
        });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let q = if x < a + 1.0 {
        1.0 - lower_gamma_series(a, x)
    } else {
        upper_gamma_cf(a, x)
    };
    Ok(q.clamp(0.0, 1.0))
}

/// Survival function P(X ≥ stat) of a χ² variable with `df` degrees of freedom.
pub fn chi2_survival(stat: f64, df: u32) -> Result<f64, DomainError> {
    if df < 1 {
        return Err(DomainError {
            function: "chi2_survival",
            arg: df as f64,
        });
    }
    if stat.is_nan() || stat < 0.0 {
        return Err(DomainError {
            function: "chi2_survival",
            arg: stat,
        });
    }
    gamma_q(df as f64 / 2.0, stat / 2.0)
}
