//! Count distributions: Poisson, geometric, negative binomial, and their
//! zero-inflated (or zero-deflated) and hurdle extensions.
//!
//! Parameterisation follows the parasitology convention: the geometric and
//! negative binomial are written with success probability `p` (so
//! `P(X = x) = p q^x` for the geometric, `q = 1 − p`) and the negative
//! binomial additionally carries the shape `k`. The mean of `NB(p, k)` is
//! `k q / p`.
//!
//! A compound model wraps exactly one [`BaseModel`]; nesting a compound model
//! inside another is not representable.

use core::fmt;

use alloc::vec::Vec;

use crate::math::{exp, exp_m1, ln, ln_1p, powf};
use crate::specfn::ln_gamma_pos;

/// Below this count the NB coefficient ln Γ(y+k) − ln Γ(k) − ln y! is summed
/// term by term instead of differencing log-gammas.
const NB_DIRECT_SUM_MAX: u64 = 32;

/// Relative slack allowed when checking the zero-deflation bound, so that an
/// estimate computed exactly on the bound is not rejected over rounding.
const PI_BOUND_SLACK: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A base parameter is out of range.
    InvalidParameter { name: &'static str, value: f64 },
    /// The mixing weight lies outside `[lower, upper]`.
    PiOutOfBounds { pi: f64, lower: f64, upper: f64 },
    /// Hurdle over a base with all of its mass at zero.
    DegenerateBase,
    /// A compound model was used as the base of another compound model.
    NestedCompound,
    /// PGF argument outside `[-1, 1]`.
    ZOutOfRange(f64),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            ModelError::PiOutOfBounds { pi, lower, upper } => {
                write!(
                    f,
                    "pi = {pi} outside admissible interval [{lower}, {upper}]"
                )
            }
            ModelError::DegenerateBase => {
                write!(f, "base distribution puts all its mass at zero")
            }
            ModelError::NestedCompound => {
                write!(f, "compound models cannot be nested")
            }
            ModelError::ZOutOfRange(z) => write!(f, "pgf argument {z} outside [-1, 1]"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Mean, variance and variance-to-mean ratio of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`; `None` when the mean is zero.
    pub dispersion: Option<f64>,
}

impl Moments {
    fn new(mean: f64, variance: f64) -> Self {
        let dispersion = if mean > 0.0 {
            Some(variance / mean)
        } else {
            None
        };
        Moments {
            mean,
            variance,
            dispersion,
        }
    }
}

/// A non-compound count distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseModel {
    Poisson { mean: f64 },
    Geometric { p: f64 },
    NegBinomial { p: f64, k: f64 },
}

fn check_prob(name: &'static str, p: f64) -> Result<(), ModelError> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value: p })
    }
}

impl BaseModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            BaseModel::Poisson { mean } => {
                if mean.is_finite() && mean >= 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter {
                        name: "m",
                        value: mean,
                    })
                }
            }
            BaseModel::Geometric { p } => check_prob("p", p),
            BaseModel::NegBinomial { p, k } => {
                check_prob("p", p)?;
                if k.is_finite() && k > 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter {
                        name: "k",
                        value: k,
                    })
                }
            }
        }
    }

    /// Number of free parameters.
    pub fn n_params(&self) -> usize {
        match self {
            BaseModel::NegBinomial { .. } => 2,
            _ => 1,
        }
    }

    /// ln P(X = 0).
    pub fn ln_p0(&self) -> f64 {
        match *self {
            BaseModel::Poisson { mean } => -mean,
            BaseModel::Geometric { p } => ln(p),
            BaseModel::NegBinomial { p, k } => k * ln(p),
        }
    }

    /// P(X = 0).
    pub fn p0(&self) -> f64 {
        exp(self.ln_p0())
    }

    /// ln(1 − P(X = 0)), accurate when P(X = 0) is close to 0 or 1.
    pub fn ln_one_minus_p0(&self) -> f64 {
        match *self {
            BaseModel::Geometric { p } => ln_1p(-p),
            _ => ln(-exp_m1(self.ln_p0())),
        }
    }

    pub fn log_pmf(&self, y: u64) -> f64 {
        let yf = y as f64;
        match *self {
            BaseModel::Poisson { mean } => {
                if mean == 0.0 {
                    return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
                }
                yf * ln(mean) - mean - ln_gamma_pos(yf + 1.0)
            }
            BaseModel::Geometric { p } => {
                if y == 0 {
                    ln(p)
                } else if p == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    ln(p) + yf * ln_1p(-p)
                }
            }
            BaseModel::NegBinomial { p, k } => {
                if y == 0 {
                    k * ln(p)
                } else if p == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_nb_coefficient(y, k) + k * ln(p) + yf * ln_1p(-p)
                }
            }
        }
    }

    pub fn pmf(&self, y: u64) -> f64 {
        exp(self.log_pmf(y))
    }

    pub fn pgf(&self, z: f64) -> f64 {
        match *self {
            BaseModel::Poisson { mean } => exp(mean * (z - 1.0)),
            BaseModel::Geometric { p } => p / (1.0 - (1.0 - p) * z),
            BaseModel::NegBinomial { p, k } => powf(p / (1.0 - (1.0 - p) * z), k),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            BaseModel::Poisson { mean } => mean,
            BaseModel::Geometric { p } => (1.0 - p) / p,
            BaseModel::NegBinomial { p, k } => k * (1.0 - p) / p,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            BaseModel::Poisson { mean } => mean,
            BaseModel::Geometric { p } => (1.0 - p) / (p * p),
            BaseModel::NegBinomial { p, k } => k * (1.0 - p) / (p * p),
        }
    }
}

/// ln [Γ(y + k) / (Γ(y + 1) Γ(k))].
pub(crate) fn ln_nb_coefficient(y: u64, k: f64) -> f64 {
    if y <= NB_DIRECT_SUM_MAX {
        (0..y)
            .map(|i| {
                let i = i as f64;
                ln((k + i) / (i + 1.0))
            })
            .sum()
    } else {
        let yf = y as f64;
        ln_gamma_pos(yf + k) - ln_gamma_pos(k) - ln_gamma_pos(yf + 1.0)
    }
}

/// A count distribution, possibly with a modified zero class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountModel {
    Base(BaseModel),
    /// `P(0) = π + (1 − π) p₀`, `P(y) = (1 − π) p(y)` for `y > 0`.
    /// Negative `π` deflates the zero class.
    ZeroInflated {
        pi: f64,
        base: BaseModel,
    },
    /// `P(0) = π`, `P(y) = (1 − π) p(y) / (1 − p₀)` for `y > 0`.
    Hurdle {
        pi: f64,
        base: BaseModel,
    },
}

impl From<BaseModel> for CountModel {
    fn from(base: BaseModel) -> Self {
        CountModel::Base(base)
    }
}

/// Admissible interval for the zero-inflation weight over a base with zero
/// mass `p0`.
pub fn zero_inflation_bounds(base: &BaseModel) -> (f64, f64) {
    let p0 = base.p0();
    if p0 >= 1.0 {
        (f64::NEG_INFINITY, 1.0)
    } else {
        (-p0 / -exp_m1(base.ln_p0()), 1.0)
    }
}

fn base_of(model: CountModel) -> Result<BaseModel, ModelError> {
    match model {
        CountModel::Base(b) => {
            b.validate()?;
            Ok(b)
        }
        _ => Err(ModelError::NestedCompound),
    }
}

/// Validated zero-inflated (π ≥ 0) or zero-deflated (π < 0) model.
pub fn make_zero_inflated(base: CountModel, pi: f64) -> Result<CountModel, ModelError> {
    let model = CountModel::ZeroInflated {
        pi,
        base: base_of(base)?,
    };
    model.validate()?;
    Ok(model)
}

/// Validated hurdle model.
pub fn make_hurdle(base: CountModel, pi: f64) -> Result<CountModel, ModelError> {
    let model = CountModel::Hurdle {
        pi,
        base: base_of(base)?,
    };
    model.validate()?;
    Ok(model)
}

impl CountModel {
    pub fn poisson(mean: f64) -> Result<Self, ModelError> {
        Self::checked_base(BaseModel::Poisson { mean })
    }

    pub fn geometric(p: f64) -> Result<Self, ModelError> {
        Self::checked_base(BaseModel::Geometric { p })
    }

    pub fn negative_binomial(p: f64, k: f64) -> Result<Self, ModelError> {
        Self::checked_base(BaseModel::NegBinomial { p, k })
    }

    /// Negative binomial from its mean `m` and shape `k`: `p = k / (m + k)`.
    pub fn negative_binomial_mean(m: f64, k: f64) -> Result<Self, ModelError> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "m",
                value: m,
            });
        }
        Self::negative_binomial(k / (m + k), k)
    }

    fn checked_base(base: BaseModel) -> Result<Self, ModelError> {
        base.validate()?;
        Ok(CountModel::Base(base))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            CountModel::Base(b) => b.validate(),
            CountModel::ZeroInflated { pi, base } => {
                base.validate()?;
                let (lower, upper) = zero_inflation_bounds(&base);
                let slack = PI_BOUND_SLACK * (1.0 + lower.abs());
                if pi.is_finite() && pi <= upper && pi >= lower - slack {
                    Ok(())
                } else {
                    Err(ModelError::PiOutOfBounds { pi, lower, upper })
                }
            }
            CountModel::Hurdle { pi, base } => {
                base.validate()?;
                if !(pi.is_finite() && (0.0..=1.0).contains(&pi)) {
                    return Err(ModelError::PiOutOfBounds {
                        pi,
                        lower: 0.0,
                        upper: 1.0,
                    });
                }
                if base.p0() >= 1.0 {
                    return Err(ModelError::DegenerateBase);
                }
                Ok(())
            }
        }
    }

    pub fn base(&self) -> BaseModel {
        match *self {
            CountModel::Base(b) => b,
            CountModel::ZeroInflated { base, .. } | CountModel::Hurdle { base, .. } => base,
        }
    }

    /// Number of free parameters, as used for AIC.
    pub fn n_params(&self) -> usize {
        match self {
            CountModel::Base(b) => b.n_params(),
            CountModel::ZeroInflated { base, .. } | CountModel::Hurdle { base, .. } => {
                base.n_params() + 1
            }
        }
    }

    /// Short family tag, e.g. `"zig"` or `"nb"`.
    pub fn family_name(&self) -> &'static str {
        use BaseModel::*;
        match self {
            CountModel::Base(Poisson { .. }) => "poisson",
            CountModel::Base(Geometric { .. }) => "geom",
            CountModel::Base(NegBinomial { .. }) => "nb",
            CountModel::ZeroInflated {
                base: Poisson { .. },
                ..
            } => "zip",
            CountModel::ZeroInflated {
                base: Geometric { .. },
                ..
            } => "zig",
            CountModel::ZeroInflated {
                base: NegBinomial { .. },
                ..
            } => "zinb",
            CountModel::Hurdle {
                base: Poisson { .. },
                ..
            } => "hp",
            CountModel::Hurdle {
                base: Geometric { .. },
                ..
            } => "hg",
            CountModel::Hurdle {
                base: NegBinomial { .. },
                ..
            } => "hnb",
        }
    }

    /// Named parameter values in a stable order. Negative binomial bases
    /// report both `p` and the implied mean `m` alongside `k`.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let CountModel::ZeroInflated { pi, .. } | CountModel::Hurdle { pi, .. } = *self {
            out.push(("pi", pi));
        }
        match self.base() {
            BaseModel::Poisson { mean } => out.push(("m", mean)),
            BaseModel::Geometric { p } => out.push(("p", p)),
            b @ BaseModel::NegBinomial { p, k } => {
                out.push(("m", b.mean()));
                out.push(("k", k));
                out.push(("p", p));
            }
        }
        out
    }

    /// ln P(Y = y) for a model already known to be valid; `-inf` where the
    /// probability is zero.
    pub(crate) fn log_pmf_unchecked(&self, y: u64) -> f64 {
        match *self {
            CountModel::Base(b) => b.log_pmf(y),
            CountModel::ZeroInflated { pi, base } => {
                if y == 0 {
                    let p0 = pi + (1.0 - pi) * base.p0();
                    if p0 > 0.0 {
                        ln(p0)
                    } else {
                        f64::NEG_INFINITY
                    }
                } else if pi >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_1p(-pi) + base.log_pmf(y)
                }
            }
            CountModel::Hurdle { pi, base } => {
                if y == 0 {
                    if pi > 0.0 {
                        ln(pi)
                    } else {
                        f64::NEG_INFINITY
                    }
                } else if pi >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_1p(-pi) + base.log_pmf(y) - base.ln_one_minus_p0()
                }
            }
        }
    }

    pub(crate) fn pmf_unchecked(&self, y: u64) -> f64 {
        match *self {
            CountModel::ZeroInflated { pi, base } if y == 0 => {
                (pi + (1.0 - pi) * base.p0()).max(0.0)
            }
            CountModel::Hurdle { pi, .. } if y == 0 => pi,
            _ => exp(self.log_pmf_unchecked(y)),
        }
    }

    /// P(Y = y). Structurally impossible outcomes give exactly `0.0`.
    pub fn pmf(&self, y: u64) -> Result<f64, ModelError> {
        self.validate()?;
        Ok(self.pmf_unchecked(y))
    }

    /// ln P(Y = y), or `-inf` where the probability is zero.
    pub fn log_pmf(&self, y: u64) -> Result<f64, ModelError> {
        self.validate()?;
        Ok(self.log_pmf_unchecked(y))
    }

    /// Probability generating function E[z^Y] for `|z| ≤ 1`.
    pub fn pgf(&self, z: f64) -> Result<f64, ModelError> {
        self.validate()?;
        if !(z.abs() <= 1.0) {
            return Err(ModelError::ZOutOfRange(z));
        }
        Ok(match *self {
            CountModel::Base(b) => b.pgf(z),
            CountModel::ZeroInflated { pi, base } => pi + (1.0 - pi) * base.pgf(z),
            CountModel::Hurdle { pi, base } => {
                let p0 = base.p0();
                pi + (1.0 - pi) * (base.pgf(z) - p0) / (1.0 - p0)
            }
        })
    }

    pub fn moments(&self) -> Result<Moments, ModelError> {
        self.validate()?;
        Ok(self.moments_unchecked())
    }

    pub(crate) fn moments_unchecked(&self) -> Moments {
        match *self {
            CountModel::Base(b) => Moments::new(b.mean(), b.variance()),
            CountModel::ZeroInflated { pi, base } => {
                let (mu, s2) = (base.mean(), base.variance());
                Moments::new((1.0 - pi) * mu, (1.0 - pi) * s2 + pi * (1.0 - pi) * mu * mu)
            }
            CountModel::Hurdle { pi, base } => {
                let (mu, s2) = (base.mean(), base.variance());
                let alpha = (1.0 - pi) / -exp_m1(base.ln_p0());
                Moments::new(alpha * mu, alpha * s2 + alpha * (1.0 - alpha) * mu * mu)
            }
        }
    }
}
