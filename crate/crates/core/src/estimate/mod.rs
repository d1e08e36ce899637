//! Parameter estimation.
//!
//! Zero-inflated geometric, hurdle geometric, geometric and Poisson models
//! have closed-form maximum likelihood estimators in terms of `N`, `N₀` and
//! the sample mean. The negative binomial shape has no closed form and is
//! solved numerically in [`mle_nb`]; [`mom_nb`] gives the method-of-moments
//! alternative.

mod nb;
mod sample;

use alloc::vec::Vec;
use core::fmt;

use crate::dist::{make_hurdle, make_zero_inflated, BaseModel, CountModel, ModelError};
use crate::gof::aic;
use crate::math::{exp, ln, KahanSum};
use crate::specfn::digamma_pos;

pub use nb::{mle_nb, mom_nb, nb_profile_loglik, nb_score, SolverDiagnostics};
pub use sample::{FrequencySample, SampleError};

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateError {
    /// Every observation is zero; all families collapse to a point mass.
    AllZeros,
    /// Sample variance does not exceed the mean, so the negative binomial
    /// score equation has no finite root.
    UnderDispersed {
        mean: f64,
        variance: f64,
    },
    /// Bracket expansion for the negative binomial shape reached its limit
    /// without a sign change of the score.
    NoSignChange {
        k_lo: f64,
        k_hi: f64,
    },
    /// Every nonzero observation equals one; the geometric estimate would be
    /// `p = 1`, which leaves no mass for the observed ones.
    OnlyOnes,
    Model(ModelError),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::AllZeros => write!(f, "all observations are zero"),
            EstimateError::UnderDispersed { mean, variance } => write!(
                f,
                "sample is not over-dispersed (variance {variance} <= mean {mean})"
            ),
            EstimateError::NoSignChange { k_lo, k_hi } => write!(
                f,
                "negative binomial score has no sign change in k = [{k_lo}, {k_hi}]"
            ),
            EstimateError::OnlyOnes => write!(
                f,
                "every nonzero observation is 1; the geometric estimate degenerates to p = 1"
            ),
            EstimateError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EstimateError {}

impl From<ModelError> for EstimateError {
    fn from(e: ModelError) -> Self {
        EstimateError::Model(e)
    }
}

/// How a fit was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum FitMethod {
    ClosedForm,
    Moments,
    Numerical(SolverDiagnostics),
}

impl FitMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FitMethod::ClosedForm => "closed-form",
            FitMethod::Moments => "moments",
            FitMethod::Numerical(_) => "numerical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: CountModel,
    pub loglik: f64,
    /// `2 · n_params − 2 · loglik`.
    pub aic: f64,
    pub n_params: usize,
    pub method: FitMethod,
    /// The estimate sits on the edge of the parameter space (e.g. a
    /// zero-inflated geometric fitted to data without zeros).
    pub boundary: bool,
}

impl FitResult {
    fn new(
        model: CountModel,
        sample: &FrequencySample,
        method: FitMethod,
        boundary: bool,
    ) -> Result<Self, EstimateError> {
        let loglik = loglik(&model, sample)?;
        let n_params = model.n_params();
        Ok(FitResult {
            model,
            loglik,
            aic: aic(loglik, n_params),
            n_params,
            method,
            boundary,
        })
    }
}

fn require_nonzero(s: &FrequencySample) -> Result<(), EstimateError> {
    if s.is_all_zero() {
        Err(EstimateError::AllZeros)
    } else {
        Ok(())
    }
}

/// Closed-form zero-inflated geometric estimate `(π̂, p̂)` from the sample
/// size, number of zeros and sample mean:
///
/// `π̂ = (m N₀ − N + N₀) / (m N − N + N₀)`, `p̂ = (N − N₀) / (m N)`.
pub fn zig_closed_form(n: u64, n0: u64, mean: f64) -> Result<(f64, f64), EstimateError> {
    if n0 >= n || !(mean > 0.0) {
        return Err(EstimateError::AllZeros);
    }
    let (n, n0) = (n as f64, n0 as f64);
    let denom = mean * n - n + n0;
    if denom <= 0.0 {
        return Err(EstimateError::OnlyOnes);
    }
    Ok(((mean * n0 - n + n0) / denom, (n - n0) / (mean * n)))
}

/// Zero-inflated (or zero-deflated) geometric maximum likelihood fit.
///
/// With no zeros in the sample the estimate lies on the deflation bound
/// `π̂ = −p̂ / (1 − p̂)`; it is returned with `boundary` set.
pub fn mle_zig(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    require_nonzero(s)?;
    let (n, n0, total) = (s.n() as i128, s.n0() as i128, s.total() as i128);
    let positives = n - n0;
    // m N − N + N₀ = Σy − (N − N₀) ≥ 0, with equality only when every
    // nonzero count is 1.
    let excess = total - positives;
    if excess == 0 {
        return Err(EstimateError::OnlyOnes);
    }
    // Integer form of the closed-form estimator (m N is the exact total).
    let pi = (total * n0 - n * positives) as f64 / (n as f64 * excess as f64);
    let p = positives as f64 / total as f64;
    let model = make_zero_inflated(CountModel::geometric(p)?, pi)?;
    FitResult::new(model, s, FitMethod::ClosedForm, s.n0() == 0)
}

/// Hurdle geometric maximum likelihood fit: `π̂ = N₀ / N`,
/// `p̂ = (N − N₀) / (N m)`.
pub fn mle_hg(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    require_nonzero(s)?;
    let positives = s.n() - s.n0();
    if s.total() == positives as u128 {
        return Err(EstimateError::OnlyOnes);
    }
    let pi = s.n0() as f64 / s.n() as f64;
    let p = positives as f64 / s.total() as f64;
    let model = make_hurdle(CountModel::geometric(p)?, pi)?;
    FitResult::new(model, s, FitMethod::ClosedForm, s.n0() == 0)
}

/// Geometric estimate `p̂ = 1 / (1 + m)`; a zero mean gives the point mass
/// `p̂ = 1`.
pub fn geometric_closed_form(mean: f64) -> f64 {
    1.0 / (1.0 + mean)
}

pub fn mle_geometric(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    require_nonzero(s)?;
    let p = s.n() as f64 / (s.n() as f64 + s.total() as f64);
    FitResult::new(CountModel::geometric(p)?, s, FitMethod::ClosedForm, false)
}

pub fn mle_poisson(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    require_nonzero(s)?;
    FitResult::new(
        CountModel::poisson(s.mean())?,
        s,
        FitMethod::ClosedForm,
        false,
    )
}

/// `π_hg = π_zig + (1 − π_zig) p`: the hurdle weight giving the same pmf as
/// a zero-inflated geometric.
pub fn zig_to_hg_pi(pi_zig: f64, p: f64) -> f64 {
    p + pi_zig * (1.0 - p)
}

/// Inverse of [`zig_to_hg_pi`].
pub fn hg_to_zig_pi(pi_hg: f64, p: f64) -> f64 {
    (pi_hg - p) / (1.0 - p)
}

/// Re-expresses a zero-inflated geometric model as the equivalent hurdle
/// geometric, or the other way round. Other models are returned unchanged.
pub fn zig_hg_reparam(model: &CountModel) -> Result<CountModel, ModelError> {
    match *model {
        CountModel::ZeroInflated {
            pi,
            base: base @ BaseModel::Geometric { p },
        } => make_hurdle(base.into(), zig_to_hg_pi(pi, p).clamp(0.0, 1.0)),
        CountModel::Hurdle {
            pi,
            base: base @ BaseModel::Geometric { p },
        } => make_zero_inflated(base.into(), hg_to_zig_pi(pi, p)),
        other => {
            other.validate()?;
            Ok(other)
        }
    }
}

/// Log-likelihood `Σ_y freq[y] · ln P(Y = y)`; `-inf` if an observed count
/// has probability zero.
pub fn loglik(model: &CountModel, s: &FrequencySample) -> Result<f64, ModelError> {
    model.validate()?;
    let mut acc = KahanSum::default();
    for (y, f) in s.iter() {
        let lp = model.log_pmf_unchecked(y);
        if lp == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        acc.add(f as f64 * lp);
    }
    Ok(acc.value())
}

/// Score vector (partial derivatives of the log-likelihood) at a model's
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    /// Parameter names, in the order of `values`.
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    /// `π` is at an edge of its admissible range, so the derivative in `π`
    /// is one-sided.
    pub boundary: bool,
}

/// ψ(y + k) − ψ(k), summed directly for moderate `y`.
pub(crate) fn digamma_diff(y: u64, k: f64) -> f64 {
    if y <= 256 {
        (0..y).map(|i| 1.0 / (k + i as f64)).sum()
    } else {
        digamma_pos(y as f64 + k) - digamma_pos(k)
    }
}

// Per-parameter derivatives of ln p(y; θ) and of p(0; θ) for each base.
fn base_param_names(base: &BaseModel) -> &'static [&'static str] {
    match base {
        BaseModel::Poisson { .. } => &["m"],
        BaseModel::Geometric { .. } => &["p"],
        BaseModel::NegBinomial { .. } => &["p", "k"],
    }
}

fn grad_log_pmf(base: &BaseModel, y: u64, out: &mut [f64]) {
    let yf = y as f64;
    match *base {
        BaseModel::Poisson { mean } => out[0] = yf / mean - 1.0,
        BaseModel::Geometric { p } => out[0] = 1.0 / p - yf / (1.0 - p),
        BaseModel::NegBinomial { p, k } => {
            out[0] = k / p - yf / (1.0 - p);
            out[1] = digamma_diff(y, k) + ln(p);
        }
    }
}

fn grad_p0(base: &BaseModel, out: &mut [f64]) {
    match *base {
        BaseModel::Poisson { mean } => out[0] = -exp(-mean),
        BaseModel::Geometric { .. } => out[0] = 1.0,
        BaseModel::NegBinomial { p, k } => {
            let p0 = base.p0();
            out[0] = k * p0 / p;
            out[1] = p0 * ln(p);
        }
    }
}

/// Sum over observations with `y` in the selected set of ∂ ln p(y; θ)/∂θ.
fn sum_grad(base: &BaseModel, s: &FrequencySample, skip_zero: bool) -> Vec<f64> {
    let dim = base.n_params();
    let mut total = alloc::vec![0.0; dim];
    let mut g = alloc::vec![0.0; dim];
    for (y, f) in s.iter() {
        if skip_zero && y == 0 {
            continue;
        }
        grad_log_pmf(base, y, &mut g);
        for (t, gi) in total.iter_mut().zip(&g) {
            *t += f as f64 * gi;
        }
    }
    total
}

/// Evaluates the likelihood equations at the model's parameters.
///
/// For compound models the first component is ∂ℓ/∂π, followed by the base
/// parameters (`p` for the geometric, `m` for the Poisson, `p, k` for the
/// negative binomial). At a maximum likelihood estimate in the interior every
/// component is zero.
pub fn score_residuals(model: &CountModel, s: &FrequencySample) -> Result<Scores, ModelError> {
    model.validate()?;
    let n = s.n() as f64;
    let n0 = s.n0() as f64;
    let positives = n - n0;
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut boundary = false;
    match *model {
        CountModel::Base(base) => {
            names.extend_from_slice(base_param_names(&base));
            values = sum_grad(&base, s, false);
        }
        CountModel::ZeroInflated { pi, base } => {
            let p0 = base.p0();
            let zero_mass = pi + (1.0 - pi) * p0;
            let (lower, upper) = crate::dist::zero_inflation_bounds(&base);
            boundary = zero_mass <= 0.0 || pi <= lower || pi >= upper;
            let mut d_p0 = alloc::vec![0.0; base.n_params()];
            grad_p0(&base, &mut d_p0);
            let zero_term = |num: f64| if n0 > 0.0 { n0 * num / zero_mass } else { 0.0 };

            names.push("pi");
            values.push(zero_term(1.0 - p0) - positives / (1.0 - pi));
            names.extend_from_slice(base_param_names(&base));
            let rest = sum_grad(&base, s, true);
            for (r, dp) in rest.iter().zip(&d_p0) {
                values.push(zero_term((1.0 - pi) * dp) + r);
            }
        }
        CountModel::Hurdle { pi, base } => {
            boundary = pi <= 0.0 || pi >= 1.0;
            let one_minus_p0 = exp(base.ln_one_minus_p0());
            let mut d_p0 = alloc::vec![0.0; base.n_params()];
            grad_p0(&base, &mut d_p0);

            names.push("pi");
            let zero_part = if n0 > 0.0 { n0 / pi } else { 0.0 };
            values.push(zero_part - positives / (1.0 - pi));
            names.extend_from_slice(base_param_names(&base));
            let rest = sum_grad(&base, s, true);
            for (r, dp) in rest.iter().zip(&d_p0) {
                values.push(positives * dp / one_minus_p0 + r);
            }
        }
    }
    Ok(Scores {
        names,
        values,
        boundary,
    })
}
