//! χ² goodness of fit, AIC and multi-model comparison.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dist::{CountModel, ModelError};
use crate::estimate::{
    mle_geometric, mle_hg, mle_nb, mle_poisson, mle_zig, EstimateError, FitResult, FrequencySample,
};
use crate::math::KahanSum;
use crate::specfn::chi2_survival;

/// Default minimum expected frequency for a tail bin.
pub const DEFAULT_POOL_THRESHOLD: f64 = 1.0;

/// Two AICs closer than this (relative to their magnitude) count as equal.
const AIC_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GofError {
    Model(ModelError),
    /// Pooling left fewer than three bins.
    Degenerate {
        bins: usize,
    },
    ZeroExpected {
        label: String,
    },
    DfNotPositive {
        bins: usize,
        n_params: usize,
    },
    InvalidThreshold(f64),
    LengthMismatch {
        observed: usize,
        expected: usize,
    },
}

impl fmt::Display for GofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GofError::Model(e) => write!(f, "{e}"),
            GofError::Degenerate { bins } => {
                write!(f, "only {bins} bins remain after pooling (need at least 3)")
            }
            GofError::ZeroExpected { label } => {
                write!(f, "expected frequency of bin {label} is zero")
            }
            GofError::DfNotPositive { bins, n_params } => write!(
                f,
                "no degrees of freedom left: {bins} bins, {n_params} fitted parameters"
            ),
            GofError::InvalidThreshold(t) => write!(f, "pooling threshold {t} must be positive"),
            GofError::LengthMismatch { observed, expected } => write!(
                f,
                "observed has {observed} entries but expected has {expected}"
            ),
        }
    }
}

impl core::error::Error for GofError {}

impl From<ModelError> for GofError {
    fn from(e: ModelError) -> Self {
        GofError::Model(e)
    }
}

/// A histogram cell covering counts `lo..=hi`, or `lo..` when `hi` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub lo: u64,
    pub hi: Option<u64>,
    pub observed: u64,
    pub expected: f64,
}

impl Bin {
    pub fn label(&self) -> String {
        match self.hi {
            Some(h) if h == self.lo => format!("{}", self.lo),
            Some(h) => format!("{}-{}", self.lo, h),
            None => format!("{}+", self.lo),
        }
    }

    fn absorb(&mut self, other: &Bin) {
        self.lo = self.lo.min(other.lo);
        self.hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        self.observed += other.observed;
        self.expected += other.expected;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofResult {
    pub bins: Vec<Bin>,
    pub chi2: f64,
    /// `bins − 1 − n_params`.
    pub df: u32,
    pub p_value: f64,
    pub n_params: usize,
    pub pooling_threshold: f64,
}

/// Expected frequencies `N · P(Y = y)` for `y = 0..=max_count`, followed by
/// the tail `N · P(Y > max_count)`.
pub fn expected_counts(model: &CountModel, n: u64, max_count: u64) -> Result<Vec<f64>, ModelError> {
    model.validate()?;
    let nf = n as f64;
    let mut out = Vec::with_capacity(max_count as usize + 2);
    let mut mass = KahanSum::default();
    for y in 0..=max_count {
        let p = model.pmf_unchecked(y);
        mass.add(p);
        out.push(nf * p);
    }
    out.push(nf * (1.0 - mass.value()).max(0.0));
    Ok(out)
}

/// One bin per count from parallel observed/expected lists; the last entry is
/// the open-ended tail.
pub fn count_bins(observed: &[u64], expected: &[f64]) -> Result<Vec<Bin>, GofError> {
    if observed.len() != expected.len() {
        return Err(GofError::LengthMismatch {
            observed: observed.len(),
            expected: expected.len(),
        });
    }
    let last = observed.len().saturating_sub(1);
    Ok(observed
        .iter()
        .zip(expected)
        .enumerate()
        .map(|(i, (&o, &e))| Bin {
            lo: i as u64,
            hi: if i == last { None } else { Some(i as u64) },
            observed: o,
            expected: e,
        })
        .collect())
}

/// Merges bins with zero expected frequency into a neighbour (the next bin,
/// or the previous one for the last bin).
fn merge_structural_zeros(bins: Vec<Bin>) -> Vec<Bin> {
    let mut out: Vec<Bin> = Vec::with_capacity(bins.len());
    let mut carry: Option<Bin> = None;
    for mut b in bins {
        if let Some(c) = carry.take() {
            b.absorb(&c);
        }
        if b.expected == 0.0 {
            carry = Some(b);
        } else {
            out.push(b);
        }
    }
    if let Some(c) = carry {
        match out.last_mut() {
            Some(last) => last.absorb(&c),
            None => out.push(c),
        }
    }
    out
}

/// Pools the upper tail: the trailing run of bins whose expected frequency is
/// below `threshold` is merged into a single bin. Bins below the run are left
/// as they are. Zero-expected bins are folded into a neighbour first.
pub fn pool_tail(bins: Vec<Bin>, threshold: f64) -> Result<Vec<Bin>, GofError> {
    if !(threshold > 0.0) {
        return Err(GofError::InvalidThreshold(threshold));
    }
    let mut bins = merge_structural_zeros(bins);
    let start = bins
        .iter()
        .rposition(|b| b.expected >= threshold)
        .map_or(0, |i| i + 1);
    if bins.len() - start >= 2 {
        let tail: Vec<Bin> = bins.drain(start + 1..).collect();
        for b in &tail {
            bins[start].absorb(b);
        }
    }
    if bins.len() < 3 {
        return Err(GofError::Degenerate { bins: bins.len() });
    }
    Ok(bins)
}

/// Pearson statistic Σ (observed − expected)² / expected.
pub fn chi2_statistic(bins: &[Bin]) -> Result<f64, GofError> {
    let mut acc = KahanSum::default();
    for b in bins {
        if !(b.expected > 0.0) {
            return Err(GofError::ZeroExpected { label: b.label() });
        }
        let d = b.observed as f64 - b.expected;
        acc.add(d * d / b.expected);
    }
    Ok(acc.value())
}

/// Pearson χ² test of `model` against the sample, with `n_params` fitted
/// parameters subtracted from the degrees of freedom.
pub fn gof_test(
    model: &CountModel,
    s: &FrequencySample,
    n_params: usize,
    threshold: f64,
) -> Result<GofResult, GofError> {
    let max = s.max_count();
    let expected = expected_counts(model, s.n(), max)?;
    let mut observed: Vec<u64> = (0..=max).map(|y| s.frequency(y)).collect();
    observed.push(0);
    let bins = pool_tail(count_bins(&observed, &expected)?, threshold)?;
    let chi2 = chi2_statistic(&bins)?;
    let df = bins.len() as i64 - 1 - n_params as i64;
    if df < 1 {
        return Err(GofError::DfNotPositive {
            bins: bins.len(),
            n_params,
        });
    }
    let df = df as u32;
    let p_value = chi2_survival(chi2, df).expect("chi2 statistic is finite and nonnegative");
    Ok(GofResult {
        bins,
        chi2,
        df,
        p_value,
        n_params,
        pooling_threshold: threshold,
    })
}

/// Akaike's information criterion `2 · n_params − 2 · loglik`.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

/// Model families with an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Nb,
    Zig,
    Hg,
    Geometric,
    Poisson,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Nb,
        Family::Zig,
        Family::Hg,
        Family::Geometric,
        Family::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Nb => "nb",
            Family::Zig => "zig",
            Family::Hg => "hg",
            Family::Geometric => "geom",
            Family::Poisson => "poisson",
        }
    }

    /// Maximum likelihood fit of this family.
    pub fn fit(self, s: &FrequencySample) -> Result<FitResult, EstimateError> {
        match self {
            Family::Nb => mle_nb(s),
            Family::Zig => mle_zig(s),
            Family::Hg => mle_hg(s),
            Family::Geometric => mle_geometric(s),
            Family::Poisson => mle_poisson(s),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFamily(pub String);

impl fmt::Display for UnknownFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown model family {:?} (expected nb, zig, hg, geom or poisson)",
            self.0
        )
    }
}

impl core::error::Error for UnknownFamily {}

impl FromStr for Family {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nb" | "negbin" => Ok(Family::Nb),
            "zig" => Ok(Family::Zig),
            "hg" => Ok(Family::Hg),
            "geom" | "geometric" => Ok(Family::Geometric),
            "poisson" => Ok(Family::Poisson),
            _ => Err(UnknownFamily(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub fit: FitResult,
    pub gof: Result<GofResult, GofError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry {
    pub family: Family,
    pub outcome: Result<FittedModel, EstimateError>,
}

impl ModelEntry {
    pub fn aic(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.fit.aic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// One entry per requested family, in request order.
    pub entries: Vec<ModelEntry>,
    /// Family with the smallest AIC; the earliest entry wins ties.
    pub best_aic: Family,
    /// Both `zig` and `hg` were fitted and their AICs agree, as they must
    /// since the two models share a likelihood surface.
    pub zig_hg_equivalent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompareError {
    NoFamilies,
    AllFailed(Vec<(Family, EstimateError)>),
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::NoFamilies => write!(f, "no model families requested"),
            CompareError::AllFailed(errs) => {
                write!(f, "every model failed to fit:")?;
                for (fam, e) in errs {
                    write!(f, " {fam}: {e};")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for CompareError {}

fn aic_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= AIC_TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Fits every requested family, runs the χ² test on each, and ranks by AIC.
/// Estimator failures become entries rather than aborting the comparison.
pub fn compare_models(
    s: &FrequencySample,
    families: &[Family],
    threshold: f64,
) -> Result<ComparisonReport, CompareError> {
    if families.is_empty() {
        return Err(CompareError::NoFamilies);
    }
    let entries: Vec<ModelEntry> = families
        .iter()
        .map(|&family| {
            let outcome = family.fit(s).map(|fit| {
                let gof = gof_test(&fit.model, s, fit.n_params, threshold);
                FittedModel { fit, gof }
            });
            ModelEntry { family, outcome }
        })
        .collect();

    let mut best: Option<(Family, f64)> = None;
    for e in &entries {
        if let Some(a) = e.aic() {
            if best.is_none_or(|(_, b)| a < b && !aic_equal(a, b)) {
                best = Some((e.family, a));
            }
        }
    }
    let Some((best_aic, _)) = best else {
        let errs = entries
            .into_iter()
            .filter_map(|e| e.outcome.err().map(|err| (e.family, err)))
            .collect();
        return Err(CompareError::AllFailed(errs));
    };

    let aic_of = |fam: Family| {
        entries
            .iter()
            .find(|e| e.family == fam)
            .and_then(ModelEntry::aic)
    };
    let zig_hg_equivalent = match (aic_of(Family::Zig), aic_of(Family::Hg)) {
        (Some(a), Some(b)) => aic_equal(a, b),
        _ => false,
    };

    Ok(ComparisonReport {
        entries,
        best_aic,
        zig_hg_equivalent,
    })
}
