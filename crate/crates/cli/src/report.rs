//! JSON report documents. Field order is fixed by the struct definitions and
//! floats are written in shortest round-trip form, so identical inputs give
//! byte-identical output. The layout is described by
//! `docs/report.schema.json`.

use countfit_core::estimate::SolverDiagnostics;
use countfit_core::gof::{Bin, GofResult};
use countfit_core::sim::RecoveryReport;
use countfit_core::{EstimateError, FitMethod, FitResult, FrequencySample, GofError};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::Serialize as DeriveSerialize;

use crate::modelspec::canonical;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, DeriveSerialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct Input {
    pub sha256: String,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct SampleSummary {
    pub n: u64,
    pub n0: u64,
    pub mean: f64,
    /// Denominator N.
    pub variance: f64,
    pub max_count: u64,
}

impl SampleSummary {
    pub fn of(s: &FrequencySample) -> Self {
        SampleSummary {
            n: s.n(),
            n0: s.n0(),
            mean: s.mean(),
            variance: s.variance(),
            max_count: s.max_count(),
        }
    }
}

/// Named values serialized as a JSON object in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(pub Vec<(&'static str, f64)>);

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct ErrorBlock {
    pub kind: &'static str,
    pub message: String,
}

impl From<&EstimateError> for ErrorBlock {
    fn from(e: &EstimateError) -> Self {
        let kind = match e {
            EstimateError::AllZeros => "all_zeros",
            EstimateError::UnderDispersed { .. } => "under_dispersed",
            EstimateError::NoSignChange { .. } => "no_sign_change",
            EstimateError::OnlyOnes => "only_ones",
            EstimateError::Model(_) => "invalid_model",
        };
        ErrorBlock {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<&GofError> for ErrorBlock {
    fn from(e: &GofError) -> Self {
        let kind = match e {
            GofError::Degenerate { .. } => "too_few_bins",
            GofError::DfNotPositive { .. } => "no_degrees_of_freedom",
            GofError::ZeroExpected { .. } => "zero_expected",
            _ => "gof_failed",
        };
        ErrorBlock {
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct SolverBlock {
    pub initial_bracket: [f64; 2],
    pub bracket: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub bisection_steps: usize,
    pub roots_found: usize,
    pub k_moments: f64,
}

impl From<&SolverDiagnostics> for SolverBlock {
    fn from(d: &SolverDiagnostics) -> Self {
        SolverBlock {
            initial_bracket: [d.initial_bracket.0, d.initial_bracket.1],
            bracket: [d.bracket.0, d.bracket.1],
            residual: d.residual,
            iterations: d.iterations,
            newton_steps: d.newton_steps,
            bisection_steps: d.bisection_steps,
            roots_found: d.roots_found,
            k_moments: d.k_moments,
        }
    }
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct BinBlock {
    pub label: String,
    pub lo: u64,
    /// `null` for the open-ended tail bin.
    pub hi: Option<u64>,
    pub observed: u64,
    pub expected: f64,
}

impl From<&Bin> for BinBlock {
    fn from(b: &Bin) -> Self {
        BinBlock {
            label: b.label(),
            lo: b.lo,
            hi: b.hi,
            observed: b.observed,
            expected: b.expected,
        }
    }
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct GofBlock {
    pub chi2: f64,
    pub df: u32,
    pub p_value: f64,
    pub n_params: usize,
    pub pooling_threshold: f64,
    pub bins: Vec<BinBlock>,
}

impl From<&GofResult> for GofBlock {
    fn from(g: &GofResult) -> Self {
        GofBlock {
            chi2: g.chi2,
            df: g.df,
            p_value: g.p_value,
            n_params: g.n_params,
            pooling_threshold: g.pooling_threshold,
            bins: g.bins.iter().map(BinBlock::from).collect(),
        }
    }
}

/// One fitted (or failed) model. On failure only `family`, `status` and
/// `error` carry data; the other fields are `null`.
#[derive(Debug, Clone, DeriveSerialize)]
pub struct ModelBlock {
    pub family: String,
    pub status: &'static str,
    pub model: Option<String>,
    pub params: Option<Params>,
    pub n_params: Option<usize>,
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub method: Option<&'static str>,
    pub boundary: Option<bool>,
    pub solver: Option<SolverBlock>,
    pub gof: Option<GofBlock>,
    pub gof_error: Option<ErrorBlock>,
    pub error: Option<ErrorBlock>,
}

impl ModelBlock {
    pub fn fitted(family: &str, fit: &FitResult, gof: &Result<GofResult, GofError>) -> Self {
        let solver = match &fit.method {
            FitMethod::Numerical(d) => Some(SolverBlock::from(d)),
            _ => None,
        };
        ModelBlock {
            family: family.into(),
            status: "ok",
            model: Some(canonical(&fit.model)),
            params: Some(Params(fit.model.params())),
            n_params: Some(fit.n_params),
            loglik: Some(fit.loglik),
            aic: Some(fit.aic),
            method: Some(fit.method.name()),
            boundary: Some(fit.boundary),
            solver,
            gof: gof.as_ref().ok().map(GofBlock::from),
            gof_error: gof.as_ref().err().map(ErrorBlock::from),
            error: None,
        }
    }

    pub fn failed(family: &str, err: &EstimateError) -> Self {
        ModelBlock {
            family: family.into(),
            status: "error",
            model: None,
            params: None,
            n_params: None,
            loglik: None,
            aic: None,
            method: None,
            boundary: None,
            solver: None,
            gof: None,
            gof_error: None,
            error: Some(ErrorBlock::from(err)),
        }
    }
}

/// Output of `fit` and `compare`.
#[derive(Debug, Clone, DeriveSerialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub input: Input,
    pub sample: SampleSummary,
    pub pool_threshold: f64,
    pub models: Vec<ModelBlock>,
    pub best_aic_model: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, DeriveSerialize)]
pub struct MethodBlock {
    pub method: &'static str,
    pub failures: usize,
    pub mean_estimate: Vec<f64>,
    pub mean_abs_error: Vec<f64>,
    /// One entry per replicate; `null` where the estimator failed.
    pub estimates: Vec<Option<Vec<f64>>>,
}

/// Output of `recover`.
#[derive(Debug, Clone, DeriveSerialize)]
pub struct RecoveryDocument {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: &'static str,
    pub model: String,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub param_names: Vec<&'static str>,
    pub true_params: Vec<f64>,
    pub methods: Vec<MethodBlock>,
    pub solver_failures: usize,
    pub notes: Vec<String>,
}

impl RecoveryDocument {
    pub fn new(r: &RecoveryReport) -> Self {
        let mut notes = Vec::new();
        if r.methods.is_empty() {
            notes.push(format!(
                "no estimator is available for {}; only sampling was exercised",
                r.true_model.family_name()
            ));
        }
        RecoveryDocument {
            schema_version: SCHEMA_VERSION,
            tool: Tool::current(),
            command: "recover",
            model: canonical(&r.true_model),
            n: r.n,
            replicates: r.replicates,
            seed: r.seed,
            param_names: r.param_names.clone(),
            true_params: r.true_params.clone(),
            methods: r
                .methods
                .iter()
                .map(|m| MethodBlock {
                    method: m.method,
                    failures: m.failures,
                    mean_estimate: m.mean_estimate.clone(),
                    mean_abs_error: m.mean_abs_error.clone(),
                    estimates: m.estimates.clone(),
                })
                .collect(),
            solver_failures: r.solver_failures,
            notes,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report types serialize infallibly");
    s.push('\n');
    s
}
