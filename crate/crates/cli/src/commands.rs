//! Command implementations. Each returns the text to write; main decides
//! where it goes.

use countfit_core::gof::{compare_models, CompareError};
use countfit_core::sim::{recovery_experiment, sample_histogram};
use countfit_core::{Family, FrequencySample};

use crate::error::CliError;
use crate::figure;
use crate::freqfile::{self, FrequencyFile};
use crate::modelspec::ModelSpec;
use crate::report::{
    to_json, Input, ModelBlock, RecoveryDocument, ReportDocument, SampleSummary, Tool,
    SCHEMA_VERSION,
};

/// Output text plus an error to report after it is written. Estimator
/// failures still produce a document carrying the error block.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub error: Option<CliError>,
}

/// Removes repeated families, keeping the first occurrence.
pub fn dedup_families(families: &[Family]) -> Vec<Family> {
    let mut out: Vec<Family> = Vec::with_capacity(families.len());
    for &f in families {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

fn report(
    command: &'static str,
    file: &FrequencyFile,
    families: &[Family],
    threshold: f64,
) -> Output {
    let s = &file.sample;
    let families = dedup_families(families);
    let mut notes = Vec::new();
    let (models, best, error) = match compare_models(s, &families, threshold) {
        Ok(r) => {
            let models: Vec<ModelBlock> = r
                .entries
                .iter()
                .map(|e| match &e.outcome {
                    Ok(f) => ModelBlock::fitted(e.family.name(), &f.fit, &f.gof),
                    Err(err) => ModelBlock::failed(e.family.name(), err),
                })
                .collect();
            for e in &r.entries {
                if let Ok(f) = &e.outcome {
                    if f.fit.boundary {
                        notes.push(format!(
                            "{}: no zeros observed; the estimate lies on the boundary of the parameter space",
                            e.family
                        ));
                    }
                }
            }
            if r.zig_hg_equivalent {
                notes.push(
                    "zig and hg reach the same maximum likelihood and AIC: the two fits are reparametrizations of one model"
                        .into(),
                );
            }
            (models, Some(r.best_aic.name().to_string()), None)
        }
        Err(CompareError::AllFailed(errs)) => {
            let models = errs
                .iter()
                .map(|(fam, err)| ModelBlock::failed(fam.name(), err))
                .collect();
            let (fam, err) = errs
                .into_iter()
                .next()
                .expect("at least one family was fitted");
            let error = CliError::Estimate {
                family: fam.name().into(),
                source: err,
            };
            (models, None, Some(error))
        }
        Err(CompareError::NoFamilies) => unreachable!("argument parsing requires a family"),
    };
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION,
        tool: Tool::current(),
        command,
        input: Input {
            sha256: file.sha256.clone(),
        },
        sample: SampleSummary::of(s),
        pool_threshold: threshold,
        models,
        best_aic_model: best,
        notes,
    };
    Output {
        text: to_json(&doc),
        error,
    }
}

pub fn fit(file: &FrequencyFile, family: Family, threshold: f64) -> Output {
    report("fit", file, &[family], threshold)
}

/// Fails (with a document) only when every family fails.
pub fn compare(file: &FrequencyFile, families: &[Family], threshold: f64) -> Output {
    report("compare", file, families, threshold)
}

pub fn figure(file: &FrequencyFile, families: &[Family]) -> Result<String, CliError> {
    let s: &FrequencySample = &file.sample;
    let mut models = Vec::new();
    for fam in dedup_families(families) {
        let fit = fam.fit(s).map_err(|source| CliError::Estimate {
            family: fam.name().into(),
            source,
        })?;
        models.push((fam.name().to_string(), fit.model));
    }
    Ok(figure::render(s, &models).expect("fitted models are valid"))
}

pub fn simulate(spec: &ModelSpec, n: usize, seed: u64) -> String {
    let s = sample_histogram(&spec.model, n, seed).expect("spec models are validated");
    freqfile::render(&s)
}

pub fn recover(spec: &ModelSpec, n: usize, reps: usize, seed: u64) -> String {
    let r = recovery_experiment(&spec.model, n, reps, seed).expect("spec models are validated");
    to_json(&RecoveryDocument::new(&r))
}
