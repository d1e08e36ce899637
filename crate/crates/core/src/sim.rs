//! Simulation: seeded sampling from every [`CountModel`], a brute-force grid
//! oracle for the closed-form estimators, and parameter-recovery experiments.
//!
//! # Random streams
//!
//! All randomness comes from [`ChaCha8Rng`] (the ChaCha stream cipher with 8
//! rounds, as implemented by `rand_chacha`). A generator is seeded with
//! `seed_from_u64(seed)` and then switched to a 64-bit stream id with
//! `set_stream`. [`sample`] uses stream 0; replicate `r` of a recovery
//! experiment uses stream `r + 1`. ChaCha output is defined bit-for-bit, so a
//! given `(model, n, seed)` yields the same sample on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::dist::{BaseModel, CountModel, ModelError};
use crate::estimate::{
    mle_geometric, mle_hg, mle_nb, mle_poisson, mle_zig, mom_nb, EstimateError, FitResult,
    FrequencySample,
};
use crate::math::{floor, ln, ln_1p};

/// Probability mass left out of inverse-CDF lookup tables.
const TABLE_TAIL_MASS: f64 = 1e-12;
/// Lookup tables stop growing past this many entries.
const TABLE_MAX_LEN: usize = 1 << 24;
/// Truncated-at-zero bases are sampled by rejection while P(0) is at most
/// this; above it a lookup table is cheaper.
const REJECTION_MAX_P0: f64 = 0.9;

/// Generator for `seed`, positioned on stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on (0, 1].
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn draw_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    floor(ln(open_unit(rng)) / ln_1p(-p)) as u64
}

fn draw_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(d) => d.sample(rng) as u64,
        // beyond rand_distr's range; the relative spread is negligible there
        Err(_) => lambda as u64,
    }
}

fn draw_base<R: Rng + ?Sized>(base: &BaseModel, rng: &mut R) -> u64 {
    match *base {
        BaseModel::Poisson { mean } => draw_poisson(mean, rng),
        BaseModel::Geometric { p } => draw_geometric(p, rng),
        BaseModel::NegBinomial { p, k } => {
            if p >= 1.0 {
                return 0;
            }
            // gamma-Poisson mixture: λ ~ Gamma(k, q/p), Y | λ ~ Poisson(λ)
            let gamma = Gamma::new(k, (1.0 - p) / p).expect("validated NB parameters");
            draw_poisson(gamma.sample(rng), rng)
        }
    }
}

/// Inverse-CDF lookup over a finite table of probabilities for `offset..`.
#[derive(Debug, Clone)]
struct CdfTable {
    offset: u64,
    cdf: Vec<f64>,
}

impl CdfTable {
    /// Tabulates `pmf(offset), pmf(offset + 1), …` until the remaining mass
    /// (relative to `total`) drops below the tail cap.
    fn build(offset: u64, total: f64, pmf: impl Fn(u64) -> f64) -> Self {
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        let mut y = offset;
        while acc < total * (1.0 - TABLE_TAIL_MASS) && cdf.len() < TABLE_MAX_LEN {
            acc += pmf(y);
            cdf.push(acc);
            y += 1;
        }
        CdfTable { offset, cdf }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().expect("table is never empty");
        let u = rng.random::<f64>() * total;
        let idx = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        self.offset + idx as u64
    }
}

/// Prepared sampler for one model.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Base(BaseModel),
    /// Two-stage mixture: zero with probability π, else the base.
    Mixture {
        pi: f64,
        base: BaseModel,
    },
    /// Zero with probability π, else `1 + Geometric(p)` (memorylessness).
    HurdleGeometric {
        pi: f64,
        p: f64,
    },
    /// Zero with probability π, else the base redrawn until nonzero.
    HurdleRejection {
        pi: f64,
        base: BaseModel,
    },
    HurdleTable {
        pi: f64,
        table: CdfTable,
    },
    Table(CdfTable),
}

impl Sampler {
    pub fn new(model: &CountModel) -> Result<Self, ModelError> {
        model.validate()?;
        let kind = match *model {
            CountModel::Base(b) => SamplerKind::Base(b),
            CountModel::ZeroInflated { pi, base } if pi >= 0.0 => SamplerKind::Mixture { pi, base },
            // Negative weights have no mixture reading; tabulate the pmf.
            CountModel::ZeroInflated { .. } => {
                let m = *model;
                SamplerKind::Table(CdfTable::build(0, 1.0, |y| m.pmf_unchecked(y)))
            }
            CountModel::Hurdle {
                pi,
                base: BaseModel::Geometric { p },
            } => SamplerKind::HurdleGeometric { pi, p },
            CountModel::Hurdle { pi, base } if base.p0() <= REJECTION_MAX_P0 => {
                SamplerKind::HurdleRejection { pi, base }
            }
            CountModel::Hurdle { pi, base } => {
                let mass = 1.0 - base.p0();
                SamplerKind::HurdleTable {
                    pi,
                    table: CdfTable::build(1, mass, |y| base.pmf(y)),
                }
            }
        };
        Ok(Sampler { kind })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.kind {
            SamplerKind::Base(b) => draw_base(b, rng),
            SamplerKind::Mixture { pi, base } => {
                if rng.random::<f64>() < *pi {
                    0
                } else {
                    draw_base(base, rng)
                }
            }
            SamplerKind::HurdleGeometric { pi, p } => {
                if rng.random::<f64>() < *pi {
                    0
                } else {
                    1 + draw_geometric(*p, rng)
                }
            }
            SamplerKind::HurdleRejection { pi, base } => {
                if rng.random::<f64>() < *pi {
                    return 0;
                }
                loop {
                    let y = draw_base(base, rng);
                    if y != 0 {
                        return y;
                    }
                }
            }
            SamplerKind::HurdleTable { pi, table } => {
                if rng.random::<f64>() < *pi {
                    0
                } else {
                    table.draw(rng)
                }
            }
            SamplerKind::Table(t) => t.draw(rng),
        }
    }
}

/// Draws `n` observations from `model` using stream 0 of `seed`.
pub fn sample(model: &CountModel, n: usize, seed: u64) -> Result<Vec<u64>, ModelError> {
    let sampler = Sampler::new(model)?;
    let mut rng = rng_for(seed, 0);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

/// Draws `n` observations and summarises them.
pub fn sample_histogram(
    model: &CountModel,
    n: usize,
    seed: u64,
) -> Result<FrequencySample, ModelError> {
    let draws = sample(model, n, seed)?;
    Ok(histogram(&draws))
}

fn histogram(draws: &[u64]) -> FrequencySample {
    let mut freq = alloc::collections::BTreeMap::new();
    for &y in draws {
        *freq.entry(y).or_insert(0u64) += 1;
    }
    FrequencySample::from_map(freq).expect("nonempty sample")
}

/// Families the grid oracle can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleFamily {
    Zig,
    Hg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub pi: f64,
    pub p: f64,
    pub loglik: f64,
}

/// Exhaustive lattice search for the zero-inflated or hurdle geometric
/// maximum likelihood estimate.
///
/// The lattice is `p = j / r` for `j = 1..r` and `π = lo + (1 − lo) i / r`
/// for `i = 0..r`, with `lo = −1` (ZIG, admitting zero deflation) or `lo = 0`
/// (hurdle). Lattices at `r` and `2r` are nested, so refining never lowers the
/// result. The log-likelihood is evaluated from the sufficient statistics
/// `(N, N₀, Σy)` rather than the per-count pmf. `resolution` is raised to 100
/// if smaller.
pub fn grid_oracle(s: &FrequencySample, family: OracleFamily, resolution: usize) -> OraclePoint {
    let res = resolution.max(100);
    let n = s.n() as f64;
    let n0 = s.n0() as f64;
    let positives = n - n0;
    let total = s.total() as f64;
    let lo = match family {
        OracleFamily::Zig => -1.0,
        OracleFamily::Hg => 0.0,
    };
    let pis: Vec<(f64, f64)> = (0..res)
        .map(|i| {
            let pi = lo + (1.0 - lo) * (i as f64 / res as f64);
            (pi, positives * ln(1.0 - pi))
        })
        .collect();

    let mut best = OraclePoint {
        pi: f64::NAN,
        p: f64::NAN,
        loglik: f64::NEG_INFINITY,
    };
    for j in 1..res {
        let p = j as f64 / res as f64;
        let q = 1.0 - p;
        let nonzero = match family {
            OracleFamily::Zig => positives * ln(p) + total * ln(q),
            // p(y) / (1 − p₀) = p q^(y−1)
            OracleFamily::Hg => positives * ln(p) + (total - positives) * ln(q),
        };
        for &(pi, ln_pos) in &pis {
            let zero = match family {
                OracleFamily::Zig => {
                    let z = pi + (1.0 - pi) * p;
                    if z < 0.0 {
                        continue;
                    }
                    if n0 > 0.0 {
                        n0 * ln(z)
                    } else {
                        0.0
                    }
                }
                OracleFamily::Hg => {
                    if n0 > 0.0 {
                        n0 * ln(pi)
                    } else {
                        0.0
                    }
                }
            };
            let ll = zero + ln_pos + nonzero;
            if ll > best.loglik {
                best = OraclePoint { pi, p, loglik: ll };
            }
        }
    }
    best
}

/// Estimates from one estimator across replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRecovery {
    pub method: &'static str,
    /// Estimate per replicate; `None` where the estimator failed.
    pub estimates: Vec<Option<Vec<f64>>>,
    /// Mean estimate over successful replicates.
    pub mean_estimate: Vec<f64>,
    /// Mean of `|estimate − true|` over successful replicates, per parameter.
    pub mean_abs_error: Vec<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub true_model: CountModel,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub param_names: Vec<&'static str>,
    pub true_params: Vec<f64>,
    pub methods: Vec<MethodRecovery>,
    /// Replicates where the numerical negative binomial solver failed.
    pub solver_failures: usize,
}

type Estimator = fn(&FrequencySample) -> Result<FitResult, EstimateError>;

/// Parameter vector compared in recovery experiments: `[π, p]` for ZIG/HG,
/// `[m, k]` for NB, `[p]` for the geometric, `[m]` for the Poisson.
fn recovery_params(model: &CountModel) -> Option<(Vec<&'static str>, Vec<f64>)> {
    use alloc::vec;
    Some(match *model {
        CountModel::Base(BaseModel::Poisson { mean }) => (vec!["m"], vec![mean]),
        CountModel::Base(BaseModel::Geometric { p }) => (vec!["p"], vec![p]),
        CountModel::Base(b @ BaseModel::NegBinomial { k, .. }) => {
            (vec!["m", "k"], vec![b.mean(), k])
        }
        CountModel::ZeroInflated {
            pi,
            base: BaseModel::Geometric { p },
        }
        | CountModel::Hurdle {
            pi,
            base: BaseModel::Geometric { p },
        } => (vec!["pi", "p"], vec![pi, p]),
        _ => return None,
    })
}

fn estimators_for(model: &CountModel) -> Vec<(&'static str, Estimator)> {
    let list: &[(&'static str, Estimator)] = match model.family_name() {
        "zig" => &[("mle_zig", mle_zig)],
        "hg" => &[("mle_hg", mle_hg)],
        "nb" => &[("mle_nb", mle_nb), ("mom_nb", mom_nb)],
        "geom" => &[("mle_geometric", mle_geometric)],
        "poisson" => &[("mle_poisson", mle_poisson)],
        _ => &[],
    };
    list.to_vec()
}

/// Simulates `replicates` samples of size `n` from `true_model` and fits each
/// with every applicable estimator. Estimator failures are counted, not
/// propagated. Models without an estimator (e.g. a zero-inflated Poisson)
/// yield a report with no methods.
pub fn recovery_experiment(
    true_model: &CountModel,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<RecoveryReport, ModelError> {
    let sampler = Sampler::new(true_model)?;
    let (param_names, true_params) = recovery_params(true_model).unwrap_or_default();
    let estimators = estimators_for(true_model);
    let mut methods: Vec<MethodRecovery> = estimators
        .iter()
        .map(|(name, _)| MethodRecovery {
            method: name,
            estimates: Vec::with_capacity(replicates),
            mean_estimate: alloc::vec![0.0; true_params.len()],
            mean_abs_error: alloc::vec![0.0; true_params.len()],
            failures: 0,
        })
        .collect();
    let mut solver_failures = 0;

    for rep in 0..replicates {
        let mut rng = rng_for(seed, rep as u64 + 1);
        let draws: Vec<u64> = (0..n).map(|_| sampler.draw(&mut rng)).collect();
        let sample = if draws.is_empty() {
            None
        } else {
            Some(histogram(&draws))
        };
        for ((name, estimator), rec) in estimators.iter().zip(methods.iter_mut()) {
            let fitted = sample
                .as_ref()
                .and_then(|s| estimator(s).ok())
                .and_then(|fit| recovery_params(&fit.model).map(|(_, v)| v));
            if fitted.is_none() {
                rec.failures += 1;
                if *name == "mle_nb" {
                    solver_failures += 1;
                }
            }
            rec.estimates.push(fitted);
        }
    }

    for rec in &mut methods {
        let ok: Vec<&Vec<f64>> = rec.estimates.iter().flatten().collect();
        if ok.is_empty() {
            rec.mean_estimate.fill(f64::NAN);
            rec.mean_abs_error.fill(f64::NAN);
            continue;
        }
        let count = ok.len() as f64;
        for (i, truth) in true_params.iter().enumerate() {
            rec.mean_estimate[i] = ok.iter().map(|e| e[i]).sum::<f64>() / count;
            rec.mean_abs_error[i] = ok.iter().map(|e| (e[i] - truth).abs()).sum::<f64>() / count;
        }
    }

    Ok(RecoveryReport {
        true_model: *true_model,
        n,
        replicates,
        seed,
        param_names,
        true_params,
        methods,
        solver_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_hurdle, make_zero_inflated};
    use crate::math::sqrt;

    fn geo(p: f64) -> CountModel {
        CountModel::geometric(p).unwrap()
    }

    #[test]
    fn degenerate_models_sample_zero() {
        assert!(sample(&geo(1.0), 50, 3).unwrap().iter().all(|&y| y == 0));
        let h = make_hurdle(geo(0.5), 1.0).unwrap();
        assert!(sample(&h, 100, 3).unwrap().iter().all(|&y| y == 0));
        let zi = make_zero_inflated(geo(0.5), 1.0).unwrap();
        assert!(sample(&zi, 100, 3).unwrap().iter().all(|&y| y == 0));
    }

    #[test]
    fn deterministic_given_seed() {
        let m = CountModel::negative_binomial_mean(2.5, 0.6).unwrap();
        assert_eq!(sample(&m, 500, 11).unwrap(), sample(&m, 500, 11).unwrap());
        assert_ne!(sample(&m, 500, 11).unwrap(), sample(&m, 500, 12).unwrap());
    }

    #[test]
    fn zig_sample_mean_within_three_standard_errors() {
        let m = make_zero_inflated(geo(0.4), 0.3).unwrap();
        let mo = m.moments().unwrap();
        assert!((mo.mean - 1.05).abs() < 1e-12);
        let n = 1_000_000;
        let s = sample_histogram(&m, n, 2024).unwrap();
        let se = sqrt(mo.variance / n as f64);
        assert!(
            (s.mean() - mo.mean).abs() < 3.0 * se,
            "{} vs {}",
            s.mean(),
            mo.mean
        );
    }

    #[test]
    fn zero_deflated_sampling_is_observable() {
        let m = make_zero_inflated(geo(0.4), -0.4).unwrap();
        let s = sample_histogram(&m, 200_000, 5).unwrap();
        let frac0 = s.n0() as f64 / s.n() as f64;
        assert!(frac0 < 0.4);
        assert!((frac0 - m.pmf(0).unwrap()).abs() < 4.0 / sqrt(200_000.0));
    }

    #[test]
    fn hurdle_over_poisson_and_nb() {
        for base in [
            CountModel::poisson(0.05).unwrap(),
            CountModel::poisson(3.0).unwrap(),
            CountModel::negative_binomial(0.97, 0.5).unwrap(),
        ] {
            let h = make_hurdle(base, 0.3).unwrap();
            let s = sample_histogram(&h, 100_000, 9).unwrap();
            for y in 0..5 {
                let want = h.pmf(y).unwrap();
                let got = s.frequency(y) as f64 / s.n() as f64;
                assert!((got - want).abs() < 4.0 / sqrt(100_000.0), "{h:?} y={y}");
            }
        }
    }

    #[test]
    fn oracle_finds_pure_geometric() {
        // closed form gives π̂ = 0, p̂ = 0.5
        let s =
            FrequencySample::from_histogram([(0, 50), (1, 24), (2, 12), (3, 8), (4, 5), (8, 1)])
                .unwrap();
        let o = grid_oracle(&s, OracleFamily::Zig, 200);
        assert!(
            o.pi.abs() <= 0.01 + 1e-12 && (o.p - 0.5).abs() <= 0.005 + 1e-12,
            "{o:?}"
        );
    }

    #[test]
    fn oracle_refinement_never_loses() {
        let s = sample_histogram(&make_zero_inflated(geo(0.3), 0.25).unwrap(), 300, 1).unwrap();
        for fam in [OracleFamily::Zig, OracleFamily::Hg] {
            let a = grid_oracle(&s, fam, 100);
            let b = grid_oracle(&s, fam, 200);
            assert!(b.loglik >= a.loglik);
        }
    }

    #[test]
    fn recovery_small_samples_complete() {
        let m = CountModel::negative_binomial_mean(2.8235, 0.424).unwrap();
        let r = recovery_experiment(&m, 10, 30, 7).unwrap();
        assert_eq!(r.methods.len(), 2);
        assert_eq!(r.methods[0].estimates.len(), 30);
        assert_eq!(r.solver_failures, r.methods[0].failures);
        assert_eq!(r.param_names, alloc::vec!["m", "k"]);
    }

    #[test]
    fn recovery_without_estimator() {
        let m = make_zero_inflated(CountModel::poisson(2.0).unwrap(), 0.2).unwrap();
        let r = recovery_experiment(&m, 50, 2, 1).unwrap();
        assert!(r.methods.is_empty());
    }
}
