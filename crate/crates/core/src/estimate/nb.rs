//! Negative binomial estimation.
//!
//! With `p = k / (m + k)` substituted from the first likelihood equation the
//! shape `k` solves
//!
//! ```text
//! S(k) = Σ_i ψ(y_i + k) − N ψ(k) + N ln(k / (m + k)) = 0
//! ```
//!
//! `S` is positive as `k → 0` and, for an over-dispersed sample, behaves like
//! `N (m − s²) / (2k²) < 0` as `k → ∞`. The solver brackets a sign change
//! starting from the method-of-moments shape, scans the bracket on a log grid
//! for every downward crossing, polishes each with Newton steps (derivative
//! from trigamma) guarded by bisection, and keeps the root with the largest
//! profile log-likelihood.

use alloc::vec::Vec;

use super::{digamma_diff, require_nonzero, EstimateError, FitMethod, FitResult, FrequencySample};
use crate::dist::{ln_nb_coefficient, CountModel};
use crate::math::{exp, ln, ln_1p, sqrt, KahanSum};
use crate::specfn::trigamma_pos;

const K_FLOOR: f64 = 1e-8;
const K_CAP: f64 = 1e8;
const SCAN_POINTS: usize = 64;
const MAX_ITER: usize = 200;
/// Newton iterations stop once |S(k)| falls below this multiple of N.
const RESIDUAL_TOL: f64 = 1e-12;

/// What the negative binomial solver did.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    /// Bracket after expansion, before the scan.
    pub initial_bracket: (f64, f64),
    /// Final bracket around the returned root.
    pub bracket: (f64, f64),
    /// Score at the returned root.
    pub residual: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub bisection_steps: usize,
    /// Downward sign changes found by the scan.
    pub roots_found: usize,
    /// Method-of-moments shape used to seed the bracket.
    pub k_moments: f64,
}

/// ψ′(y + k) − ψ′(k).
fn trigamma_diff(y: u64, k: f64) -> f64 {
    if y <= 256 {
        -(0..y)
            .map(|i| {
                let t = k + i as f64;
                1.0 / (t * t)
            })
            .sum::<f64>()
    } else {
        trigamma_pos(y as f64 + k) - trigamma_pos(k)
    }
}

/// Profile score S(k) of the negative binomial shape.
pub fn nb_score(s: &FrequencySample, k: f64) -> f64 {
    let n = s.n() as f64;
    let mut acc = KahanSum::default();
    for (y, f) in s.nonzero() {
        acc.add(f as f64 * digamma_diff(y, k));
    }
    acc.add(-n * ln_1p(s.mean() / k));
    acc.value()
}

fn nb_score_derivative(s: &FrequencySample, k: f64) -> f64 {
    let n = s.n() as f64;
    let m = s.mean();
    let sum: f64 = s
        .nonzero()
        .map(|(y, f)| f as f64 * trigamma_diff(y, k))
        .sum();
    sum + n * m / (k * (m + k))
}

/// Log-likelihood at shape `k` with `p = k / (m + k)`.
pub fn nb_profile_loglik(s: &FrequencySample, k: f64) -> f64 {
    let n = s.n() as f64;
    let m = s.mean();
    let mut acc = KahanSum::default();
    for (y, f) in s.nonzero() {
        acc.add(f as f64 * ln_nb_coefficient(y, k));
    }
    acc.add(-n * k * ln_1p(m / k));
    acc.add(s.total() as f64 * ln(m / (m + k)));
    acc.value()
}

/// Method-of-moments negative binomial: `k̂ = m² / (s² − m)`, `p̂ = m / s²`.
pub fn mom_nb(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    let k = moments_shape(s)?;
    let model = CountModel::negative_binomial(s.mean() / s.variance(), k)?;
    FitResult::new(model, s, FitMethod::Moments, false)
}

fn moments_shape(s: &FrequencySample) -> Result<f64, EstimateError> {
    require_nonzero(s)?;
    let (m, s2) = (s.mean(), s.variance());
    if s2 <= m {
        return Err(EstimateError::UnderDispersed {
            mean: m,
            variance: s2,
        });
    }
    Ok(m * m / (s2 - m))
}

struct Root {
    k: f64,
    residual: f64,
    bracket: (f64, f64),
    iterations: usize,
    newton_steps: usize,
    bisection_steps: usize,
}

/// Safeguarded Newton on `[lo, hi]` with `S(lo) > 0 > S(hi)`.
fn polish(s: &FrequencySample, mut lo: f64, mut hi: f64) -> Root {
    let tol = RESIDUAL_TOL * s.n() as f64;
    let mut x = sqrt(lo * hi);
    let mut root = Root {
        k: x,
        residual: f64::NAN,
        bracket: (lo, hi),
        iterations: 0,
        newton_steps: 0,
        bisection_steps: 0,
    };
    for it in 1..=MAX_ITER {
        let fx = nb_score(s, x);
        root.iterations = it;
        root.k = x;
        root.residual = fx;
        if fx == 0.0 || fx.abs() <= tol {
            break;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        root.bracket = (lo, hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let d = nb_score_derivative(s, x);
        let step = x - fx / d;
        x = if d < 0.0 && step > lo && step < hi {
            root.newton_steps += 1;
            step
        } else {
            root.bisection_steps += 1;
            if hi > 2.0 * lo {
                sqrt(lo * hi)
            } else {
                0.5 * (lo + hi)
            }
        };
    }
    root
}

/// Negative binomial maximum likelihood fit.
///
/// Fails with [`EstimateError::UnderDispersed`] when `s² ≤ m` and with
/// [`EstimateError::NoSignChange`] when the score keeps its sign up to
/// `k = 1e8`; the cap is never returned as an estimate.
pub fn mle_nb(s: &FrequencySample) -> Result<FitResult, EstimateError> {
    let k_mom = moments_shape(s)?;
    let mut lo = (k_mom / 10.0).clamp(K_FLOOR, K_CAP);
    let mut hi = (k_mom * 10.0).min(K_CAP);
    while nb_score(s, lo) <= 0.0 {
        if lo <= K_FLOOR {
            return Err(EstimateError::NoSignChange { k_lo: lo, k_hi: hi });
        }
        lo = (lo / 10.0).max(K_FLOOR);
    }
    while nb_score(s, hi) >= 0.0 {
        if hi >= K_CAP {
            return Err(EstimateError::NoSignChange { k_lo: lo, k_hi: hi });
        }
        hi = (hi * 10.0).min(K_CAP);
    }
    let initial_bracket = (lo, hi);

    // Log-spaced scan for every + → − crossing (local maxima of the
    // profile likelihood).
    let ratio = ln(hi / lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| match i {
            0 => lo,
            i if i == SCAN_POINTS - 1 => hi,
            i => lo * exp(ratio * i as f64),
        })
        .collect();
    let scores: Vec<f64> = grid.iter().map(|&k| nb_score(s, k)).collect();
    let brackets: Vec<(f64, f64)> = grid
        .windows(2)
        .zip(scores.windows(2))
        .filter(|(_, sc)| sc[0] > 0.0 && sc[1] <= 0.0)
        .map(|(g, _)| (g[0], g[1]))
        .collect();

    let mut best: Option<(Root, f64)> = None;
    for &(a, b) in &brackets {
        let root = polish(s, a, b);
        let ll = nb_profile_loglik(s, root.k);
        if best.as_ref().is_none_or(|(_, best_ll)| ll > *best_ll) {
            best = Some((root, ll));
        }
    }
    let (root, _) = best.ok_or(EstimateError::NoSignChange { k_lo: lo, k_hi: hi })?;

    let k = root.k;
    let model = CountModel::negative_binomial(k / (s.mean() + k), k)?;
    let diagnostics = SolverDiagnostics {
        initial_bracket,
        bracket: root.bracket,
        residual: root.residual,
        iterations: root.iterations,
        newton_steps: root.newton_steps,
        bisection_steps: root.bisection_steps,
        roots_found: brackets.len(),
        k_moments: k_mom,
    };
    FitResult::new(model, s, FitMethod::Numerical(diagnostics), false)
}
