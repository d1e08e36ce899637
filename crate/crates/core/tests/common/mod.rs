#![allow(dead_code)]

use countfit_core::dist::{make_hurdle, make_zero_inflated, zero_inflation_bounds};
use countfit_core::estimate::mle_zig;
use countfit_core::sim::{rng_for, sample_histogram};
use countfit_core::{BaseModel, CountModel, FrequencySample};
use rand::Rng;

/// Random base with a tail light enough that summing to `TAIL_LIMIT` leaves
/// less than 1e-13 of the mass.
pub fn random_base<R: Rng>(rng: &mut R) -> BaseModel {
    match rng.random_range(0..3) {
        0 => BaseModel::Poisson {
            mean: rng.random_range(0.05..20.0),
        },
        1 => BaseModel::Geometric {
            p: rng.random_range(0.05..0.99),
        },
        _ => BaseModel::NegBinomial {
            p: rng.random_range(0.1..0.95),
            k: rng.random_range(0.1..10.0),
        },
    }
}

pub const TAIL_LIMIT: u64 = 4000;

/// Random plain, zero-inflated (possibly deflated) or hurdle model.
pub fn random_model<R: Rng>(rng: &mut R) -> CountModel {
    let base = random_base(rng);
    match rng.random_range(0..3) {
        0 => CountModel::Base(base),
        1 => {
            let (lo, _) = zero_inflation_bounds(&base);
            let pi = rng.random_range(lo.max(-2.0)..0.95);
            make_zero_inflated(CountModel::Base(base), pi).unwrap()
        }
        _ => make_hurdle(CountModel::Base(base), rng.random_range(0.0..0.95)).unwrap(),
    }
}

/// `count` samples from random zero-inflated geometric models, each of size
/// at most `max_n`, all admitting a closed-form fit.
pub fn random_zig_samples(count: usize, max_n: usize, seed: u64) -> Vec<FrequencySample> {
    let mut rng = rng_for(seed, 1 << 32);
    let mut out = Vec::with_capacity(count);
    let mut draw = 0u64;
    while out.len() < count {
        draw += 1;
        let p = rng.random_range(0.1..0.9);
        let lo: f64 = -p / (1.0 - p);
        let pi = rng.random_range(lo.max(-0.5)..0.8);
        let n = rng.random_range(20..=max_n);
        let model = make_zero_inflated(CountModel::geometric(p).unwrap(), pi).unwrap();
        let s = sample_histogram(&model, n, seed ^ draw).unwrap();
        if mle_zig(&s).is_ok() {
            out.push(s);
        }
    }
    out
}

/// Sample with the given size, zero count and total, laid out as ones plus
/// one large count.
pub fn synthetic_sample(n: u64, n0: u64, total: u64) -> FrequencySample {
    let positives = n - n0;
    assert!(positives >= 1 && total > positives);
    let mut rows = vec![(0i64, n0 as i64), (1, positives as i64 - 1)];
    rows.push(((total - (positives - 1)) as i64, 1));
    FrequencySample::from_histogram(rows).unwrap()
}
