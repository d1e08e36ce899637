mod common;

use countfit_core::dist::make_zero_inflated;
use countfit_core::estimate::mle_zig;
use countfit_core::gof::{
    chi2_statistic, compare_models, count_bins, expected_counts, gof_test, pool_tail, Bin,
    DEFAULT_POOL_THRESHOLD,
};
use countfit_core::sim::{rng_for, sample_histogram};
use countfit_core::specfn::chi2_survival;
use countfit_core::{CountModel, Family};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pooling_conserves_totals(seed in any::<u64>(), n in 50usize..5000, threshold in 0.5f64..8.0) {
        let mut rng = rng_for(seed, 0);
        let truth = common::random_model(&mut rng);
        let s = sample_histogram(&truth, n, seed).unwrap();
        let model = common::random_model(&mut rng);
        let max = s.max_count();
        let expected = expected_counts(&model, s.n(), max).unwrap();
        let mut observed: Vec<u64> = (0..=max).map(|y| s.frequency(y)).collect();
        observed.push(0);
        let raw: f64 = expected.iter().sum();
        prop_assert!((raw - n as f64).abs() <= 1e-9 * n as f64);
        if let Ok(bins) = pool_tail(count_bins(&observed, &expected).unwrap(), threshold) {
            let pooled: f64 = bins.iter().map(|b| b.expected).sum();
            prop_assert!((pooled - raw).abs() <= 1e-12 * raw);
            prop_assert_eq!(bins.iter().map(|b| b.observed).sum::<u64>(), s.n());
        }
    }

    #[test]
    fn gof_result_is_consistent(seed in any::<u64>(), n in 200usize..5000) {
        let mut rng = rng_for(seed, 0);
        let truth = common::random_model(&mut rng);
        let s = sample_histogram(&truth, n, seed).unwrap();
        if let Ok(r) = gof_test(&truth, &s, 2, DEFAULT_POOL_THRESHOLD) {
            prop_assert_eq!(r.df as usize, r.bins.len() - 1 - r.n_params);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            prop_assert_eq!(r.p_value.to_bits(), chi2_survival(r.chi2, r.df).unwrap().to_bits());
            let total: f64 = r.bins.iter().map(|b| b.expected).sum();
            prop_assert!((total - n as f64).abs() <= 1e-9 * n as f64);
        }
    }
}

fn bin(lo: u64, hi: Option<u64>, observed: u64, expected: f64) -> Bin {
    Bin {
        lo,
        hi,
        observed,
        expected,
    }
}

#[test]
fn chi2_matches_direct_accumulation() {
    let model = make_zero_inflated(CountModel::geometric(0.35).unwrap(), 0.25).unwrap();
    let observed = [412u64, 151, 110, 82, 60, 38, 27, 20, 11, 8, 5, 3, 0];
    let n: u64 = observed.iter().sum();
    let expected = expected_counts(&model, n, observed.len() as u64 - 2).unwrap();
    let bins = count_bins(&observed, &expected).unwrap();
    let got = chi2_statistic(&bins).unwrap();
    let mut want = 0.0;
    for (y, &o) in observed.iter().enumerate() {
        let e = if y + 1 == observed.len() {
            n as f64 - expected[..y].iter().sum::<f64>()
        } else {
            let pmf = if y == 0 {
                0.25 + 0.75 * 0.35
            } else {
                0.75 * 0.35 * 0.65f64.powi(y as i32)
            };
            n as f64 * pmf
        };
        want += (o as f64 - e).powi(2) / e;
    }
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
}

#[test]
fn pooling_proportional_cells_never_raises_chi2() {
    // the pooled cells share observed/expected ratio 2
    let bins = vec![
        bin(0, Some(0), 50, 48.0),
        bin(1, Some(1), 30, 34.0),
        bin(2, Some(2), 12, 12.0),
        bin(3, Some(3), 2, 1.0),
        bin(4, None, 1, 0.5),
    ];
    let before = chi2_statistic(&bins).unwrap();
    let after = chi2_statistic(&pool_tail(bins, 2.0).unwrap()).unwrap();
    assert!(after <= before);
}

#[test]
fn perfect_fit_has_unit_p_value() {
    let bins = vec![
        bin(0, Some(0), 10, 10.0),
        bin(1, Some(1), 6, 6.0),
        bin(2, None, 4, 4.0),
    ];
    let chi2 = chi2_statistic(&bins).unwrap();
    assert_eq!(chi2, 0.0);
    assert!((chi2_survival(chi2, 1).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn fitted_zig_p_values_are_calibrated() {
    let truth = make_zero_inflated(CountModel::geometric(0.4).unwrap(), 0.3).unwrap();
    let reps = 200;
    let mut rejections = 0;
    for r in 0..reps {
        let s = sample_histogram(&truth, 10_000, 1000 + r).unwrap();
        let fit = mle_zig(&s).unwrap();
        let g = gof_test(&fit.model, &s, fit.n_params, DEFAULT_POOL_THRESHOLD).unwrap();
        if g.p_value < 0.05 {
            rejections += 1;
        }
    }
    let frac = rejections as f64 / reps as f64;
    assert!((0.01..=0.10).contains(&frac), "rejection rate {frac}");
}

#[test]
fn comparison_ranks_by_aic_and_flags_equivalence() {
    let truth = make_zero_inflated(CountModel::geometric(0.3).unwrap(), 0.2).unwrap();
    let s = sample_histogram(&truth, 2000, 3).unwrap();
    let report = compare_models(&s, &Family::ALL, DEFAULT_POOL_THRESHOLD).unwrap();
    let best = report
        .entries
        .iter()
        .find(|e| e.family == report.best_aic)
        .unwrap()
        .aic()
        .unwrap();
    for e in &report.entries {
        if let Some(a) = e.aic() {
            assert!(best <= a + 1e-9 * a.abs());
        }
    }
    assert!(report.zig_hg_equivalent);
}
