use approx::assert_relative_eq;
use chrono::NaiveDate;
use nalgebra::DMatrix;
use proptest::prelude::*;

use waterfall_rebalancer::market_data::{
    risk_stats, rolling_stats, vvv_adjusted_volatility, CovarianceMatrix, ReturnSeries, StatsConfig,
    Window,
};
use waterfall_rebalancer::weights::{
    compute_weight_table, constrained_min_variance_weights, inverse_measure_weights, kkt_residual,
    risk_parity_weights, Scheme, SolverConfig, WeightConfig,
};

fn ids(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("W{i}")).collect()
}

fn pd_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..8).prop_flat_map(|k| {
        (
            prop::collection::vec(-0.05f64..0.05, (k + 3) * k),
            prop::collection::vec(1e-5f64..4e-4, k),
        )
            .prop_map(move |(a, d)| {
                let a = DMatrix::from_vec(k + 3, k, a);
                a.transpose() * &a / (k as f64) + DMatrix::from_diagonal(&d.into())
            })
    })
}

fn returns(id: &str, xs: &[f64]) -> ReturnSeries {
    let start = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
    ReturnSeries {
        asset_id: id.into(),
        returns: xs
            .iter()
            .enumerate()
            .map(|(i, x)| (start + chrono::Duration::days(i as i64), *x))
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_measures_rank_inversely(m in prop::collection::vec(1e-4f64..1.0, 2..12)) {
        let w = inverse_measure_weights(Scheme::SimpleParity, &ids(m.len()), &m).unwrap();
        assert_relative_eq!(w.sum(), 1.0, epsilon = 1e-12);
        for i in 0..m.len() {
            for j in 0..m.len() {
                if m[i] < m[j] {
                    prop_assert!(w.weights[i] >= w.weights[j]);
                }
            }
        }
    }

    #[test]
    fn risk_parity_is_positive_and_equalizes(x in pd_matrix()) {
        let cov = CovarianceMatrix::new(ids(x.nrows()), x.clone()).unwrap();
        let rp = risk_parity_weights(&cov, &SolverConfig::default()).unwrap();
        prop_assert!(rp.weights.iter().all(|w| *w > 0.0));
        let xw = &x * nalgebra::DVector::from_column_slice(&rp.weights);
        let rc: Vec<f64> = rp.weights.iter().zip(xw.iter()).map(|(w, v)| w * v).collect();
        let mean = rc.iter().sum::<f64>() / rc.len() as f64;
        prop_assert!(rc.iter().all(|c| (c - mean).abs() <= 1e-8 * mean));
    }

    #[test]
    fn bounded_min_variance_respects_its_box(x in pd_matrix(), cap in 0.5f64..1.0) {
        let k = x.nrows();
        let upper = vec![cap.max(1.0 / k as f64 + 0.01); k];
        let lower = vec![0.0; k];
        let cov = CovarianceMatrix::new(ids(k), x.clone()).unwrap();
        let w = constrained_min_variance_weights(&cov, &lower, Some(&upper), &SolverConfig::default()).unwrap();
        assert_relative_eq!(w.sum(), 1.0, epsilon = 1e-10);
        for (v, u) in w.weights.iter().zip(&upper) {
            prop_assert!(*v >= -1e-12 && *v <= u + 1e-12);
        }
        prop_assert!(kkt_residual(&x, &w.weights, &lower, &upper) <= 1e-8);
    }

    #[test]
    fn weight_bands_bracket_the_ideal(x in pd_matrix(), theta in 0.0f64..2.0) {
        let k = x.nrows();
        let stats: Vec<_> = (0..k)
            .map(|i| {
                let xs: Vec<f64> = (0..40).map(|t| x[(i, i)].sqrt() * ((t * (i + 3)) as f64).sin()).collect();
                risk_stats(&returns(&format!("W{i}"), &xs), &StatsConfig { window: 30, min_history: 20, theta }).unwrap()
            })
            .collect();
        let cov = CovarianceMatrix::new(ids(k), x).unwrap();
        let cfg = WeightConfig { theta, max_asset_weight: 0.6, ..WeightConfig::default() };
        let table = compute_weight_table(&stats, &cov, &cfg).unwrap();
        let ideal_sum: f64 = table.bounds.iter().map(|b| b.ideal_w).sum();
        assert_relative_eq!(ideal_sum, 1.0, epsilon = 1e-12);
        for b in &table.bounds {
            prop_assert!(0.0 <= b.min_w && b.min_w <= b.ideal_w && b.ideal_w <= b.max_w);
        }
    }

    #[test]
    fn rolling_variance_is_shift_invariant(
        xs in prop::collection::vec(-0.2f64..0.2, 10..80),
        shift in -0.5f64..0.5,
    ) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let a = rolling_stats(&returns("A", &xs), Window::full(8));
        let b = rolling_stats(&returns("A", &shifted), Window::full(8));
        prop_assert_eq!(a.len(), xs.len() - 7);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(p.variance >= 0.0);
            prop_assert!((p.variance - q.variance).abs() <= 1e-12 + 1e-9 * p.variance);
        }
    }
}

#[test]
fn constant_volatility_has_no_vol_of_vol() {
    let d0 = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
    let vols: Vec<_> = (0..30).map(|i| (d0 + chrono::Duration::days(i), 0.03)).collect();
    let out = vvv_adjusted_volatility(&vols, Window::full(10), 2.0).unwrap();
    assert!(out.iter().all(|p| p.vvv_factor == 0.0 && p.vvv_volatility == 0.03 && !p.degenerate));
}
