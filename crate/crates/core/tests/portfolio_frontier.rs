//! Closed-form frontier against iterative minimisers and fixture orderings.

use nalgebra::DMatrix;
use wavecorr::*;
use wavecorr_testkit::{fixtures, oracle};

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, k| rows[i][k])
}

fn covariance(sigma: &[Vec<f64>]) -> ScaleCovariance {
    ScaleCovariance {
        scale: ScaleLabel::Raw,
        covariance: to_matrix(sigma),
        source_window: (0, 0),
    }
}

#[test]
fn matches_random_search_oracle() {
    for seed in 0..20u64 {
        let n = 2 + (seed as usize % 9);
        let sigma = fixtures::spd_matrix(n, 0.2, seed);
        let mu = fixtures::uniform_vec(n, -0.01, 0.02, seed + 100);
        let target = 0.005;
        let f = min_variance_frontier(&covariance(&sigma), &mu, &[target]).unwrap();
        let p = &f.points[0];
        let w_ref = oracle::oracle_frontier(&sigma, &mu, target, seed).unwrap();
        let v_ref = oracle::portfolio_variance(&sigma, &w_ref);
        let v = p.stdev * p.stdev;
        assert!((v - v_ref).abs() < 1e-6, "seed {seed} n {n}: {v} vs {v_ref}");
        assert!(v <= v_ref + 1e-12);
        let sum: f64 = p.weights.iter().sum();
        let ret: f64 = p.weights.iter().zip(&mu).map(|(w, m)| w * m).sum();
        assert!((sum - 1.0).abs() < 1e-10);
        assert!((ret - target).abs() < 1e-10);
    }
}

#[test]
fn matches_projected_gradient_up_to_49_assets() {
    for (seed, n) in [(1u64, 5usize), (2, 20), (3, 49)] {
        let sigma = fixtures::spd_matrix(n, 0.5, seed);
        let mu = fixtures::uniform_vec(n, -0.01, 0.02, seed + 7);
        let f = min_variance_frontier(&covariance(&sigma), &mu, &[0.01]).unwrap();
        let w_ref = oracle::projected_gradient(&sigma, &mu, 0.01);
        let v_ref = oracle::portfolio_variance(&sigma, &w_ref);
        let v = f.points[0].stdev.powi(2);
        assert!((v - v_ref).abs() < 1e-6, "n {n}: {v} vs {v_ref}");
    }
}

#[test]
fn two_asset_grid_search() {
    let sigma = vec![vec![1.0, 0.0], vec![0.0, 4.0]];
    let mu = [0.1, 0.2];
    let f = min_variance_frontier(&covariance(&sigma), &mu, &[0.1]).unwrap();
    // both constraints pin w = (1, 0); the grid confirms nothing nearby is lower
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=20_000 {
        let w1 = -1.0 + 4.0 * k as f64 / 20_000.0;
        let w = [w1, 1.0 - w1];
        let ret = w[0] * mu[0] + w[1] * mu[1];
        if (ret - 0.1).abs() < 1e-9 {
            let v = w[0] * w[0] + 4.0 * w[1] * w[1];
            if v < best.0 {
                best = (v, w1);
            }
        }
    }
    let w = &f.points[0].weights;
    assert!((w[0] - best.1).abs() < 1e-10 && (w[0] - 1.0).abs() < 1e-10);
    assert!(w[1].abs() < 1e-10);
}

#[test]
fn gmv_below_random_feasible_portfolios() {
    let n = 6;
    let sigma = fixtures::spd_matrix(n, 0.3, 44);
    let mu = fixtures::uniform_vec(n, 0.0, 0.01, 45);
    let f = min_variance_frontier(&covariance(&sigma), &mu, &[]).unwrap();
    let gmv = f.gmv.stdev.powi(2);
    assert!((gmv - 1.0 / f.a).abs() < 1e-12);
    let draws = fixtures::uniform_vec(n * 20_000, -1.0, 1.0, 46);
    let mut best = f64::INFINITY;
    for chunk in draws.chunks(n) {
        let s: f64 = chunk.iter().sum();
        if s.abs() < 0.05 {
            continue;
        }
        let w: Vec<f64> = chunk.iter().map(|v| v / s).collect();
        best = best.min(oracle::portfolio_variance(&sigma, &w));
    }
    assert!(gmv <= best);
    assert!(best - gmv < 0.5 * gmv, "sampling slack {gmv} {best}");
}

#[test]
fn isotropic_gmv_is_equal_weight() {
    let n = 7;
    let sigma: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|k| if i == k { 0.04 } else { 0.0 }).collect())
        .collect();
    let mu: Vec<f64> = (0..n).map(|i| 0.001 * i as f64).collect();
    let mean = mu.iter().sum::<f64>() / n as f64;
    let f = min_variance_frontier(&covariance(&sigma), &mu, &[mean, mean + 0.001]).unwrap();
    for w in &f.gmv.weights {
        assert!((w - 1.0 / n as f64).abs() < 1e-14);
    }
    assert!((f.points[0].stdev.powi(2) - 0.04 / n as f64).abs() < 1e-15);
    assert!(f.points[1].stdev.powi(2) > 0.04 / n as f64);
}

#[test]
fn scale_structured_panel_orders_frontiers() {
    // Less correlation at level 1 means more diversification near the GMV.
    // Far from it the flatter, more correlated frontiers eventually cross,
    // so targets stay within the spread of the expected returns.
    let filter = make_filter("la8").unwrap();
    let panel = ReturnsPanel::from_rows(&fixtures::scale_structured(8, 4000, 3)).unwrap();
    let mu: Vec<f64> = (0..8).map(|i| 0.0004 + 0.0001 * (i % 4) as f64).collect();
    let targets: Vec<f64> = (0..=10).map(|k| 0.0004 + 0.00003 * k as f64).collect();
    let fronts =
        frontier_by_scale(&panel, (0, 4000), &filter, 3, Some(&mu), None, &targets).unwrap();
    assert_eq!(fronts.len(), 4);
    let level = |j: usize| {
        fronts
            .iter()
            .find(|f| f.covariance.scale == ScaleLabel::Level(j))
            .unwrap()
    };
    for k in 0..targets.len() {
        let (fine, coarse) = (&level(1).frontier.points[k], &level(3).frontier.points[k]);
        assert!(fine.stdev < coarse.stdev, "target {}: {} vs {}", targets[k], fine.stdev, coarse.stdev);
    }
    assert!(level(1).frontier.gmv.stdev < level(3).frontier.gmv.stdev);
}

#[test]
fn equicorrelated_panel_frontiers_nearly_coincide() {
    let filter = make_filter("la8").unwrap();
    let panel = ReturnsPanel::from_rows(&fixtures::equicorrelated(5, 40_000, 0.4, 8)).unwrap();
    let mu = [0.001, 0.002, 0.0, -0.001, 0.0015];
    let fronts =
        frontier_by_scale(&panel, (0, 40_000), &filter, 3, Some(&mu), None, &[0.001]).unwrap();
    let sds: Vec<f64> = fronts.iter().map(|f| f.frontier.points[0].stdev).collect();
    let lo = sds.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sds.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.1, "{sds:?}");
}

#[test]
fn identical_panel_is_ill_conditioned() {
    let filter = make_filter("haar").unwrap();
    let panel = ReturnsPanel::from_rows(&fixtures::identical(4, 500, 1)).unwrap();
    let err = frontier_by_scale(&panel, (0, 500), &filter, 2, None, None, &[0.0]).unwrap_err();
    assert!(matches!(err, Error::IllConditioned { .. }), "{err}");
}
