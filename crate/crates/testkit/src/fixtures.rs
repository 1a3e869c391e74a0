//! Return panels with known structure, as `rows[asset][t]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `n` copies of one Gaussian series.
pub fn identical(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..t).map(|_| 0.01 * normal(&mut rng)).collect();
    vec![base; n]
}

/// Independent Gaussian rows.
pub fn iid(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..t).map(|_| 0.01 * normal(&mut rng)).collect())
        .collect()
}

/// One-factor Gaussian block with pairwise correlation `rho` and per-step
/// drift `drift`, appended to `rows` column by column.
fn one_factor_block(
    rows: &mut [Vec<f64>],
    len: usize,
    rho: f64,
    drift: f64,
    vol: f64,
    rng: &mut ChaCha8Rng,
) {
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    for _ in 0..len {
        let m = normal(rng);
        for row in rows.iter_mut() {
            row.push(drift + vol * (a * m + b * normal(rng)));
        }
    }
}

/// Uncorrelated first half, correlation `rho` in the second half.
pub fn two_regime(n: usize, t: usize, rho: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![Vec::with_capacity(t); n];
    one_factor_block(&mut rows, t / 2, 0.0, 0.0, 0.01, &mut rng);
    one_factor_block(&mut rows, t - t / 2, rho, 0.0, 0.01, &mut rng);
    rows
}

/// Alternating blocks: highly correlated with negative drift, then
/// uncorrelated with positive drift.
pub fn drawdown_regimes(n: usize, block: usize, pairs: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![Vec::with_capacity(2 * block * pairs); n];
    for _ in 0..pairs {
        one_factor_block(&mut rows, block, 0.7, -0.002, 0.01, &mut rng);
        one_factor_block(&mut rows, block, 0.0, 0.002, 0.01, &mut rng);
    }
    rows
}

/// Fast idiosyncratic white noise plus a slow common AR(1) factor: low
/// correlation at the finest wavelet scale, high correlation a few levels up.
pub fn scale_structured(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = 0.9;
    let mut f = 0.0;
    let factor: Vec<f64> = (0..t)
        .map(|_| {
            f = phi * f + normal(&mut rng);
            f
        })
        .collect();
    (0..n)
        .map(|_| {
            let loading = 0.8 + 0.4 * rng.random::<f64>();
            factor
                .iter()
                .map(|m| 0.01 * (0.6 * loading * m + normal(&mut rng)))
                .collect()
        })
        .collect()
}

/// Equicorrelated Gaussian rows via a one-factor construction.
pub fn equicorrelated(n: usize, t: usize, rho: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![Vec::with_capacity(t); n];
    one_factor_block(&mut rows, t, rho, 0.0, 0.01, &mut rng);
    rows
}

/// Random symmetric positive definite matrix `G G' / n + shift I`.
pub fn spd_matrix(n: usize, shift: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| normal(&mut rng)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let s: f64 = (0..n).map(|l| g[i][l] * g[k][l]).sum();
                    s / n as f64 + if i == k { shift } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Uniform draws in `[lo, hi)`.
pub fn uniform_vec(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Writes rows as a price CSV (`t` index column, assets `A1..`), starting each
/// asset at 100 and compounding the rows as log returns.
pub fn price_csv(rows: &[Vec<f64>]) -> String {
    let n = rows.len();
    let t = rows[0].len();
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",A{i}"));
    }
    out.push('\n');
    let mut cum = vec![0.0; n];
    for s in 0..=t {
        out.push_str(&s.to_string());
        for i in 0..n {
            if s > 0 {
                cum[i] += rows[i][s - 1];
            }
            out.push_str(&format!(",{}", 100.0 * cum[i].exp()));
        }
        out.push('\n');
    }
    out
}
