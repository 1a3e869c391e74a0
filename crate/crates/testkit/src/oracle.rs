//! Brute-force references: direct-convolution MODWT, textbook correlation,
//! characteristic-polynomial eigenvalues and iterative frontier minimisers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Equivalent-filter MODWT: each level's wavelet and scaling filters are
/// formed explicitly by convolving upsampled unit-level filters, then applied
/// to the input by one circular convolution per level.
///
/// Returns `(details, smooth)` with `details[j - 1]` the level-`j` crystal.
pub fn oracle_modwt(
    series: &[f64],
    scaling: &[f64],
    wavelet: &[f64],
    levels: usize,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let r2 = 2f64.sqrt();
    let g1: Vec<f64> = scaling.iter().map(|c| c / r2).collect();
    let h1: Vec<f64> = wavelet.iter().map(|c| c / r2).collect();

    let mut details = Vec::new();
    let mut g_prev = vec![1.0];
    for j in 1..=levels {
        let up = 1usize << (j - 1);
        let h_j = convolve(&g_prev, &upsample(&h1, up));
        let g_j = convolve(&g_prev, &upsample(&g1, up));
        details.push(circular_filter(series, &h_j));
        g_prev = g_j;
    }
    let smooth = circular_filter(series, &g_prev);
    (details, smooth)
}

fn upsample(f: &[f64], by: usize) -> Vec<f64> {
    let mut out = vec![0.0; (f.len() - 1) * by + 1];
    for (l, c) in f.iter().enumerate() {
        out[l * by] = *c;
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

fn circular_filter(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len() as i64;
    (0..n)
        .map(|t| {
            f.iter()
                .enumerate()
                .map(|(l, c)| c * x[(t - l as i64).rem_euclid(n) as usize])
                .sum()
        })
        .collect()
}

/// Loop-sum wavelet covariance over indices `boundary_width - 1 ..= T - 1`.
pub fn oracle_wavelet_cov(dx: &[f64], dy: &[f64], boundary_width: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut t = boundary_width - 1;
    while t < dx.len() {
        sum += dx[t] * dy[t];
        count += 1;
        t += 1;
    }
    sum / count as f64
}

/// Two-pass sample correlation matrix of the rows.
pub fn oracle_corr(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let means: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let mut sxy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            for t in 0..rows[i].len() {
                let a = rows[i][t] - means[i];
                let b = rows[k][t] - means[k];
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
            out[i][k] = sxy / (sxx * syy).sqrt();
        }
    }
    out
}

/// Eigenvalues of a small symmetric matrix as roots of its characteristic
/// polynomial (Faddeev-LeVerrier coefficients, bracketing by sign changes,
/// bisection). Ascending. Intended for n <= 4 with distinct eigenvalues.
pub fn oracle_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    // coefficients c[0..=n] of det(lambda I - A)
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| m[i][l] * mk[l][j]).sum::<f64>();
            }
            next[i][i] += c[n - k + 1];
        }
        let am_trace: f64 = (0..n)
            .map(|i| (0..n).map(|l| m[i][l] * next[l][i]).sum::<f64>())
            .sum();
        c[n - k] = -am_trace / k as f64;
        mk = next;
    }
    let poly = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);

    let radius = (0..n)
        .map(|i| m[i].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        + 1.0;
    let mut steps = 20_000;
    loop {
        let mut roots = Vec::new();
        let h = 2.0 * radius / steps as f64;
        let mut lo = -radius;
        let mut plo = poly(lo);
        for s in 1..=steps {
            let hi = -radius + s as f64 * h;
            let phi = poly(hi);
            if plo == 0.0 {
                roots.push(lo);
            } else if plo.signum() != phi.signum() && phi != 0.0 {
                let (mut a, mut b, mut pa) = (lo, hi, plo);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let pm = poly(mid);
                    if pm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if pm.signum() == pa.signum() {
                        a = mid;
                        pa = pm;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            lo = hi;
            plo = phi;
        }
        if roots.len() >= n || steps > 5_000_000 {
            roots.truncate(n);
            return roots;
        }
        steps *= 10;
    }
}

fn quad(sigma: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|i| a[i] * (0..n).map(|k| sigma[i][k] * b[k]).sum::<f64>())
        .sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Partial-pivot elimination; `true` when some pivot collapses.
fn is_singular(sigma: &[Vec<f64>]) -> bool {
    let n = sigma.len();
    let mut a = sigma.to_vec();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs()))
            .unwrap();
        if a[p][col].abs() <= 1e-12 * scale {
            return true;
        }
        a.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    false
}

/// Orthonormal basis of `{1, mu}` followed by an orthonormal basis of its
/// complement (Gram-Schmidt over the unit vectors).
fn constraint_bases(mu: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = mu.len();
    let mut span: Vec<Vec<f64>> = Vec::new();
    let mut null: Vec<Vec<f64>> = Vec::new();
    let candidates = std::iter::once(vec![1.0; n])
        .chain(std::iter::once(mu.to_vec()))
        .chain((0..n).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()));
    for (idx, mut v) in candidates.enumerate() {
        for b in span.iter().chain(null.iter()) {
            let p = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            v.iter_mut().for_each(|x| *x /= norm);
            if idx < 2 {
                span.push(v);
            } else {
                null.push(v);
            }
        }
        if span.len() + null.len() == n {
            break;
        }
    }
    (span, null)
}

/// Least-norm point satisfying `1'w = 1` and `mu'w = target`.
fn feasible_start(mu: &[f64], target: f64) -> Vec<f64> {
    let n = mu.len() as f64;
    let (s1, s2) = (mu.iter().sum::<f64>(), dot(mu, mu));
    // [[n, s1], [s1, s2]] [a, b] = [1, target]
    let det = n * s2 - s1 * s1;
    let a = (s2 - s1 * target) / det;
    let b = (n * target - s1) / det;
    mu.iter().map(|m| a + b * m).collect()
}

fn line_minimise(sigma: &[Vec<f64>], w: &mut [f64], d: &[f64]) -> f64 {
    let curv = quad(sigma, d, d);
    if curv <= 0.0 {
        return 0.0;
    }
    let alpha = -quad(sigma, d, w) / curv;
    for (x, y) in w.iter_mut().zip(d) {
        *x += alpha * y;
    }
    alpha
}

/// Minimum-variance weights for `mu'w = target`, `1'w = 1` by random-direction
/// search followed by cyclic coordinate descent on the constraint manifold.
pub fn oracle_frontier(
    sigma: &[Vec<f64>],
    mu: &[f64],
    target: f64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if is_singular(sigma) {
        return Err("covariance is singular".into());
    }
    let (_, null) = constraint_bases(mu);
    let mut w = feasible_start(mu, target);
    if null.is_empty() {
        return Ok(w);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2_000 {
        let mut d = vec![0.0; mu.len()];
        for b in &null {
            let c: f64 = rng.random_range(-1.0..1.0);
            for (x, y) in d.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        line_minimise(sigma, &mut w, &d);
    }
    for _ in 0..100_000 {
        let before = quad(sigma, &w, &w);
        for b in &null {
            line_minimise(sigma, &mut w, b);
        }
        let after = quad(sigma, &w, &w);
        if before - after <= 1e-18 * before.abs().max(1e-300) {
            break;
        }
    }
    Ok(w)
}

/// Projected gradient descent on the two equality constraints.
pub fn projected_gradient(sigma: &[Vec<f64>], mu: &[f64], target: f64) -> Vec<f64> {
    let n = mu.len();
    let (span, _) = constraint_bases(mu);
    let project = |g: &mut Vec<f64>| {
        for b in &span {
            let p = dot(g, b);
            for (x, y) in g.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
    };
    let lipschitz = sigma
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let step = 1.0 / lipschitz;
    let mut w = feasible_start(mu, target);
    for _ in 0..1_000_000 {
        let mut g: Vec<f64> = (0..n).map(|i| dot(&sigma[i], &w)).collect();
        project(&mut g);
        let gn = dot(&g, &g).sqrt();
        if gn < 1e-15 {
            break;
        }
        for (x, y) in w.iter_mut().zip(&g) {
            *x -= step * y;
        }
    }
    w
}

pub fn portfolio_variance(sigma: &[Vec<f64>], w: &[f64]) -> f64 {
    quad(sigma, w, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_level_one_closed_form() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let (d, _) = oracle_modwt(&x, &[r, r], &[r, -r], 1);
        for t in 0..8 {
            let prev = x[(t + 7) % 8];
            assert!((d[0][t] - (x[t] - prev) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_series_zero_details() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (d, s) = oracle_modwt(&[2.0; 16], &[r, r], &[r, -r], 3);
        assert!(d.iter().flatten().all(|v| v.abs() < 1e-15));
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn corr_limits() {
        let x = vec![1.0, 4.0, 2.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = oracle_corr(&[x.clone(), x, y]);
        assert!((c[0][1] - 1.0).abs() < 1e-15);
        assert!((c[0][2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn char_poly_diagonal() {
        let m = vec![vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.5]];
        let e = oracle_eigenvalues(&m);
        assert_eq!(e.len(), 3);
        for (got, want) in e.iter().zip([-1.0, 0.5, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn isotropic_frontier_oracle() {
        let sigma: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|k| if i == k { 0.09 } else { 0.0 }).collect())
            .collect();
        let mu = [0.01, 0.02, 0.03, 0.04];
        let w = oracle_frontier(&sigma, &mu, 0.025, 1).unwrap();
        assert!(w.iter().all(|v| (v - 0.25).abs() < 1e-8));
        let singular = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(oracle_frontier(&singular, &[0.1, 0.2], 0.15, 1).is_err());
    }
}
