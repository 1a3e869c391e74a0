//! Per-scale wavelet covariance/correlation estimators and the raw
//! equal-time correlation matrix.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::modwt::{scale_tau, WaveletDecomposition};

/// Wavelet correlation and covariance of all asset pairs at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCorrelationSet {
    pub scale: usize,
    pub tau: usize,
    pub correlation: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    /// Unbiased coefficient count `M_j`.
    pub m_j: usize,
    /// Pairs whose estimate fell outside [-1, 1] by rounding and was clipped.
    pub clipped: usize,
}

/// Equal-time correlation of a normalised window, `C = R R^t / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCorrelationMatrix {
    pub correlation: DMatrix<f64>,
    pub window_length: usize,
}

fn moments(row: impl Iterator<Item = f64> + Clone, len: usize) -> (f64, f64) {
    let mean = row.clone().sum::<f64>() / len as f64;
    let var = row.map(|v| (v - mean) * (v - mean)).sum::<f64>() / len as f64;
    (mean, var.sqrt())
}

fn asset_name(asset_ids: &[String], i: usize) -> String {
    asset_ids
        .get(i)
        .cloned()
        .unwrap_or_else(|| format!("#{i}"))
}

/// Centres each row and scales it to unit (population) standard deviation.
pub fn normalize_window(returns: &DMatrix<f64>, asset_ids: &[String]) -> Result<DMatrix<f64>> {
    let (n, t) = returns.shape();
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "window needs at least 2 observations, got {t}"
        )));
    }
    let mut out = returns.clone();
    for i in 0..n {
        let row = returns.row(i);
        let (mean, sd) = moments(row.iter().copied(), t);
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(sd > 1e-14 * scale) {
            return Err(Error::ZeroVariance {
                asset: asset_name(asset_ids, i),
                scale: None,
            });
        }
        for v in out.row_mut(i).iter_mut() {
            *v = (*v - mean) / sd;
        }
    }
    Ok(out)
}

pub fn raw_correlation(returns: &DMatrix<f64>, asset_ids: &[String]) -> Result<RawCorrelationMatrix> {
    let (n, t) = returns.shape();
    if n < 2 {
        return Err(Error::InvalidPanel(format!("need at least 2 assets, got {n}")));
    }
    let r = normalize_window(returns, asset_ids)?;
    let mut c = (&r * r.transpose()) / t as f64;
    symmetrize_and_clip(&mut c);
    Ok(RawCorrelationMatrix {
        correlation: c,
        window_length: t,
    })
}

fn symmetrize_and_clip(c: &mut DMatrix<f64>) -> usize {
    let n = c.nrows();
    let mut clipped = 0;
    for i in 0..n {
        for k in i + 1..n {
            let mut v = 0.5 * (c[(i, k)] + c[(k, i)]);
            if v.abs() > 1.0 {
                v = v.clamp(-1.0, 1.0);
                clipped += 1;
            }
            c[(i, k)] = v;
            c[(k, i)] = v;
        }
    }
    clipped
}

/// Unbiased wavelet covariance over the coefficients clear of the boundary,
/// `(1/M_j) * sum_{t = L_j - 1}^{T - 1} dx_t dy_t` with `M_j = T - L_j + 1`.
pub fn wavelet_covariance(dx: &[f64], dy: &[f64], boundary_width: usize) -> Result<(f64, usize)> {
    if dx.len() != dy.len() {
        return Err(Error::InvalidParameter(format!(
            "crystal lengths differ: {} vs {}",
            dx.len(),
            dy.len()
        )));
    }
    let len = dx.len();
    if boundary_width == 0 || boundary_width > len {
        return Err(Error::NoUnbiasedCoefficients {
            boundary_width,
            len,
        });
    }
    let m = len - boundary_width + 1;
    let start = boundary_width - 1;
    let sum: f64 = dx[start..].iter().zip(&dy[start..]).map(|(a, b)| a * b).sum();
    Ok((sum / m as f64, m))
}

/// Pairwise wavelet correlation of the level-`scale` detail crystals.
pub fn wavelet_correlation_matrix(
    decs: &[WaveletDecomposition],
    asset_ids: &[String],
    scale: usize,
) -> Result<ScaleCorrelationSet> {
    let n = decs.len();
    if n < 2 {
        return Err(Error::InvalidPanel(format!("need at least 2 assets, got {n}")));
    }
    let first = &decs[0];
    if scale == 0 {
        return Err(Error::InvalidParameter("scale must be at least 1".into()));
    }
    for d in decs {
        if d.len() != first.len() || d.filter_name != first.filter_name {
            return Err(Error::InvalidParameter(
                "decompositions must share length and filter".into(),
            ));
        }
        if d.levels < scale {
            return Err(Error::TooManyLevels {
                requested: scale,
                max_level: d.levels,
            });
        }
    }
    let lj = first.boundary_width[scale - 1];

    let mut cov = DMatrix::zeros(n, n);
    let mut m_j = 0;
    for i in 0..n {
        for k in i..n {
            let (v, m) = wavelet_covariance(decs[i].detail(scale), decs[k].detail(scale), lj)?;
            cov[(i, k)] = v;
            cov[(k, i)] = v;
            m_j = m;
        }
    }

    for (i, d) in decs.iter().enumerate() {
        let total = d.details.iter().chain([&d.smooth]).flatten().map(|v| v * v).sum::<f64>()
            / (d.len() * (d.levels + 1)) as f64;
        if !(cov[(i, i)] > 1e-28 * total) {
            return Err(Error::ZeroVariance {
                asset: asset_name(asset_ids, i),
                scale: Some(scale),
            });
        }
    }

    let sd: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();
    let mut corr = DMatrix::from_fn(n, n, |i, k| cov[(i, k)] / (sd[i] * sd[k]));
    corr.fill_diagonal(1.0);
    let clipped = symmetrize_and_clip(&mut corr);
    Ok(ScaleCorrelationSet {
        scale,
        tau: scale_tau(scale),
        correlation: corr,
        covariance: cov,
        m_j,
        clipped,
    })
}

/// Mean of the off-diagonal entries.
pub fn average_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n < 2 {
        return f64::NAN;
    }
    let total: f64 = m.iter().sum::<f64>() - m.trace();
    total / (n * (n - 1)) as f64
}

/// CSV with asset ids as row and column headers.
pub fn write_matrix_csv<W: Write>(out: W, asset_ids: &[String], m: &DMatrix<f64>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(asset_ids.iter().cloned());
    w.write_record(&header)?;
    for (i, id) in asset_ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modwt::{decompose, make_filter};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i}")).collect()
    }

    #[test]
    fn normalisation() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -4.0, 0.0, 10.0]);
        let z = normalize_window(&m, &ids(2)).unwrap();
        for i in 0..2 {
            let (mean, sd) = moments(z.row(i).iter().copied(), 3);
            assert!(mean.abs() < 1e-15);
            assert!((sd - 1.0).abs() < 1e-15);
        }
        let again = normalize_window(&z, &ids(2)).unwrap();
        assert!((again - &z).abs().max() < 1e-12);
    }

    #[test]
    fn constant_row_is_zero_variance() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 4.0, 4.0]);
        match normalize_window(&m, &ids(2)) {
            Err(Error::ZeroVariance { asset, scale: None }) => assert_eq!(asset, "a1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn raw_correlation_limits() {
        let x = [0.3, -1.2, 0.5, 2.0, -0.7];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = DMatrix::from_row_slice(3, 5, &[x.to_vec(), x.to_vec(), neg].concat());
        let c = raw_correlation(&m, &ids(3)).unwrap().correlation;
        assert!((c[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((c[(0, 2)] + 1.0).abs() < 1e-12);
        assert!((c[(1, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_window_and_errors() {
        let zero = vec![0.0; 10];
        assert_eq!(wavelet_covariance(&zero, &zero, 3).unwrap(), (0.0, 8));
        let x: Vec<f64> = (0..10).map(|v| v as f64).collect();
        // t = 7, 8, 9
        let (v, m) = wavelet_covariance(&x, &x, 8).unwrap();
        assert_eq!(m, 3);
        assert!((v - (49.0 + 64.0 + 81.0) / 3.0).abs() < 1e-12);
        assert!(wavelet_covariance(&x, &x, 11).is_err());
        assert!(wavelet_covariance(&x, &x[..9], 2).is_err());
    }

    #[test]
    fn identical_and_antithetic_assets() {
        let la8 = make_filter("la8").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let decs: Vec<_> = [&x, &x, &neg].iter().map(|s| decompose(s, &la8, 4).unwrap()).collect();
        for j in 1..=4 {
            let set = wavelet_correlation_matrix(&decs, &ids(3), j).unwrap();
            assert!((set.correlation[(0, 1)] - 1.0).abs() < 1e-12);
            assert!((set.correlation[(0, 2)] + 1.0).abs() < 1e-12);
            assert_eq!(set.tau, 1 << (j - 1));
            assert_eq!(set.m_j, 256 - la8.boundary_width(j) + 1);
        }
    }

    #[test]
    fn zero_wavelet_variance_names_asset_and_scale() {
        let la8 = make_filter("la8").unwrap();
        let x: Vec<f64> = (0..128).map(|t| ((t * 7919) % 13) as f64).collect();
        let flat = vec![2.5; 128];
        let decs = vec![decompose(&x, &la8, 2).unwrap(), decompose(&flat, &la8, 2).unwrap()];
        match wavelet_correlation_matrix(&decs, &ids(2), 2) {
            Err(Error::ZeroVariance { asset, scale: Some(2) }) => assert_eq!(asset, "a1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_diagonal_mean() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.4, 0.2, 1.0, 0.6, 0.4, 0.6, 1.0]);
        assert!((average_off_diagonal(&m) - 0.4).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn wavelet_correlation_is_bounded_and_scale_free(seed in 0u64..10_000, factor in 0.1f64..20.0) {
            let la8 = make_filter("la8").unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let common: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rows: Vec<Vec<f64>> = (0..4)
                .map(|_| common.iter().map(|c| c + rng.random_range(-1.0..1.0)).collect())
                .collect();
            let decs: Vec<_> = rows.iter().map(|r| decompose(r, &la8, 3).unwrap()).collect();
            let mut scaled_rows = rows.clone();
            for v in scaled_rows[2].iter_mut() {
                *v = *v * factor + 1.5;
            }
            let scaled: Vec<_> = scaled_rows.iter().map(|r| decompose(r, &la8, 3).unwrap()).collect();
            for j in 1..=3 {
                let a = wavelet_correlation_matrix(&decs, &ids(4), j).unwrap();
                let b = wavelet_correlation_matrix(&scaled, &ids(4), j).unwrap();
                prop_assert!(a.correlation.iter().all(|v| v.abs() <= 1.0));
                prop_assert!((a.correlation - b.correlation).abs().max() < 1e-12);
                for i in 0..4 {
                    prop_assert!(a.covariance[(i, i)] >= 0.0);
                }
            }
        }
    }
}
