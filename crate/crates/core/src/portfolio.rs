//! Unconstrained (short-selling allowed) mean-variance frontiers built from
//! scale-specific correlation matrices with fixed per-asset volatilities.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::eigen::{spectrum, ScaleLabel};
use crate::error::{Error, Result};
use crate::ingest::ReturnsPanel;
use crate::modwt::{decompose, WaveletFilter};
use crate::wavestats::{raw_correlation, wavelet_correlation_matrix};

/// Smallest accepted ratio of extreme covariance eigenvalues.
pub const MIN_CONDITION_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCovariance {
    pub scale: ScaleLabel,
    pub covariance: DMatrix<f64>,
    /// `(start, length)` of the observations the correlation came from.
    pub source_window: (usize, usize),
}

/// `Sigma_ik = vol_i * vol_k * rho_ik`.
pub fn build_covariance(
    correlation: &DMatrix<f64>,
    vols: &[f64],
    scale: ScaleLabel,
    source_window: (usize, usize),
) -> Result<ScaleCovariance> {
    let n = correlation.nrows();
    if correlation.ncols() != n || vols.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{}x{} correlation with {} vols",
            n,
            correlation.ncols(),
            vols.len()
        )));
    }
    if let Some((i, v)) = vols.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("vol of asset {i} must be positive, got {v}")));
    }
    Ok(ScaleCovariance {
        scale,
        covariance: DMatrix::from_fn(n, n, |i, k| vols[i] * vols[k] * correlation[(i, k)]),
        source_window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub target_return: f64,
    pub stdev: f64,
    /// Sums to one; negative entries are short positions.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    /// Global minimum-variance portfolio.
    pub gmv: FrontierPoint,
    /// `1' S^-1 1`
    pub a: f64,
    /// `1' S^-1 mu`
    pub b: f64,
    /// `mu' S^-1 mu`
    pub c: f64,
    /// `AC - B^2`
    pub d: f64,
}

impl Frontier {
    /// Closed-form frontier variance `(A m^2 - 2 B m + C) / D`.
    pub fn variance_at(&self, target: f64) -> f64 {
        (self.a * target * target - 2.0 * self.b * target + self.c) / self.d
    }
}

pub fn min_variance_frontier(
    cov: &ScaleCovariance,
    mu: &[f64],
    targets: &[f64],
) -> Result<Frontier> {
    let sigma = &cov.covariance;
    let n = sigma.nrows();
    if mu.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} expected returns for {n} assets",
            mu.len()
        )));
    }
    let spec = spectrum(sigma, false)?;
    let ratio = spec.min() / spec.max();
    if !(spec.max() > 0.0) || !(ratio >= MIN_CONDITION_RATIO) {
        return Err(Error::IllConditioned { ratio });
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or(Error::IllConditioned { ratio })?;
    let ones = DVector::from_element(n, 1.0);
    let mu_v = DVector::from_column_slice(mu);
    let x = chol.solve(&ones);
    let y = chol.solve(&mu_v);
    let a = ones.dot(&x);
    let b = ones.dot(&y);
    let c = mu_v.dot(&y);
    let d = a * c - b * b;
    if !(d > 1e-12 * a * c.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateReturns(d));
    }

    let point = |target: f64, w: DVector<f64>| {
        let w = polish(w, &x, &y, &ones, &mu_v, target, a, b, c, d);
        let var = w.dot(&(sigma * &w)).max(0.0);
        FrontierPoint {
            target_return: target,
            stdev: var.sqrt(),
            weights: w.iter().copied().collect(),
        }
    };
    let points = targets
        .iter()
        .map(|&m| point(m, (&x * (c - b * m) + &y * (a * m - b)) / d))
        .collect();
    let gmv = point(b / a, &x / a);
    Ok(Frontier {
        points,
        gmv,
        a,
        b,
        c,
        d,
    })
}

// One correction inside span{S^-1 1, S^-1 mu} that removes rounding drift
// from both constraints without leaving the optimal subspace.
#[allow(clippy::too_many_arguments)]
fn polish(
    w: DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    ones: &DVector<f64>,
    mu: &DVector<f64>,
    target: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
) -> DVector<f64> {
    let r1 = 1.0 - ones.dot(&w);
    let r2 = target - mu.dot(&w);
    let alpha = (c * r1 - b * r2) / d;
    let beta = (a * r2 - b * r1) / d;
    w + x * alpha + y * beta
}

/// Per-asset sample mean and (population) standard deviation of the whole panel.
pub fn sample_moments(panel: &ReturnsPanel) -> (Vec<f64>, Vec<f64>) {
    let t = panel.n_obs() as f64;
    (0..panel.n_assets())
        .map(|i| {
            let row = panel.returns.row(i);
            let mean = row.sum() / t;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
            (mean, var.sqrt())
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFrontier {
    pub covariance: ScaleCovariance,
    pub frontier: Frontier,
}

/// Frontiers for raw returns and every level up to `levels`, all sharing the
/// same expected returns and volatilities so only the correlation structure
/// of the window differs between scales.
///
/// `mu` and `vols` default to full-panel sample moments.
pub fn frontier_by_scale(
    panel: &ReturnsPanel,
    window: (usize, usize),
    filter: &WaveletFilter,
    levels: usize,
    mu: Option<&[f64]>,
    vols: Option<&[f64]>,
    targets: &[f64],
) -> Result<Vec<ScaleFrontier>> {
    let (start, len) = window;
    let block = panel.window(start, len)?;
    let (mean, sd) = sample_moments(panel);
    let mu = mu.unwrap_or(&mean);
    let vols = vols.unwrap_or(&sd);

    let mut correlations = vec![(
        ScaleLabel::Raw,
        raw_correlation(&block.returns, &block.asset_ids)?.correlation,
    )];
    if levels > 0 {
        let decs = (0..block.n_assets())
            .map(|i| decompose(&block.row(i), filter, levels))
            .collect::<Result<Vec<_>>>()?;
        for j in 1..=levels {
            let set = wavelet_correlation_matrix(&decs, &block.asset_ids, j)?;
            correlations.push((ScaleLabel::Level(j), set.correlation));
        }
    }
    correlations
        .into_iter()
        .map(|(scale, corr)| {
            let covariance = build_covariance(&corr, vols, scale, window)?;
            let frontier = min_variance_frontier(&covariance, mu, targets)?;
            Ok(ScaleFrontier {
                covariance,
                frontier,
            })
        })
        .collect()
}

fn write_points<'a, W: Write>(
    out: W,
    n_assets: usize,
    rows: impl Iterator<Item = (ScaleLabel, &'a FrontierPoint)>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scale".to_string(), "target_return".into(), "stdev".into()];
    header.extend((1..=n_assets).map(|i| format!("w_{i}")));
    w.write_record(&header)?;
    for (scale, p) in rows {
        let mut rec = vec![scale.to_string(), p.target_return.to_string(), p.stdev.to_string()];
        rec.extend(p.weights.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

/// `scale, target_return, stdev, w_1..w_N` for every frontier point.
pub fn write_frontier_csv<W: Write>(out: W, frontiers: &[ScaleFrontier]) -> std::io::Result<()> {
    let n = frontiers.first().map_or(0, |f| f.covariance.covariance.nrows());
    write_points(
        out,
        n,
        frontiers
            .iter()
            .flat_map(|f| f.frontier.points.iter().map(move |p| (f.covariance.scale, p))),
    )
}

/// Same layout as [`write_frontier_csv`], one GMV row per scale.
pub fn write_gmv_csv<W: Write>(out: W, frontiers: &[ScaleFrontier]) -> std::io::Result<()> {
    let n = frontiers.first().map_or(0, |f| f.covariance.covariance.nrows());
    write_points(
        out,
        n,
        frontiers.iter().map(|f| (f.covariance.scale, &f.frontier.gmv)),
    )
}
