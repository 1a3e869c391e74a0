//! Drawdown/drawup partition of SDU eigenvalue series and the one-factor
//! consistency check between the largest eigenvalue and average correlation.

use std::io::Write;

use nalgebra::DMatrix;

use crate::eigen::{spectrum, ScaleLabel, SduSeries};
use crate::error::{Error, Result};
use crate::ingest::ReturnKind;
use crate::wavestats::average_off_diagonal;

/// Per-observation weighted average of asset returns (rows are assets).
/// Equal weights when `weights` is `None`.
pub fn index_returns(returns: &DMatrix<f64>, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let (n, t) = returns.shape();
    if n == 0 {
        return Err(Error::InvalidPanel("no assets".into()));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {n} assets",
                    w.len()
                )));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidParameter(format!(
                    "weights must sum to 1, got {total}"
                )));
            }
            w.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    Ok((0..t)
        .map(|j| (0..n).map(|i| w[i] * returns[(i, j)]).sum())
        .collect())
}

/// Total return of `series` over each window: summed for log returns,
/// compounded for simple returns.
pub fn aggregate_window_returns(
    series: &[f64],
    starts: &[usize],
    length: usize,
    kind: ReturnKind,
) -> Result<Vec<f64>> {
    starts
        .iter()
        .map(|&s| {
            let block = series.get(s..s + length).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "window [{s}, {}) exceeds series of length {}",
                    s + length,
                    series.len()
                ))
            })?;
            Ok(match kind {
                ReturnKind::Log => block.iter().sum(),
                ReturnKind::Simple => block.iter().map(|r| 1.0 + r).product::<f64>() - 1.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSide {
    pub windows: Vec<usize>,
    /// `None` when the partition is empty.
    pub mean_return: Option<f64>,
    pub total_return: f64,
}

impl PartitionSide {
    fn collect(members: Vec<usize>, window_returns: &[f64]) -> Self {
        let total: f64 = members.iter().map(|&k| window_returns[k]).sum();
        PartitionSide {
            mean_return: (!members.is_empty()).then(|| total / members.len() as f64),
            total_return: total,
            windows: members,
        }
    }

    pub fn count(&self) -> usize {
        self.windows.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub scale: ScaleLabel,
    pub eigen_index: usize,
    pub upper: f64,
    pub lower: f64,
    /// Windows with SDU value strictly above `upper`.
    pub above: PartitionSide,
    /// Windows with SDU value strictly below `lower`.
    pub below: PartitionSide,
}

/// Splits windows by the SDU value of one eigenvalue series and averages the
/// aligned per-window index returns over each side.
pub fn partition_by_sdu(
    sdu: &SduSeries,
    window_returns: &[f64],
    upper: f64,
    lower: f64,
) -> Result<PartitionReport> {
    if sdu.values.len() != window_returns.len() {
        return Err(Error::InvalidParameter(format!(
            "{} SDU values but {} window returns",
            sdu.values.len(),
            window_returns.len()
        )));
    }
    if !(lower < upper) {
        return Err(Error::InvalidParameter(format!(
            "lower threshold {lower} must be below upper threshold {upper}"
        )));
    }
    let pick = |keep: &dyn Fn(f64) -> bool| -> Vec<usize> {
        sdu.values
            .iter()
            .enumerate()
            .filter(|(_, v)| keep(**v))
            .map(|(k, _)| k)
            .collect()
    };
    let above = pick(&|v| v > upper);
    let below = pick(&|v| v < lower);
    Ok(PartitionReport {
        scale: sdu.scale,
        eigen_index: sdu.eigen_index,
        upper,
        lower,
        above: PartitionSide::collect(above, window_returns),
        below: PartitionSide::collect(below, window_returns),
    })
}

/// Window returns are reported in percent of the per-window aggregated
/// return; empty partitions print `NA`.
pub fn write_partition_csv<W: Write>(out: W, reports: &[PartitionReport]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scale",
        "eigen_index",
        "n_above",
        "mean_window_return_above_pct",
        "total_window_return_above_pct",
        "n_below",
        "mean_window_return_below_pct",
        "total_window_return_below_pct",
    ])?;
    let pct = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| (100.0 * x).to_string());
    for r in reports {
        w.write_record([
            r.scale.to_string(),
            r.eigen_index.to_string(),
            r.above.count().to_string(),
            pct(r.above.mean_return),
            pct((r.above.count() > 0).then_some(r.above.total_return)),
            r.below.count().to_string(),
            pct(r.below.mean_return),
            pct((r.below.count() > 0).then_some(r.below.total_return)),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneFactorCheck {
    /// `1 + (N - 1) * mean off-diagonal correlation`.
    pub predicted: f64,
    pub actual: f64,
    /// `actual - predicted`.
    pub gap: f64,
}

pub fn one_factor_check(correlation: &DMatrix<f64>) -> Result<OneFactorCheck> {
    let n = correlation.nrows();
    if n < 2 {
        return Err(Error::InvalidPanel(format!("need at least 2 assets, got {n}")));
    }
    let predicted = 1.0 + (n - 1) as f64 * average_off_diagonal(correlation);
    let actual = spectrum(correlation, false)?.max();
    Ok(OneFactorCheck {
        predicted,
        actual,
        gap: actual - predicted,
    })
}
