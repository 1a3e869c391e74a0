//! Sliding-window eigenvalue dynamics across scales.
//!
//! Every window is decomposed from scratch, so boundary coefficients are
//! those of the window itself rather than of a global transform.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::eigen::{spectrum, EigenRecord, ScaleLabel, Spectrum};
use crate::error::{Error, Result};
use crate::ingest::ReturnsPanel;
use crate::modwt::{decompose, max_level, scale_tau, WaveletFilter};
use crate::wavestats::{average_off_diagonal, raw_correlation, wavelet_correlation_matrix};

pub const DEFAULT_MIN_UNBIASED: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    /// Observations per window.
    pub window_length: usize,
    /// Observations between consecutive window starts.
    pub stride: usize,
    pub levels: usize,
    pub min_unbiased: usize,
    pub scales: Vec<ScaleLabel>,
}

impl WindowPlan {
    /// Raw plus every level up to `levels`, stride of a tenth of a window.
    pub fn new(window_length: usize, levels: usize) -> Self {
        let mut scales = vec![ScaleLabel::Raw];
        scales.extend((1..=levels).map(ScaleLabel::Level));
        WindowPlan {
            window_length,
            stride: (window_length / 10).max(1),
            levels,
            min_unbiased: DEFAULT_MIN_UNBIASED,
            scales,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_scales(mut self, scales: Vec<ScaleLabel>) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_min_unbiased(mut self, min_unbiased: usize) -> Self {
        self.min_unbiased = min_unbiased;
        self
    }

    /// Window length over asset count.
    pub fn q_ratio(&self, n_assets: usize) -> f64 {
        self.window_length as f64 / n_assets as f64
    }

    pub fn validate(&self, filter: &WaveletFilter) -> Result<()> {
        if self.window_length < 2 {
            return Err(Error::InvalidParameter(format!(
                "window length must be >= 2, got {}",
                self.window_length
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if self.scales.is_empty() {
            return Err(Error::InvalidParameter("no scales requested".into()));
        }
        let deepest = self.deepest_level();
        if deepest > self.levels {
            return Err(Error::InvalidParameter(format!(
                "scale {deepest} requested but only {} levels planned",
                self.levels
            )));
        }
        if self.levels > 0 {
            let max = max_level(self.window_length, filter, self.min_unbiased)?;
            if self.levels > max {
                return Err(Error::TooManyLevels {
                    requested: self.levels,
                    max_level: max,
                });
            }
        }
        Ok(())
    }

    fn deepest_level(&self) -> usize {
        self.scales
            .iter()
            .filter_map(|s| match s {
                ScaleLabel::Level(j) => Some(*j),
                ScaleLabel::Raw => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn window_starts(&self, total: usize) -> Vec<usize> {
        if total < self.window_length || self.stride == 0 {
            return Vec::new();
        }
        let count = (total - self.window_length) / self.stride + 1;
        (0..count).map(|k| k * self.stride).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    #[default]
    Abort,
    /// Record the failure, fill the window with NaN and continue.
    SkipAndFlag,
}

/// Spectrum and mean off-diagonal correlation of one scale in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSnapshot {
    pub scale: ScaleLabel,
    pub spectrum: Spectrum,
    pub average_correlation: f64,
    /// Samples behind the estimate: `M_j` for wavelet scales, `T` for raw.
    pub samples: usize,
}

/// Correlation spectra of one block of returns at the requested scales.
pub fn analyze_window(
    returns: &DMatrix<f64>,
    asset_ids: &[String],
    filter: &WaveletFilter,
    scales: &[ScaleLabel],
) -> Result<Vec<ScaleSnapshot>> {
    let deepest = scales
        .iter()
        .filter_map(|s| match s {
            ScaleLabel::Level(j) => Some(*j),
            ScaleLabel::Raw => None,
        })
        .max()
        .unwrap_or(0);
    let decs = if deepest > 0 {
        (0..returns.nrows())
            .map(|i| {
                let row: Vec<f64> = returns.row(i).iter().copied().collect();
                decompose(&row, filter, deepest)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    scales
        .iter()
        .map(|&scale| {
            let (corr, samples) = match scale {
                ScaleLabel::Raw => {
                    let raw = raw_correlation(returns, asset_ids)?;
                    (raw.correlation, raw.window_length)
                }
                ScaleLabel::Level(j) => {
                    let set = wavelet_correlation_matrix(&decs, asset_ids, j)?;
                    (set.correlation, set.m_j)
                }
            };
            Ok(ScaleSnapshot {
                scale,
                spectrum: spectrum(&corr, false)?,
                average_correlation: average_off_diagonal(&corr),
                samples,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleDynamics {
    pub scale: ScaleLabel,
    /// Ascending eigenvalues per window; NaN rows mark skipped windows.
    pub eigenvalues: Vec<Vec<f64>>,
    pub average_correlation: Vec<f64>,
}

impl ScaleDynamics {
    /// Series of the `k`-th eigenvalue in ascending order (1-based).
    pub fn eigen_series(&self, k: usize) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e[k - 1]).collect()
    }

    pub fn lambda_max(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| *e.last().unwrap()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFailure {
    pub window: usize,
    pub start: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsResult {
    pub n_assets: usize,
    pub window_length: usize,
    pub stride: usize,
    pub q_ratio: f64,
    pub window_starts: Vec<usize>,
    pub scales: Vec<ScaleDynamics>,
    pub failures: Vec<WindowFailure>,
}

impl DynamicsResult {
    pub fn n_windows(&self) -> usize {
        self.window_starts.len()
    }

    pub fn scale(&self, scale: ScaleLabel) -> Option<&ScaleDynamics> {
        self.scales.iter().find(|s| s.scale == scale)
    }

    pub fn records(&self) -> impl Iterator<Item = EigenRecord> + '_ {
        self.scales.iter().flat_map(|s| {
            s.eigenvalues.iter().enumerate().map(move |(w, e)| EigenRecord {
                window_index: w,
                scale: s.scale,
                spectrum: Spectrum {
                    eigenvalues: e.clone(),
                    eigenvectors: None,
                },
            })
        })
    }

    /// Long format: `window_start, scale, metric, value`.
    pub fn write_long_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["window_start", "scale", "metric", "value"])?;
        for s in &self.scales {
            let label = s.scale.to_string();
            for (k, start) in self.window_starts.iter().enumerate() {
                let start = start.to_string();
                w.write_record([&start, &label, "avg_corr", &s.average_correlation[k].to_string()])?;
                for (i, v) in s.eigenvalues[k].iter().enumerate() {
                    w.write_record([&start, &label, &format!("lambda_{}", i + 1), &v.to_string()])?;
                }
            }
        }
        w.flush()
    }

    /// Wide format for one scale: `window_start, avg_corr, lambda_1..lambda_N`.
    pub fn write_wide_csv<W: Write>(&self, scale: ScaleLabel, out: W) -> std::io::Result<()> {
        let s = self
            .scale(scale)
            .ok_or_else(|| std::io::Error::other(format!("scale {scale} not in result")))?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["window_start".to_string(), "avg_corr".to_string()];
        header.extend((1..=self.n_assets).map(|i| format!("lambda_{i}")));
        w.write_record(&header)?;
        for (k, start) in self.window_starts.iter().enumerate() {
            let mut rec = vec![start.to_string(), s.average_correlation[k].to_string()];
            rec.extend(s.eigenvalues[k].iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

pub fn run_dynamics(
    panel: &ReturnsPanel,
    plan: &WindowPlan,
    filter: &WaveletFilter,
    policy: FailurePolicy,
) -> Result<DynamicsResult> {
    plan.validate(filter)?;
    let total = panel.n_obs();
    if total < plan.window_length {
        return Err(Error::InvalidParameter(format!(
            "panel has {total} observations, window needs {}",
            plan.window_length
        )));
    }
    let n = panel.n_assets();
    let starts = plan.window_starts(total);

    let outcomes: Vec<Result<Vec<ScaleSnapshot>>> = starts
        .par_iter()
        .enumerate()
        .map(|(k, &start)| {
            let block = panel.returns.columns(start, plan.window_length).into_owned();
            analyze_window(&block, &panel.asset_ids, filter, &plan.scales)
                .map_err(|e| e.in_window(k, start))
        })
        .collect();

    let mut scales: Vec<ScaleDynamics> = plan
        .scales
        .iter()
        .map(|&scale| ScaleDynamics {
            scale,
            eigenvalues: Vec::with_capacity(starts.len()),
            average_correlation: Vec::with_capacity(starts.len()),
        })
        .collect();
    let mut failures = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(snaps) => {
                for (dst, snap) in scales.iter_mut().zip(snaps) {
                    dst.eigenvalues.push(snap.spectrum.eigenvalues);
                    dst.average_correlation.push(snap.average_correlation);
                }
            }
            Err(err) => match policy {
                FailurePolicy::Abort => return Err(err),
                FailurePolicy::SkipAndFlag => {
                    failures.push(WindowFailure {
                        window: k,
                        start: starts[k],
                        message: err.to_string(),
                    });
                    for dst in scales.iter_mut() {
                        dst.eigenvalues.push(vec![f64::NAN; n]);
                        dst.average_correlation.push(f64::NAN);
                    }
                }
            },
        }
    }
    Ok(DynamicsResult {
        n_assets: n,
        window_length: plan.window_length,
        stride: plan.stride,
        q_ratio: plan.q_ratio(n),
        window_starts: starts,
        scales,
        failures,
    })
}

/// One row of the full-sample correlation and eigenspectrum table.
#[derive(Debug, Clone, PartialEq)]
pub struct EppsRow {
    pub scale: ScaleLabel,
    /// Dyadic horizon `2^(j-1)` in base periods; 1 for raw returns.
    pub horizon: usize,
    pub average_correlation: f64,
    /// The three largest eigenvalues, largest first.
    pub top_eigenvalues: Vec<f64>,
    pub samples: usize,
}

/// Average correlation and leading eigenvalues of the whole panel, raw and at
/// every level up to `levels`.
pub fn epps_summary(
    panel: &ReturnsPanel,
    filter: &WaveletFilter,
    levels: usize,
) -> Result<Vec<EppsRow>> {
    let mut scales = vec![ScaleLabel::Raw];
    scales.extend((1..=levels).map(ScaleLabel::Level));
    let snaps = analyze_window(&panel.returns, &panel.asset_ids, filter, &scales)?;
    Ok(snaps.into_iter().map(EppsRow::from).collect())
}

impl From<ScaleSnapshot> for EppsRow {
    fn from(s: ScaleSnapshot) -> Self {
        EppsRow {
            scale: s.scale,
            horizon: match s.scale {
                ScaleLabel::Raw => 1,
                ScaleLabel::Level(j) => scale_tau(j),
            },
            average_correlation: s.average_correlation,
            top_eigenvalues: s.spectrum.top(3),
            samples: s.samples,
        }
    }
}

/// `scale, horizon, avg_offdiag_corr, lambda_max, lambda_2nd, lambda_3rd, samples`.
pub fn write_epps_csv<W: Write>(out: W, rows: &[EppsRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scale",
        "horizon",
        "avg_offdiag_corr",
        "lambda_max",
        "lambda_2nd",
        "lambda_3rd",
        "samples",
    ])?;
    for r in rows {
        let mut rec = vec![
            r.scale.to_string(),
            r.horizon.to_string(),
            r.average_correlation.to_string(),
        ];
        for k in 0..3 {
            rec.push(r.top_eigenvalues.get(k).map(|v| v.to_string()).unwrap_or_default());
        }
        rec.push(r.samples.to_string());
        w.write_record(&rec)?;
    }
    w.flush()
}
