//! Symmetric eigendecomposition and standard-deviation-unit normalisation of
//! eigenvalue time-series.

use std::fmt;
use std::io::Write;
use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;

/// Which correlation matrix a record came from: the unfiltered returns or a
/// wavelet level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScaleLabel {
    Raw,
    Level(usize),
}

impl fmt::Display for ScaleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleLabel::Raw => f.write_str("raw"),
            ScaleLabel::Level(j) => write!(f, "{j}"),
        }
    }
}

impl std::str::FromStr for ScaleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("raw") {
            return Ok(ScaleLabel::Raw);
        }
        match s.trim_start_matches(['d', 'D']).parse::<usize>() {
            Ok(j) if j >= 1 => Ok(ScaleLabel::Level(j)),
            _ => Err(Error::InvalidParameter(format!(
                "scale must be \"raw\" or a level >= 1, got {s:?}"
            ))),
        }
    }
}

/// Eigenvalues in ascending order with optional matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// The `k` largest eigenvalues, largest first.
    pub fn top(&self, k: usize) -> Vec<f64> {
        self.eigenvalues.iter().rev().take(k).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub window_index: usize,
    pub scale: ScaleLabel,
    pub spectrum: Spectrum,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is signed so that its
/// largest-magnitude component is positive.
pub fn spectrum(matrix: &DMatrix<f64>, want_vectors: bool) -> Result<Spectrum> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "expected a non-empty square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let scale = matrix.amax().max(1.0);
    let asym = (matrix - matrix.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }

    // row-major working copy, symmetrised
    let mut a: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (matrix[(i, j)] + matrix[(j, i)])
        })
        .collect();
    let mut v: Vec<f64> = if want_vectors {
        (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
    } else {
        Vec::new()
    };

    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= OFF_DIAGONAL_TOL * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = want_vectors.then(|| {
        let mut m = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
        for mut col in m.column_iter_mut() {
            let lead = col.iter().copied().fold(0.0f64, |best, x| {
                if x.abs() > best.abs() {
                    x
                } else {
                    best
                }
            });
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        m
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

// Annihilates a[p][q] with one plane rotation, accumulating into v when
// eigenvectors are requested.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let (app, aqq) = (a[p * n + p], a[q * n + q]);
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let (akp, akq) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    if !v.is_empty() {
        for k in 0..n {
            let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
            v[k * n + p] = c * vkp - s * vkq;
            v[k * n + q] = s * vkp + c * vkq;
        }
    }
}

/// Eigenvalue series expressed in standard-deviation units of a reference
/// period.
#[derive(Debug, Clone, PartialEq)]
pub struct SduSeries {
    pub values: Vec<f64>,
    pub reference_mean: f64,
    pub reference_sd: f64,
    pub eigen_index: usize,
    pub scale: ScaleLabel,
}

/// `(lambda(t) - mean) / sd` with mean and (population) sd taken over
/// `reference`. Non-finite entries, such as skipped windows, are ignored in
/// the reference statistics and stay non-finite.
pub fn to_sdu(
    series: &[f64],
    reference: Range<usize>,
    eigen_index: usize,
    scale: ScaleLabel,
) -> Result<SduSeries> {
    if reference.end > series.len() || reference.start >= reference.end {
        return Err(Error::InvalidParameter(format!(
            "reference range {reference:?} does not fit a series of length {}",
            series.len()
        )));
    }
    let window: Vec<f64> = series[reference.clone()]
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if window.len() < 2 {
        return Err(Error::InvalidParameter(
            "reference range needs at least 2 finite points".into(),
        ));
    }
    let m = window.len() as f64;
    let mean = window.iter().sum::<f64>() / m;
    let sd = (window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m).sqrt();
    let magnitude = window.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(sd > 1e-14 * magnitude) {
        return Err(Error::ZeroVariance {
            asset: format!("eigenvalue {eigen_index} ({scale})"),
            scale: None,
        });
    }
    Ok(SduSeries {
        values: series.iter().map(|v| (v - mean) / sd).collect(),
        reference_mean: mean,
        reference_sd: sd,
        eigen_index,
        scale,
    })
}

/// Writes `window_start, scale, lambda_1..lambda_k` rows. `lambda_1` is the
/// smallest eigenvalue unless `top` limits the output to the largest `top`,
/// in which case `lambda_1` is the largest.
pub fn write_eigen_csv<'a, W: Write>(
    out: W,
    rows: impl IntoIterator<Item = (usize, ScaleLabel, &'a [f64])>,
    top: Option<usize>,
) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut wrote_header = false;
    for (start, scale, values) in rows {
        let picked: Vec<f64> = match top {
            Some(k) => values.iter().rev().take(k).copied().collect(),
            None => values.to_vec(),
        };
        if !wrote_header {
            let mut header = vec!["window_start".to_string(), "scale".to_string()];
            header.extend((1..=picked.len()).map(|i| format!("lambda_{i}")));
            w.write_record(&header)?;
            wrote_header = true;
        }
        let mut rec = vec![start.to_string(), scale.to_string()];
        rec.extend(picked.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}
