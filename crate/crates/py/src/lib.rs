//! Python bindings. Panels cross the boundary as lists of per-asset rows.

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use wavecorr::windows::{ScaleDynamics, WindowFailure};
use wavecorr::{ErrorClass, FailurePolicy, ReturnKind, ScaleLabel, SyntheticModel, SyntheticSpec};

create_exception!(pywavecorr, WavecorrError, PyException);
create_exception!(pywavecorr, ConfigError, WavecorrError);
create_exception!(pywavecorr, DataError, WavecorrError);
create_exception!(pywavecorr, NumericalError, WavecorrError);

fn py_err(e: wavecorr::Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::Config => ConfigError::new_err(msg),
        ErrorClass::Data => DataError::new_err(msg),
        ErrorClass::Numerical => NumericalError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for wavecorr::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let t = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != t) {
        return Err(ConfigError::new_err("rows must all have the same length"));
    }
    Ok(DMatrix::from_fn(n, t, |i, k| rows[i][k]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn panel(rows: &[Vec<f64>]) -> PyResult<wavecorr::ReturnsPanel> {
    wavecorr::ReturnsPanel::from_rows(rows).py()
}

fn filter(name: &str) -> PyResult<wavecorr::WaveletFilter> {
    wavecorr::make_filter(name).py()
}

fn label(s: &str) -> PyResult<ScaleLabel> {
    s.parse().py()
}

/// MODWT of one series.
#[pyclass(frozen, module = "pywavecorr")]
struct Decomposition {
    #[pyo3(get)]
    levels: usize,
    #[pyo3(get)]
    details: Vec<Vec<f64>>,
    #[pyo3(get)]
    smooth: Vec<f64>,
    #[pyo3(get)]
    boundary_width: Vec<usize>,
    #[pyo3(get)]
    filter: String,
}

#[pymethods]
impl Decomposition {
    /// Level-`j` detail crystal, 1-based.
    fn detail(&self, level: usize) -> PyResult<Vec<f64>> {
        level
            .checked_sub(1)
            .and_then(|j| self.details.get(j))
            .cloned()
            .ok_or_else(|| ConfigError::new_err(format!("no level {level}")))
    }

    fn __len__(&self) -> usize {
        self.smooth.len()
    }

    fn __repr__(&self) -> String {
        format!("Decomposition(filter={:?}, levels={}, len={})", self.filter, self.levels, self.smooth.len())
    }
}

#[pyfunction]
#[pyo3(signature = (series, levels, filter_name = "la8"))]
fn decompose(series: Vec<f64>, levels: usize, filter_name: &str) -> PyResult<Decomposition> {
    let d = wavecorr::decompose(&series, &filter(filter_name)?, levels).py()?;
    Ok(Decomposition {
        levels: d.levels,
        details: d.details,
        smooth: d.smooth,
        boundary_width: d.boundary_width,
        filter: d.filter_name,
    })
}

#[pyfunction]
#[pyo3(signature = (length, filter_name = "la8", min_unbiased = 1))]
fn max_level(length: usize, filter_name: &str, min_unbiased: usize) -> PyResult<usize> {
    wavecorr::max_level(length, &filter(filter_name)?, min_unbiased).py()
}

#[pyfunction]
fn raw_correlation(rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let p = panel(&rows)?;
    let c = wavecorr::raw_correlation(&p.returns, &p.asset_ids).py()?;
    Ok(to_rows(&c.correlation))
}

/// Wavelet correlation matrix of all rows at one level.
#[pyfunction]
#[pyo3(signature = (rows, level, filter_name = "la8"))]
fn wavelet_correlation(rows: Vec<Vec<f64>>, level: usize, filter_name: &str) -> PyResult<Vec<Vec<f64>>> {
    let f = filter(filter_name)?;
    let p = panel(&rows)?;
    let decs = rows
        .iter()
        .map(|r| wavecorr::decompose(r, &f, level))
        .collect::<wavecorr::Result<Vec<_>>>()
        .py()?;
    let set = wavecorr::wavelet_correlation_matrix(&decs, &p.asset_ids, level).py()?;
    Ok(to_rows(&set.correlation))
}

/// Ascending eigenvalues, plus eigenvector columns when asked.
#[pyfunction]
#[pyo3(signature = (matrix, vectors = false))]
fn spectrum(matrix: Vec<Vec<f64>>, vectors: bool) -> PyResult<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let s = wavecorr::spectrum(&to_matrix(&matrix)?, vectors).py()?;
    Ok((s.eigenvalues, s.eigenvectors.as_ref().map(to_rows)))
}

/// Values in standard-deviation units of `series[ref_start..ref_end]`.
#[pyfunction]
fn to_sdu(series: Vec<f64>, ref_start: usize, ref_end: usize) -> PyResult<Vec<f64>> {
    Ok(wavecorr::to_sdu(&series, ref_start..ref_end, 0, ScaleLabel::Raw).py()?.values)
}

#[pyfunction]
#[pyo3(signature = (model, n_assets, n_obs, seed = 0, rho = None, tick_prob = None, vol = None))]
fn generate_synthetic(
    model: &str,
    n_assets: usize,
    n_obs: usize,
    seed: u64,
    rho: Option<f64>,
    tick_prob: Option<f64>,
    vol: Option<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let model: SyntheticModel = model.parse().py()?;
    let mut spec = SyntheticSpec::new(model, n_assets, n_obs, seed);
    if let Some(r) = rho {
        spec = spec.with_rho(r);
    }
    if let Some(p) = tick_prob {
        spec = spec.with_tick_prob(p);
    }
    if let Some(v) = vol {
        spec = spec.with_vol(v);
    }
    Ok(to_rows(&wavecorr::generate_synthetic(&spec).py()?.returns))
}

/// Log (default) or simple returns of a price panel.
#[pyfunction]
#[pyo3(signature = (prices, kind = "log"))]
fn to_returns(prices: Vec<Vec<f64>>, kind: &str) -> PyResult<Vec<Vec<f64>>> {
    let kind: ReturnKind = kind.parse().py()?;
    let m = to_matrix(&prices)?;
    let ids = (0..m.nrows()).map(|i| format!("A{}", i + 1)).collect();
    let ts = (0..m.ncols() as i64).map(wavecorr::Timestamp::Index).collect();
    let p = wavecorr::PricePanel::new(ids, ts, m).py()?;
    Ok(to_rows(&wavecorr::to_returns(&p, kind).py()?.returns))
}

/// Whole-panel average correlation and top eigenvalues per scale, as
/// `(scale, horizon, avg_corr, top3)` tuples.
#[pyfunction]
#[pyo3(signature = (rows, levels, filter_name = "la8"))]
fn epps_summary(
    rows: Vec<Vec<f64>>,
    levels: usize,
    filter_name: &str,
) -> PyResult<Vec<(String, usize, f64, Vec<f64>)>> {
    let out = wavecorr::epps_summary(&panel(&rows)?, &filter(filter_name)?, levels).py()?;
    Ok(out
        .into_iter()
        .map(|r| (r.scale.to_string(), r.horizon, r.average_correlation, r.top_eigenvalues))
        .collect())
}

/// Sliding-window spectra for raw returns and each requested scale.
#[pyclass(frozen, module = "pywavecorr")]
struct Dynamics {
    #[pyo3(get)]
    window_starts: Vec<usize>,
    #[pyo3(get)]
    window_length: usize,
    #[pyo3(get)]
    q_ratio: f64,
    scales: Vec<ScaleDynamics>,
    failures: Vec<WindowFailure>,
}

impl Dynamics {
    fn get(&self, scale: &str) -> PyResult<&ScaleDynamics> {
        let s = label(scale)?;
        self.scales
            .iter()
            .find(|d| d.scale == s)
            .ok_or_else(|| ConfigError::new_err(format!("scale {scale} was not computed")))
    }
}

#[pymethods]
impl Dynamics {
    #[getter]
    fn scales(&self) -> Vec<String> {
        self.scales.iter().map(|s| s.scale.to_string()).collect()
    }

    /// Per-window ascending eigenvalues; NaN rows mark skipped windows.
    fn eigenvalues(&self, scale: &str) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.get(scale)?.eigenvalues.clone())
    }

    fn lambda_max(&self, scale: &str) -> PyResult<Vec<f64>> {
        Ok(self.get(scale)?.lambda_max())
    }

    fn average_correlation(&self, scale: &str) -> PyResult<Vec<f64>> {
        Ok(self.get(scale)?.average_correlation.clone())
    }

    /// `(window, start, message)` for each skipped window.
    #[getter]
    fn failures(&self) -> Vec<(usize, usize, String)> {
        self.failures.iter().map(|f| (f.window, f.start, f.message.clone())).collect()
    }

    fn __len__(&self) -> usize {
        self.window_starts.len()
    }
}

#[pyfunction]
#[pyo3(signature = (rows, window, levels, stride = None, filter_name = "la8", scales = None, min_unbiased = None, skip_failures = false))]
#[allow(clippy::too_many_arguments)]
fn run_dynamics(
    rows: Vec<Vec<f64>>,
    window: usize,
    levels: usize,
    stride: Option<usize>,
    filter_name: &str,
    scales: Option<Vec<String>>,
    min_unbiased: Option<usize>,
    skip_failures: bool,
) -> PyResult<Dynamics> {
    let mut plan = wavecorr::WindowPlan::new(window, levels);
    if let Some(s) = stride {
        plan = plan.with_stride(s);
    }
    if let Some(m) = min_unbiased {
        plan = plan.with_min_unbiased(m);
    }
    if let Some(s) = scales {
        plan = plan.with_scales(s.iter().map(|x| label(x)).collect::<PyResult<_>>()?);
    }
    let policy = if skip_failures { FailurePolicy::SkipAndFlag } else { FailurePolicy::Abort };
    let r = wavecorr::run_dynamics(&panel(&rows)?, &plan, &filter(filter_name)?, policy).py()?;
    Ok(Dynamics {
        window_starts: r.window_starts,
        window_length: r.window_length,
        q_ratio: r.q_ratio,
        scales: r.scales,
        failures: r.failures,
    })
}

/// Minimum-variance frontier for one covariance matrix.
#[pyclass(frozen, module = "pywavecorr")]
struct Frontier {
    inner: wavecorr::Frontier,
}

#[pymethods]
impl Frontier {
    /// `(target_return, stdev, weights)` per target.
    #[getter]
    fn points(&self) -> Vec<(f64, f64, Vec<f64>)> {
        self.inner
            .points
            .iter()
            .map(|p| (p.target_return, p.stdev, p.weights.clone()))
            .collect()
    }

    /// Global minimum-variance portfolio as `(return, stdev, weights)`.
    #[getter]
    fn gmv(&self) -> (f64, f64, Vec<f64>) {
        let g = &self.inner.gmv;
        (g.target_return, g.stdev, g.weights.clone())
    }

    fn variance_at(&self, target: f64) -> f64 {
        self.inner.variance_at(target)
    }
}

#[pyfunction]
fn min_variance_frontier(covariance: Vec<Vec<f64>>, mu: Vec<f64>, targets: Vec<f64>) -> PyResult<Frontier> {
    let cov = wavecorr::ScaleCovariance {
        scale: ScaleLabel::Raw,
        covariance: to_matrix(&covariance)?,
        source_window: (0, 0),
    };
    Ok(Frontier {
        inner: wavecorr::min_variance_frontier(&cov, &mu, &targets).py()?,
    })
}

/// Covariance `vol_i * vol_k * rho_ik` from a correlation matrix.
#[pyfunction]
fn build_covariance(correlation: Vec<Vec<f64>>, vols: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let c = wavecorr::build_covariance(&to_matrix(&correlation)?, &vols, ScaleLabel::Raw, (0, 0)).py()?;
    Ok(to_rows(&c.covariance))
}

/// Splits windows on an SDU series. Returns `(above, below)` pairs of
/// `(window indices, mean return or None)`.
#[pyfunction]
#[pyo3(signature = (sdu, window_returns, upper = 1.0, lower = -1.0))]
#[allow(clippy::type_complexity)]
fn partition_by_sdu(
    sdu: Vec<f64>,
    window_returns: Vec<f64>,
    upper: f64,
    lower: f64,
) -> PyResult<((Vec<usize>, Option<f64>), (Vec<usize>, Option<f64>))> {
    let series = wavecorr::SduSeries {
        values: sdu,
        reference_mean: 0.0,
        reference_sd: 1.0,
        eigen_index: 0,
        scale: ScaleLabel::Raw,
    };
    let r = wavecorr::partition_by_sdu(&series, &window_returns, upper, lower).py()?;
    Ok((
        (r.above.windows, r.above.mean_return),
        (r.below.windows, r.below.mean_return),
    ))
}

#[pymodule]
fn pywavecorr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("WavecorrError", py.get_type::<WavecorrError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("DataError", py.get_type::<DataError>())?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add_class::<Decomposition>()?;
    m.add_class::<Dynamics>()?;
    m.add_class::<Frontier>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(max_level, m)?)?;
    m.add_function(wrap_pyfunction!(raw_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(wavelet_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(to_sdu, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(to_returns, m)?)?;
    m.add_function(wrap_pyfunction!(epps_summary, m)?)?;
    m.add_function(wrap_pyfunction!(run_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(min_variance_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(build_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(partition_by_sdu, m)?)?;
    Ok(())
}
