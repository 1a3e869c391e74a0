//! Price/return panel loading, validation, return construction and synthetic
//! panel generation.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

/// Observation instant. A panel never mixes kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Timestamp {
    Index(i64),
    Date(NaiveDate),
    DateTime(NaiveDateTime),
}

impl Timestamp {
    fn parse(s: &str) -> Option<Timestamp> {
        let s = s.trim();
        if let Ok(i) = s.parse::<i64>() {
            return Some(Timestamp::Index(i));
        }
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Some(Timestamp::Date(d));
        }
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Some(Timestamp::DateTime(dt.naive_utc()));
        }
        ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
            .iter()
            .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
            .map(Timestamp::DateTime)
    }

    fn same_kind(&self, other: &Timestamp) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Index(i) => write!(f, "{i}"),
            Timestamp::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Timestamp::DateTime(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%S%.f")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnKind {
    #[default]
    Log,
    Simple,
}

impl std::str::FromStr for ReturnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnKind::Log),
            "simple" => Ok(ReturnKind::Simple),
            other => Err(Error::InvalidParameter(format!(
                "return kind must be log or simple, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Log => "log",
            ReturnKind::Simple => "simple",
        })
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Replace missing cells with the previous observation of the same asset.
    pub forward_fill: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            forward_fill: false,
        }
    }
}

/// N assets × T observations of strictly positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub asset_ids: Vec<String>,
    pub timestamps: Vec<Timestamp>,
    /// Rows are assets, columns are observations.
    pub prices: DMatrix<f64>,
    /// Cells replaced by forward fill while loading.
    pub filled_cells: usize,
}

impl PricePanel {
    pub fn new(
        asset_ids: Vec<String>,
        timestamps: Vec<Timestamp>,
        prices: DMatrix<f64>,
    ) -> Result<Self> {
        check_shape(&asset_ids, &timestamps, &prices, 1)?;
        check_monotone(&timestamps)?;
        for (t, col) in prices.column_iter().enumerate() {
            if let Some((i, &p)) = col.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
                return Err(Error::NonPositivePrice {
                    row: t + 2,
                    col: i + 2,
                    value: p,
                });
            }
        }
        Ok(PricePanel {
            asset_ids,
            timestamps,
            prices,
            filled_cells: 0,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.prices.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.prices.ncols()
    }
}

/// N assets × T observations of dimensionless returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    pub asset_ids: Vec<String>,
    pub timestamps: Vec<Timestamp>,
    /// Rows are assets, columns are observations.
    pub returns: DMatrix<f64>,
}

impl ReturnsPanel {
    pub fn new(
        asset_ids: Vec<String>,
        timestamps: Vec<Timestamp>,
        returns: DMatrix<f64>,
    ) -> Result<Self> {
        check_shape(&asset_ids, &timestamps, &returns, 2)?;
        for (t, col) in returns.column_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { asset: i, obs: t });
            }
        }
        Ok(ReturnsPanel {
            asset_ids,
            timestamps,
            returns,
        })
    }

    /// Panel with integer timestamps `0..T` and generated asset ids.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::InvalidPanel("rows differ in length".into()));
        }
        let returns = DMatrix::from_fn(n, t, |i, j| rows[i][j]);
        ReturnsPanel::new(
            (1..=n).map(|i| format!("A{i}")).collect(),
            (0..t as i64).map(Timestamp::Index).collect(),
            returns,
        )
    }

    pub fn n_assets(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_obs(&self) -> usize {
        self.returns.ncols()
    }

    pub fn row(&self, asset: usize) -> Vec<f64> {
        self.returns.row(asset).iter().copied().collect()
    }

    /// Sub-panel of `len` observations starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<ReturnsPanel> {
        if len < 2 || start + len > self.n_obs() {
            return Err(Error::InvalidParameter(format!(
                "window [{start}, {}) does not fit a panel of {} observations",
                start + len,
                self.n_obs()
            )));
        }
        Ok(ReturnsPanel {
            asset_ids: self.asset_ids.clone(),
            timestamps: self.timestamps[start..start + len].to_vec(),
            returns: self.returns.columns(start, len).into_owned(),
        })
    }

    /// Prices implied by treating the panel as log returns from `initial`.
    pub fn to_prices(&self, initial: f64) -> DMatrix<f64> {
        let (n, t) = self.returns.shape();
        let mut prices = DMatrix::zeros(n, t + 1);
        for i in 0..n {
            let mut cum = 0.0;
            prices[(i, 0)] = initial;
            for j in 0..t {
                cum += self.returns[(i, j)];
                prices[(i, j + 1)] = initial * cum.exp();
            }
        }
        prices
    }
}

fn check_shape(
    asset_ids: &[String],
    timestamps: &[Timestamp],
    values: &DMatrix<f64>,
    min_obs: usize,
) -> Result<()> {
    let (n, t) = values.shape();
    if n < 2 {
        return Err(Error::InvalidPanel(format!("need at least 2 assets, got {n}")));
    }
    if t < min_obs.max(1) {
        return Err(Error::InvalidPanel(format!(
            "need at least {min_obs} observations, got {t}"
        )));
    }
    if asset_ids.len() != n {
        return Err(Error::InvalidPanel(format!(
            "{} asset ids for {n} rows",
            asset_ids.len()
        )));
    }
    if timestamps.len() != t {
        return Err(Error::InvalidPanel(format!(
            "{} timestamps for {t} observations",
            timestamps.len()
        )));
    }
    Ok(())
}

fn check_monotone(timestamps: &[Timestamp]) -> Result<()> {
    for (k, w) in timestamps.windows(2).enumerate() {
        if !w[0].same_kind(&w[1]) || w[1] <= w[0] {
            return Err(Error::NonMonotoneTimestamps { row: k + 3 });
        }
    }
    Ok(())
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null" | "n/a"
    )
}

struct RawTable {
    asset_ids: Vec<String>,
    timestamps: Vec<Timestamp>,
    values: DMatrix<f64>,
    filled: usize,
}

// Row numbers in diagnostics count the header as row 1; columns are 1-based
// with the timestamp in column 1.
fn read_table<R: Read>(reader: R, opts: &LoadOptions, positive: bool) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            col: 0,
            msg: e.to_string(),
        })?
        .clone();
    if header.len() < 3 {
        return Err(Error::InvalidPanel(format!(
            "header must name a timestamp column and at least 2 assets, found {} columns",
            header.len()
        )));
    }
    let asset_ids: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let n = asset_ids.len();

    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut filled = 0;
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.len() != n + 1 {
            return Err(Error::RaggedRow {
                row,
                expected: n + 1,
                found: rec.len(),
            });
        }
        let ts = Timestamp::parse(&rec[0]).ok_or_else(|| Error::Parse {
            row,
            col: 1,
            msg: format!("unrecognised timestamp {:?}", &rec[0]),
        })?;
        if let Some(prev) = timestamps.last() {
            if !ts.same_kind(prev) || ts <= *prev {
                return Err(Error::NonMonotoneTimestamps { row });
            }
        }
        timestamps.push(ts);

        let mut values = Vec::with_capacity(n);
        for (i, cell) in rec.iter().skip(1).enumerate() {
            let col = i + 2;
            let v = if is_missing(cell) {
                match (opts.forward_fill, columns.last()) {
                    (true, Some(prev)) => {
                        filled += 1;
                        prev[i]
                    }
                    _ => return Err(Error::MissingValue { row, col }),
                }
            } else {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    row,
                    col,
                    msg: format!("not a number: {cell:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        col,
                        msg: format!("non-finite value {cell:?}"),
                    });
                }
                if positive && v <= 0.0 {
                    return Err(Error::NonPositivePrice { row, col, value: v });
                }
                v
            };
            values.push(v);
        }
        columns.push(values);
    }
    let t = columns.len();
    let values = DMatrix::from_fn(n, t, |i, j| columns[j][i]);
    Ok(RawTable {
        asset_ids,
        timestamps,
        values,
        filled,
    })
}

pub fn read_prices<R: Read>(reader: R, opts: &LoadOptions) -> Result<PricePanel> {
    let table = read_table(reader, opts, true)?;
    check_shape(&table.asset_ids, &table.timestamps, &table.values, 1)?;
    Ok(PricePanel {
        asset_ids: table.asset_ids,
        timestamps: table.timestamps,
        prices: table.values,
        filled_cells: table.filled,
    })
}

pub fn load_prices(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<PricePanel> {
    read_prices(open(path.as_ref())?, opts)
}

/// Reads a CSV whose cells are already returns (any finite value).
pub fn read_returns<R: Read>(reader: R, opts: &LoadOptions) -> Result<ReturnsPanel> {
    let table = read_table(reader, opts, false)?;
    ReturnsPanel::new(table.asset_ids, table.timestamps, table.values)
}

pub fn load_returns(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<ReturnsPanel> {
    read_returns(open(path.as_ref())?, opts)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_returns(panel: &PricePanel, kind: ReturnKind) -> Result<ReturnsPanel> {
    let (n, t) = panel.prices.shape();
    if t < 2 {
        return Err(Error::InvalidPanel(format!(
            "need at least 2 prices per asset to form returns, got {t}"
        )));
    }
    let p = &panel.prices;
    let returns = DMatrix::from_fn(n, t - 1, |i, j| {
        let ratio = p[(i, j + 1)] / p[(i, j)];
        match kind {
            ReturnKind::Log => ratio.ln(),
            ReturnKind::Simple => ratio - 1.0,
        }
    });
    ReturnsPanel::new(
        panel.asset_ids.clone(),
        panel.timestamps[1..].to_vec(),
        returns,
    )
}

/// Writes `timestamp,asset...` rows.
pub fn write_panel<W: Write>(
    out: W,
    asset_ids: &[String],
    timestamps: &[Timestamp],
    values: &DMatrix<f64>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["timestamp".to_string()];
    header.extend(asset_ids.iter().cloned());
    w.write_record(&header)?;
    for (ts, col) in timestamps.iter().zip(values.column_iter()) {
        let mut rec = vec![ts.to_string()];
        rec.extend(col.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticModel {
    IidGaussian,
    Equicorrelated,
    OneFactor,
    AsynchronousTicks,
}

impl std::str::FromStr for SyntheticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "iid-gaussian" | "iid" => Ok(SyntheticModel::IidGaussian),
            "equicorrelated" => Ok(SyntheticModel::Equicorrelated),
            "one-factor" => Ok(SyntheticModel::OneFactor),
            "asynchronous-ticks" | "async" => Ok(SyntheticModel::AsynchronousTicks),
            other => Err(Error::InvalidParameter(format!(
                "unknown synthetic model {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SyntheticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticModel::IidGaussian => "iid-gaussian",
            SyntheticModel::Equicorrelated => "equicorrelated",
            SyntheticModel::OneFactor => "one-factor",
            SyntheticModel::AsynchronousTicks => "asynchronous-ticks",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_assets: usize,
    pub n_obs: usize,
    pub model: SyntheticModel,
    /// Target pairwise correlation (latent correlation for asynchronous ticks).
    pub rho: f64,
    /// Per-tick update probability; asynchronous ticks only.
    pub tick_prob: f64,
    /// Per-observation return standard deviation.
    pub vol: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(model: SyntheticModel, n_assets: usize, n_obs: usize, seed: u64) -> Self {
        SyntheticSpec {
            n_assets,
            n_obs,
            model,
            rho: 0.0,
            tick_prob: 1.0,
            vol: 0.01,
            seed,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_tick_prob(mut self, tick_prob: f64) -> Self {
        self.tick_prob = tick_prob;
        self
    }

    pub fn with_vol(mut self, vol: f64) -> Self {
        self.vol = vol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_assets < 2 {
            return bad(format!("n_assets must be >= 2, got {}", self.n_assets));
        }
        if self.n_obs < 2 {
            return bad(format!("n_obs must be >= 2, got {}", self.n_obs));
        }
        let rho_ok = match self.model {
            SyntheticModel::OneFactor => (0.0..=1.0).contains(&self.rho),
            _ => (0.0..1.0).contains(&self.rho),
        };
        if !rho_ok {
            return bad(format!("rho {} out of range for {}", self.rho, self.model));
        }
        if !(self.tick_prob > 0.0 && self.tick_prob <= 1.0) {
            return bad(format!("tick_prob must lie in (0, 1], got {}", self.tick_prob));
        }
        if !(self.vol > 0.0 && self.vol.is_finite()) {
            return bad(format!("vol must be positive, got {}", self.vol));
        }
        Ok(())
    }
}

/// Deterministic synthetic return panel; the same spec always yields the
/// same bits.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ReturnsPanel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, t) = (spec.n_assets, spec.n_obs);
    let returns = match spec.model {
        SyntheticModel::IidGaussian => {
            gaussian_columns(&mut rng, n, t, |z| z.to_vec()).scale(spec.vol)
        }
        SyntheticModel::Equicorrelated => {
            let chol = equicorrelation_factor(n, spec.rho)?;
            gaussian_columns(&mut rng, n, t, |z| {
                (&chol * DMatrix::from_column_slice(n, 1, z)).as_slice().to_vec()
            })
            .scale(spec.vol)
        }
        SyntheticModel::OneFactor => {
            let (a, b) = (spec.rho.sqrt(), (1.0 - spec.rho).sqrt());
            let mut m = DMatrix::zeros(n, t);
            for j in 0..t {
                let market: f64 = StandardNormal.sample(&mut rng);
                for i in 0..n {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    m[(i, j)] = spec.vol * (a * market + b * eps);
                }
            }
            m
        }
        SyntheticModel::AsynchronousTicks => asynchronous_ticks(&mut rng, spec)?,
    };
    ReturnsPanel::new(
        (1..=n).map(|i| format!("A{i}")).collect(),
        (0..t as i64).map(Timestamp::Index).collect(),
        returns,
    )
}

fn gaussian_columns(
    rng: &mut ChaCha8Rng,
    n: usize,
    t: usize,
    mix: impl Fn(&[f64]) -> Vec<f64>,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, t);
    let mut z = vec![0.0; n];
    for j in 0..t {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        for (i, v) in mix(&z).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

fn equicorrelation_factor(n: usize, rho: f64) -> Result<DMatrix<f64>> {
    let c = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rho });
    c.cholesky()
        .map(|ch| ch.l())
        .ok_or_else(|| Error::InvalidParameter(format!("equicorrelation {rho} is not positive definite")))
}

// Latent equicorrelated log-price increments on a tick grid with one tick per
// observation. Each asset's observed price refreshes to the latent price with
// probability `tick_prob` per tick and is stale otherwise.
fn asynchronous_ticks(rng: &mut ChaCha8Rng, spec: &SyntheticSpec) -> Result<DMatrix<f64>> {
    let (n, t) = (spec.n_assets, spec.n_obs);
    let chol = equicorrelation_factor(n, spec.rho)?;
    let coin = Uniform::new(0.0, 1.0).expect("valid unit interval");
    let mut latent = vec![0.0; n];
    let mut observed = vec![0.0; n];
    let mut z = DMatrix::zeros(n, 1);
    let mut out = DMatrix::zeros(n, t);
    for j in 0..t {
        for i in 0..n {
            z[(i, 0)] = StandardNormal.sample(rng);
        }
        let inc = &chol * &z;
        for i in 0..n {
            latent[i] += spec.vol * inc[(i, 0)];
            let u: f64 = coin.sample(rng);
            let prev = observed[i];
            if u < spec.tick_prob {
                observed[i] = latent[i];
            }
            out[(i, j)] = observed[i] - prev;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV3: &str = "date,AAA,BBB,CCC\n\
        2020-01-01,10,20,30\n\
        2020-01-02,11,21,31\n\
        2020-01-03,12,22,32\n\
        2020-01-06,13,23,33\n\
        2020-01-07,14,24,34\n";

    #[test]
    fn parses_well_formed_csv() {
        let p = read_prices(CSV3.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(p.n_assets(), 3);
        assert_eq!(p.n_obs(), 5);
        assert_eq!(p.asset_ids, ["AAA", "BBB", "CCC"]);
        assert_eq!(p.prices[(1, 2)], 22.0);
        assert_eq!(p.timestamps[3].to_string(), "2020-01-06");
    }

    #[test]
    fn rejects_zero_price_with_location() {
        let csv = "t,A,B\n0,1,2\n1,0.0,3\n";
        let err = read_prices(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonPositivePrice { row: 3, col: 2, .. }), "{err}");
        assert!(err.to_string().starts_with("non-positive price at (row 3, col 2)"));
    }

    #[test]
    fn rejects_duplicate_timestamp() {
        let csv = "t,A,B\n0,1,2\n1,1,3\n1,2,3\n";
        let err = read_prices(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("non-monotone timestamps"));
    }

    #[test]
    fn rejects_ragged_and_malformed() {
        let ragged = "t,A,B\n0,1,2\n1,1\n";
        assert!(matches!(
            read_prices(ragged.as_bytes(), &LoadOptions::default()),
            Err(Error::RaggedRow { row: 3, expected: 3, found: 2 })
        ));
        let junk = "t,A,B\n0,1,abc\n";
        assert!(matches!(
            read_prices(junk.as_bytes(), &LoadOptions::default()),
            Err(Error::Parse { row: 2, col: 3, .. })
        ));
    }

    #[test]
    fn gaps_rejected_unless_forward_filled() {
        let csv = "t,A,B\n0,1,2\n1,,3\n2,4,NA\n";
        assert!(matches!(
            read_prices(csv.as_bytes(), &LoadOptions::default()),
            Err(Error::MissingValue { row: 3, col: 2 })
        ));
        let opts = LoadOptions {
            forward_fill: true,
            ..Default::default()
        };
        let p = read_prices(csv.as_bytes(), &opts).unwrap();
        assert_eq!(p.filled_cells, 2);
        assert_eq!(p.prices[(0, 1)], 1.0);
        assert_eq!(p.prices[(1, 2)], 3.0);
        // nothing to fill from on the first row
        let lead = "t,A,B\n0,,2\n1,1,3\n";
        assert!(read_prices(lead.as_bytes(), &opts).is_err());
    }

    #[test]
    fn log_and_simple_returns() {
        let e = std::f64::consts::E;
        let p = PricePanel::new(
            vec!["x".into(), "y".into()],
            (0..3).map(Timestamp::Index).collect(),
            DMatrix::from_row_slice(2, 3, &[1.0, e, e * e, 5.0, 5.0, 5.0]),
        )
        .unwrap();
        let r = to_returns(&p, ReturnKind::Log).unwrap();
        assert_eq!(r.n_obs(), 2);
        assert!((r.returns[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((r.returns[(0, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(r.row(1), vec![0.0, 0.0]);
        let s = to_returns(&p, ReturnKind::Simple).unwrap();
        assert_eq!(s.row(1), vec![0.0, 0.0]);

        let q = PricePanel::new(
            vec!["x".into(), "y".into()],
            (0..3).map(Timestamp::Index).collect(),
            DMatrix::from_row_slice(2, 3, &[100.0, 110.0, 99.0, 1.0, 1.0, 1.0]),
        )
        .unwrap();
        let s = to_returns(&q, ReturnKind::Simple).unwrap();
        assert!((s.returns[(0, 0)] - 0.10).abs() < 1e-15);
        assert!((s.returns[(0, 1)] + 0.10).abs() < 1e-15);
    }

    #[test]
    fn one_factor_rho_one_is_degenerate() {
        let spec = SyntheticSpec::new(SyntheticModel::OneFactor, 4, 50, 3).with_rho(1.0);
        let p = generate_synthetic(&spec).unwrap();
        for i in 1..4 {
            assert_eq!(p.row(i), p.row(0));
        }
    }

    #[test]
    fn synthetic_parameter_ranges() {
        let base = SyntheticSpec::new(SyntheticModel::Equicorrelated, 3, 10, 0);
        assert!(generate_synthetic(&base.clone().with_rho(1.0)).is_err());
        assert!(generate_synthetic(&base.clone().with_rho(-0.1)).is_err());
        assert!(generate_synthetic(&base.clone().with_tick_prob(0.0)).is_err());
        assert!(generate_synthetic(&SyntheticSpec::new(SyntheticModel::IidGaussian, 1, 10, 0)).is_err());
    }

    #[test]
    fn asynchronous_ticks_leave_stale_zeros() {
        let spec = SyntheticSpec::new(SyntheticModel::AsynchronousTicks, 3, 2000, 9)
            .with_rho(0.5)
            .with_tick_prob(0.3);
        let p = generate_synthetic(&spec).unwrap();
        let zeros = p.returns.iter().filter(|v| **v == 0.0).count() as f64;
        let frac = zeros / (3.0 * 2000.0);
        assert!((frac - 0.7).abs() < 0.03, "stale fraction {frac}");
    }

    #[test]
    fn timestamps_parse_variants() {
        assert_eq!(Timestamp::parse("17"), Some(Timestamp::Index(17)));
        assert!(matches!(Timestamp::parse("2008-05-01T09:01:00"), Some(Timestamp::DateTime(_))));
        assert!(matches!(Timestamp::parse("2008-05-01 09:01"), Some(Timestamp::DateTime(_))));
        assert!(matches!(Timestamp::parse("2008-05-01T09:01:00Z"), Some(Timestamp::DateTime(_))));
        assert_eq!(Timestamp::parse("yesterday"), None);
    }
}
