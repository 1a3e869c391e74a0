//! Each command loads and validates everything first, computes in memory,
//! and only then creates the output directory.

use std::fmt;
use std::path::Path;

use wavecorr::analysis::write_partition_csv;
use wavecorr::eigen::write_eigen_csv;
use wavecorr::ingest::write_panel;
use wavecorr::portfolio::{sample_moments, write_frontier_csv, write_gmv_csv};
use wavecorr::windows::write_epps_csv;
use wavecorr::{
    aggregate_window_returns, decompose, epps_summary, frontier_by_scale, generate_synthetic,
    index_returns, load_prices, load_returns, make_filter, max_level, partition_by_sdu,
    run_dynamics, to_returns, to_sdu, DynamicsResult, ErrorClass, LoadOptions, ReturnsPanel,
    ScaleLabel, Timestamp, WaveletFilter, WindowPlan,
};

use crate::config::{ConfigError, InputKind, RunConfig, Settings, Source};
use crate::plot::{LinePlot, Series};

const MAX_AUTO_LEVELS: usize = 6;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(wavecorr::Error),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Output(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => {
                let kind = match e.class() {
                    ErrorClass::Config => "config error",
                    ErrorClass::Data => "data error",
                    ErrorClass::Numerical => "numerical error",
                };
                write!(f, "{kind}: {e}")
            }
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<wavecorr::Error> for CliError {
    fn from(e: wavecorr::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

type Res<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Dynamics,
    Epps,
    Partition,
    Optimize,
    Synth,
}

/// Files produced by a command, in write order.
#[derive(Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Vec<String>,
}

impl Outputs {
    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Res<()> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| CliError::Output(format!("{name}: {e}")))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    pub fn write_to(&self, dir: &Path) -> Res<()> {
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)
                .map_err(|e| CliError::Output(format!("{}: {e}", dir.join(name).display())))?;
        }
        Ok(())
    }
}

pub fn run(command: Command, settings: &Settings) -> Res<Outputs> {
    let cfg = RunConfig::from_settings(settings)?;
    let filter = make_filter(&cfg.filter)?;
    let mut out = match command {
        Command::Synth => synth(&cfg)?,
        _ => {
            let panel = load_panel(&cfg)?;
            match command {
                Command::Decompose => cmd_decompose(&cfg, &panel, &filter)?,
                Command::Dynamics => cmd_dynamics(&cfg, &panel, &filter)?,
                Command::Epps => cmd_epps(&cfg, &panel, &filter)?,
                Command::Partition => cmd_partition(&cfg, &panel, &filter)?,
                Command::Optimize => cmd_optimize(&cfg, &panel, &filter)?,
                Command::Synth => unreachable!(),
            }
        }
    };
    // the output location is not part of the run, so reruns elsewhere match
    out.text("run_config.txt", settings.without("out").to_text());
    Ok(out)
}

fn load_panel(cfg: &RunConfig) -> Res<ReturnsPanel> {
    let opts = LoadOptions {
        delimiter: cfg.delimiter,
        forward_fill: cfg.forward_fill,
    };
    Ok(match &cfg.source {
        Source::File { path, kind: InputKind::Prices } => {
            to_returns(&load_prices(path, &opts)?, cfg.return_kind)?
        }
        Source::File { path, kind: InputKind::Returns } => load_returns(path, &opts)?,
        Source::Synthetic(spec) => generate_synthetic(spec)?,
    })
}

/// Requested levels checked against `len`, or the deepest admissible level
/// (capped) when none were requested.
fn resolve_levels(cfg: &RunConfig, len: usize, filter: &WaveletFilter) -> Res<usize> {
    let max = max_level(len, filter, cfg.min_unbiased)?;
    let wanted = cfg.levels.or_else(|| {
        cfg.scales.as_ref().and_then(|s| {
            s.iter()
                .filter_map(|l| match l {
                    ScaleLabel::Level(j) => Some(*j),
                    ScaleLabel::Raw => None,
                })
                .max()
        })
    });
    match wanted {
        Some(l) if l > max => Err(wavecorr::Error::TooManyLevels {
            requested: l,
            max_level: max,
        }
        .into()),
        Some(l) => Ok(l),
        None if max == 0 => Err(wavecorr::Error::TooManyLevels {
            requested: 1,
            max_level: 0,
        }
        .into()),
        None => Ok(max.min(MAX_AUTO_LEVELS)),
    }
}

fn scale_file(scale: ScaleLabel) -> String {
    match scale {
        ScaleLabel::Raw => "raw".into(),
        ScaleLabel::Level(j) => format!("d{j}"),
    }
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn synth(cfg: &RunConfig) -> Res<Outputs> {
    let Source::Synthetic(spec) = &cfg.source else {
        return Err(CliError::Config("synth needs synthetic = <model>".into()));
    };
    let panel = generate_synthetic(spec)?;
    let prices = panel.to_prices(100.0);
    let stamps: Vec<Timestamp> = (0..prices.ncols() as i64).map(Timestamp::Index).collect();
    let mut out = Outputs::default();
    out.csv("prices.csv", |b| write_panel(b, &panel.asset_ids, &stamps, &prices))?;
    out.summary.push(format!(
        "{} panel: {} assets, {} prices",
        spec.model,
        panel.n_assets(),
        prices.ncols()
    ));
    Ok(out)
}

fn cmd_decompose(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<Outputs> {
    let levels = resolve_levels(cfg, panel.n_obs(), filter)?;
    let decs = (0..panel.n_assets())
        .map(|i| decompose(&panel.row(i), filter, levels))
        .collect::<wavecorr::Result<Vec<_>>>()?;
    let mut out = Outputs::default();
    let mut summary = String::from("asset,crystal,tau,boundary_width,unbiased_count,energy\n");
    for (k, (id, dec)) in panel.asset_ids.iter().zip(&decs).enumerate() {
        out.csv(&format!("crystals_{}_{}.csv", k + 1, file_safe(id)), |b| dec.write_csv(b))?;
        for j in 1..=levels {
            let energy: f64 = dec.detail(j).iter().map(|v| v * v).sum();
            summary.push_str(&format!(
                "{id},d{j},{},{},{},{energy}\n",
                wavecorr::modwt::scale_tau(j),
                dec.boundary_width[j - 1],
                dec.unbiased_count(j)
            ));
        }
        let energy: f64 = dec.smooth.iter().map(|v| v * v).sum();
        summary.push_str(&format!("{id},s{levels},,,,{energy}\n"));
    }
    out.text("crystal_energy.csv", summary);
    out.summary.push(format!(
        "{} assets, {} observations, {levels} levels ({})",
        panel.n_assets(),
        panel.n_obs(),
        filter.name
    ));
    Ok(out)
}

fn plan_for(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<WindowPlan> {
    let window = cfg.window.unwrap_or(100);
    if window > panel.n_obs() {
        return Err(CliError::Config(format!(
            "window {window} exceeds the {} available observations",
            panel.n_obs()
        )));
    }
    let levels = resolve_levels(cfg, window, filter)?;
    let mut plan = WindowPlan::new(window, levels).with_min_unbiased(cfg.min_unbiased);
    if let Some(s) = cfg.stride {
        plan = plan.with_stride(s);
    }
    if let Some(scales) = &cfg.scales {
        plan = plan.with_scales(scales.clone());
    }
    plan.validate(filter)?;
    Ok(plan)
}

fn dynamics_plot(res: &DynamicsResult, scale: ScaleLabel) -> Option<LinePlot> {
    let s = res.scale(scale)?;
    let n = res.n_assets;
    let x: Vec<f64> = res.window_starts.iter().map(|&v| v as f64).collect();
    let names = ["largest", "2nd", "3rd"];
    let series = (0..n.min(3))
        .map(|r| Series {
            label: format!("lambda {}", names[r]),
            points: x.iter().copied().zip(s.eigen_series(n - r)).collect(),
        })
        .collect();
    Some(LinePlot {
        title: format!("Eigenvalue dynamics, scale {scale}"),
        x_label: "window start".into(),
        y_label: "eigenvalue".into(),
        series,
    })
}

fn dynamics_outputs(out: &mut Outputs, res: &DynamicsResult) -> Res<()> {
    out.csv("dynamics_long.csv", |b| res.write_long_csv(b))?;
    for s in &res.scales {
        let name = scale_file(s.scale);
        out.csv(&format!("dynamics_{name}.csv"), |b| res.write_wide_csv(s.scale, b))?;
        if let Some(plot) = dynamics_plot(res, s.scale) {
            out.text(&format!("dynamics_{name}.svg"), plot.to_svg());
        }
    }
    let rows = res.scales.iter().flat_map(|s| {
        res.window_starts
            .iter()
            .zip(&s.eigenvalues)
            .map(move |(&start, e)| (start, s.scale, e.as_slice()))
    });
    out.csv("eigen_top3.csv", |b| write_eigen_csv(b, rows, Some(3)))?;
    let mut failures = String::from("window,start,message\n");
    for f in &res.failures {
        failures.push_str(&format!("{},{},\"{}\"\n", f.window, f.start, f.message.replace('"', "'")));
    }
    out.text("failures.csv", failures);
    Ok(())
}

fn cmd_dynamics(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<Outputs> {
    let plan = plan_for(cfg, panel, filter)?;
    let res = run_dynamics(panel, &plan, filter, cfg.on_failure)?;
    let mut out = Outputs::default();
    dynamics_outputs(&mut out, &res)?;
    out.summary.push(format!(
        "{} windows of {} (stride {}), Q = {:.4}, {} failed",
        res.n_windows(),
        res.window_length,
        res.stride,
        res.q_ratio,
        res.failures.len()
    ));
    Ok(out)
}

fn cmd_epps(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<Outputs> {
    let levels = resolve_levels(cfg, panel.n_obs(), filter)?;
    let rows = epps_summary(panel, filter, levels)?;
    let mut out = Outputs::default();
    out.csv("epps.csv", |b| write_epps_csv(b, &rows))?;
    for r in &rows {
        out.summary.push(format!(
            "scale {:>3}: avg corr {:.4}, lambda_max {:.4}",
            r.scale.to_string(),
            r.average_correlation,
            r.top_eigenvalues.first().copied().unwrap_or(f64::NAN)
        ));
    }
    Ok(out)
}

fn cmd_partition(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<Outputs> {
    let plan = plan_for(cfg, panel, filter)?;
    let n = panel.n_assets();
    if let Some(&r) = cfg.eigen_ranks.iter().find(|&&r| r > n) {
        return Err(CliError::Config(format!("eigen rank {r} exceeds the {n} assets")));
    }
    let weights = cfg.weights.as_deref();
    let index = index_returns(&panel.returns, weights)?;
    let total = plan.window_starts(panel.n_obs()).len();
    let reference = cfg.sdu_reference.unwrap_or((0, total));
    if reference.1 > total {
        return Err(CliError::Config(format!(
            "sdu_reference {}:{} exceeds the {total} windows",
            reference.0, reference.1
        )));
    }

    let res = run_dynamics(panel, &plan, filter, cfg.on_failure)?;
    let window_returns =
        aggregate_window_returns(&index, &res.window_starts, plan.window_length, cfg.return_kind)?;
    let mut reports = Vec::new();
    let mut sdu_csv = String::from("window_start,scale,eigen_index,lambda,sdu,window_return_pct\n");
    for s in &res.scales {
        for &rank in &cfg.eigen_ranks {
            let idx = n + 1 - rank;
            let series = s.eigen_series(idx);
            let sdu = to_sdu(&series, reference.0..reference.1, idx, s.scale)?;
            for (k, start) in res.window_starts.iter().enumerate() {
                sdu_csv.push_str(&format!(
                    "{start},{},{idx},{},{},{}\n",
                    s.scale,
                    series[k],
                    sdu.values[k],
                    100.0 * window_returns[k]
                ));
            }
            reports.push(partition_by_sdu(&sdu, &window_returns, cfg.upper, cfg.lower)?);
        }
    }
    let mut out = Outputs::default();
    out.csv("partition.csv", |b| write_partition_csv(b, &reports))?;
    out.text("sdu.csv", sdu_csv);
    for r in &reports {
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{:.4}%", 100.0 * x));
        out.summary.push(format!(
            "scale {:>3} eigen {}: >{} n={} mean {}, <{} n={} mean {}",
            r.scale.to_string(),
            r.eigen_index,
            r.upper,
            r.above.count(),
            fmt(r.above.mean_return),
            r.lower,
            r.below.count(),
            fmt(r.below.mean_return)
        ));
    }
    Ok(out)
}

fn cmd_optimize(cfg: &RunConfig, panel: &ReturnsPanel, filter: &WaveletFilter) -> Res<Outputs> {
    let n = panel.n_assets();
    let start = cfg.window_start;
    if start + 2 > panel.n_obs() {
        return Err(CliError::Config(format!(
            "window_start {start} leaves fewer than 2 of {} observations",
            panel.n_obs()
        )));
    }
    let len = cfg.window.unwrap_or(panel.n_obs() - start);
    if start + len > panel.n_obs() {
        return Err(CliError::Config(format!(
            "window [{start}, {}) exceeds the {} observations",
            start + len,
            panel.n_obs()
        )));
    }
    for (key, v) in [("mu", &cfg.mu), ("vols", &cfg.vols)] {
        if let Some(v) = v {
            if v.len() != n {
                return Err(CliError::Config(format!("{key} has {} entries for {n} assets", v.len())));
            }
        }
    }
    let levels = resolve_levels(cfg, len, filter)?;
    let (mean, _) = sample_moments(panel);
    let mu = cfg.mu.clone().unwrap_or(mean);
    let targets = cfg.targets.clone().unwrap_or_else(|| {
        let lo = mu.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = cfg.n_targets - 1;
        (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
    });

    let mut fronts = frontier_by_scale(
        panel,
        (start, len),
        filter,
        levels,
        Some(&mu),
        cfg.vols.as_deref(),
        &targets,
    )?;
    if let Some(scales) = &cfg.scales {
        fronts.retain(|f| scales.contains(&f.covariance.scale));
    }
    let mut out = Outputs::default();
    out.csv("frontier.csv", |b| write_frontier_csv(b, &fronts))?;
    out.csv("gmv.csv", |b| write_gmv_csv(b, &fronts))?;
    let plot = LinePlot {
        title: format!("Minimum-variance frontiers, window [{start}, {})", start + len),
        x_label: "portfolio standard deviation".into(),
        y_label: "target return".into(),
        series: fronts
            .iter()
            .map(|f| Series {
                label: format!("scale {}", f.covariance.scale),
                points: f.frontier.points.iter().map(|p| (p.stdev, p.target_return)).collect(),
            })
            .collect(),
    };
    out.text("frontier.svg", plot.to_svg());
    for f in &fronts {
        out.summary.push(format!(
            "scale {:>3}: GMV stdev {:.6} at return {:.6}",
            f.covariance.scale.to_string(),
            f.frontier.gmv.stdev,
            f.frontier.gmv.target_return
        ));
    }
    Ok(out)
}
