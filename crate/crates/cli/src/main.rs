//! `wavecorr` command-line front end.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Command};
use config::Settings;

#[derive(Parser)]
#[command(name = "wavecorr", version, about = "Multiscale correlation dynamics of return panels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-asset MODWT crystals
    Decompose(RunArgs),
    /// Sliding-window eigenvalue dynamics for raw returns and each scale
    Dynamics(RunArgs),
    /// Full-sample average correlation and leading eigenvalues per scale
    Epps(RunArgs),
    /// Index returns over windows with extreme eigenvalues, in SDU
    Partition(RunArgs),
    /// Minimum-variance frontiers per scale
    Optimize(RunArgs),
    /// Write a synthetic price panel
    Synth(RunArgs),
}

/// Flags mirror the config keys and override the config file.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV: a timestamp column followed by one column per asset
    #[arg(long)]
    input: Option<String>,
    /// prices (default) or returns
    #[arg(long)]
    input_kind: Option<String>,
    /// iid-gaussian, equicorrelated, one-factor or asynchronous-ticks
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    assets: Option<String>,
    #[arg(long)]
    obs: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    tick_prob: Option<String>,
    #[arg(long)]
    vol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// log (default) or simple
    #[arg(long)]
    returns: Option<String>,
    /// haar or la8 (default)
    #[arg(long)]
    filter: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    /// Window length in return observations
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    window_start: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    #[arg(long)]
    min_unbiased: Option<String>,
    /// Comma list such as raw,1,2,3
    #[arg(long)]
    scales: Option<String>,
    /// Window-index range start:end for SDU statistics
    #[arg(long)]
    sdu_reference: Option<String>,
    /// Comma list of eigenvalue ranks, 1 = largest
    #[arg(long)]
    eigen_ranks: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<String>,
    /// Comma list of index weights summing to 1
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long)]
    vols: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    targets: Option<String>,
    #[arg(long)]
    n_targets: Option<String>,
    /// abort (default) or skip
    #[arg(long)]
    on_failure: Option<String>,
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long)]
    forward_fill: bool,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        let flags = [
            ("input", &self.input),
            ("input_kind", &self.input_kind),
            ("synthetic", &self.synthetic),
            ("assets", &self.assets),
            ("obs", &self.obs),
            ("rho", &self.rho),
            ("tick_prob", &self.tick_prob),
            ("vol", &self.vol),
            ("seed", &self.seed),
            ("returns", &self.returns),
            ("filter", &self.filter),
            ("levels", &self.levels),
            ("window", &self.window),
            ("window_start", &self.window_start),
            ("stride", &self.stride),
            ("min_unbiased", &self.min_unbiased),
            ("scales", &self.scales),
            ("sdu_reference", &self.sdu_reference),
            ("eigen_ranks", &self.eigen_ranks),
            ("upper", &self.upper),
            ("lower", &self.lower),
            ("weights", &self.weights),
            ("mu", &self.mu),
            ("vols", &self.vols),
            ("targets", &self.targets),
            ("n_targets", &self.n_targets),
            ("on_failure", &self.on_failure),
            ("delimiter", &self.delimiter),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v.clone());
            }
        }
        if self.forward_fill {
            s.set("forward_fill", "true");
        }
        Ok(s)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Cmd::Decompose(a) => (Command::Decompose, a),
        Cmd::Dynamics(a) => (Command::Dynamics, a),
        Cmd::Epps(a) => (Command::Epps, a),
        Cmd::Partition(a) => (Command::Partition, a),
        Cmd::Optimize(a) => (Command::Optimize, a),
        Cmd::Synth(a) => (Command::Synth, a),
    };
    let settings = args.settings()?;
    let outputs = commands::run(command, &settings)?;
    let dir = PathBuf::from(settings.get("out").unwrap_or("out"));
    outputs.write_to(&dir)?;
    for line in &outputs.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", outputs.files.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavecorr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
