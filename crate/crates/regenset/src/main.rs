use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regenset::config::{parse_config_text, ExperimentConfig, Overrides};
use regenset::error::{RunError, RunResult};
use regenset::{plot, runner};

#[derive(Parser)]
#[command(name = "regenset", version, about = "Monte Carlo checks for contact sets of Levy paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected suites and write artifacts.
    Run(RunArgs),
    /// Turn a finished run directory into plot-ready CSV files.
    EmitPlotData {
        /// Run output directory.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines, `[section]` headers allowed).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated suites: set-algebra, marginals, intensity-G,
    /// intensity-Y, laplace-Y, stationarity, oracles.
    #[arg(long)]
    suite: Option<String>,
    /// bm, cpp or jd.
    #[arg(long)]
    process: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    /// two-point:UP,DOWN,P | exponential:MEAN | normal:MEAN,VAR
    #[arg(long, allow_hyphen_values = true)]
    jumps: Option<String>,
    #[arg(long = "alpha-min")]
    alpha_min: Option<String>,
    #[arg(long = "alpha-max")]
    alpha_max: Option<String>,
    #[arg(long = "alpha-count")]
    alpha_count: Option<String>,
    /// Window half-width.
    #[arg(long = "T")]
    half_width: Option<String>,
    /// Grid step.
    #[arg(long = "h")]
    step: Option<String>,
    /// Number of replicas.
    #[arg(long)]
    n: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "tol-scale")]
    tol_scale: Option<String>,
    /// Worker threads (default: available processors).
    #[arg(long)]
    workers: Option<String>,
    #[arg(long = "z-band")]
    z_band: Option<String>,
    #[arg(long = "p-floor")]
    p_floor: Option<String>,
    /// Time shift of the stationarity test.
    #[arg(long)]
    shift: Option<String>,
    #[arg(long = "delta-edges")]
    delta_edges: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        let pairs = [
            ("suite", &self.suite),
            ("process", &self.process),
            ("beta", &self.beta),
            ("sigma", &self.sigma),
            ("rate", &self.rate),
            ("jumps", &self.jumps),
            ("alpha-min", &self.alpha_min),
            ("alpha-max", &self.alpha_max),
            ("alpha-count", &self.alpha_count),
            ("T", &self.half_width),
            ("h", &self.step),
            ("n", &self.n),
            ("seed", &self.seed),
            ("out", &self.out),
            ("tol-scale", &self.tol_scale),
            ("workers", &self.workers),
            ("z-band", &self.z_band),
            ("p-floor", &self.p_floor),
            ("shift", &self.shift),
            ("delta-edges", &self.delta_edges),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn config(&self) -> RunResult<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            cfg.apply(&parse_config_text(&text)?)?;
        }
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> RunResult<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let outcome = runner::run(&cfg)?;
            print!("{}", outcome.summary_table());
            println!("artifacts in {}", outcome.out_dir.display());
            outcome.into_result().map(|_| ())
        }
        Command::EmitPlotData { dir } => {
            for f in plot::emit_plot_data(&dir)? {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
