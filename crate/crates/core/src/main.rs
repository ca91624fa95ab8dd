use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use cubeperc::branching::Regime;
use cubeperc::experiments::{
    boundary_audit, density_audit, gamma_stats, giant_sweep, run_cell, sprinkle_experiment, survival_record,
    u_concentration, write_csv_file, ExperimentConfig, OutputPaths, Thresholds,
};
use cubeperc::{Error, Result};

/// Vertex percolation on the binary n-cube.
#[derive(Debug, Parser)]
#[command(name = "cubeperc", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Per-trial CSV output.
    #[arg(long, global = true)]
    out_csv: Option<PathBuf>,
    /// JSON summary output (stdout if absent).
    #[arg(long, global = true)]
    out_json: Option<PathBuf>,
    /// TOML file of `key = value` pairs overriding command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Fill runtime_ms with wall-clock times (output no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one (n, chi) cell and report component statistics.
    Simulate {
        #[arg(long, default_value_t = 16)]
        n: u32,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        chi: f64,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Component size cutoff for U_n (default n).
        #[arg(long)]
        threshold: Option<usize>,
        #[arg(long, default_value = "constant")]
        regime: Regime,
        /// Component size histograms (trial, size, multiplicity).
        #[arg(long)]
        histogram_csv: Option<PathBuf>,
    },
    /// Largest-component law over an (n, chi) grid.
    GiantSweep {
        /// Comma-separated dimensions.
        #[arg(long, default_value = "14,16,18,20")]
        n_grid: String,
        /// Comma-separated chi values.
        #[arg(long, default_value = "0.3", allow_hyphen_values = true)]
        chi_grid: String,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        threshold: Option<usize>,
        #[arg(long, default_value = "constant")]
        regime: Regime,
    },
    /// Branching-process survival probabilities.
    Survival {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        chi: f64,
        #[arg(long, default_value = "constant")]
        regime: Regime,
    },
    /// Success rate of the tree exploration and staged growth.
    GammaStats {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.3)]
        chi: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1.0)]
        rho_k: f64,
        #[arg(long, default_value = "constant")]
        regime: Regime,
    },
    /// Translation-averaging identity and direction bound on vertex sets.
    BoundaryAudit {
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Every subset instead of random ones (n <= 4).
        #[arg(long)]
        exhaustive: bool,
    },
    /// Distance-2 density of the large-component vertices.
    DensityAudit {
        #[arg(long, default_value_t = 14)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        chi: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        /// Component size cutoff for the large-component set (default n).
        #[arg(long)]
        threshold: Option<usize>,
    },
    /// Two-round sampling and merging of the two largest components.
    Sprinkle {
        #[arg(long, default_value_t = 16)]
        n: u32,
        #[arg(long, default_value_t = 0.4)]
        chi: f64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Concentration of the small-component vertex count.
    UConcentration {
        #[arg(long, default_value_t = 16)]
        n: u32,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        chi: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        threshold: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn parse_list<T: std::str::FromStr>(name: &'static str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse().map_err(|e| Error::InvalidParameter {
                name,
                detail: format!("{x:?}: {e}"),
            })
        })
        .collect()
}

/// Finds the value of `--config` in raw arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Turns `key = value` pairs into trailing `--key=value` flags, which
/// override earlier occurrences.
fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::param("config", e.to_string()))?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &toml::Value| match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            other => Err(Error::param("config", format!("unsupported value for {key}: {other}"))),
        };
        match &value {
            toml::Value::Boolean(true) => flags.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                flags.push(format!("{flag}={}", joined.join(",")).into());
            }
            v => flags.push(format!("{flag}={}", scalar(v)?).into()),
        }
    }
    Ok(flags)
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    match path {
        Some(p) => write_csv_file(p, rows),
        None => Ok(()),
    }
}

fn experiment_config(global: &GlobalArgs, n_grid: Vec<u32>, chi_grid: Vec<f64>, k: usize, trials: u64, threshold: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        n_grid,
        chi_grid,
        k,
        trials,
        master_seed: global.seed,
        thresholds: Thresholds {
            component: threshold,
            ..Thresholds::default()
        },
        output: OutputPaths {
            csv: global.out_csv.clone(),
            json: global.out_json.clone(),
        },
        timing: global.timing,
    }
}

/// Runs a subcommand. `Ok(false)` means some cell hit a resource cap.
fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::param("threads", e.to_string()))?;
    }
    let csv = g.out_csv.as_deref();
    let json = g.out_json.as_deref();
    match cli.command {
        Command::Simulate {
            n,
            chi,
            trials,
            k,
            threshold,
            regime,
            histogram_csv,
        } => {
            let config = experiment_config(g, vec![n], vec![chi], k, trials, threshold);
            let cell = run_cell("simulate", n, chi, &config, regime)?;
            emit_csv(csv, &cell.rows)?;
            emit_csv(histogram_csv.as_deref(), &cell.histograms)?;
            emit_json(json, &cell.summary)?;
        }
        Command::GiantSweep {
            n_grid,
            chi_grid,
            trials,
            k,
            threshold,
            regime,
        } => {
            let config = experiment_config(
                g,
                parse_list("n_grid", &n_grid)?,
                parse_list("chi_grid", &chi_grid)?,
                k,
                trials,
                threshold,
            );
            let sweep = giant_sweep(&config, regime)?;
            emit_csv(csv, &sweep.rows)?;
            emit_json(json, &sweep.cells)?;
            return Ok(!sweep.any_resource_cap());
        }
        Command::Survival { n, chi, regime } => {
            emit_json(json, &survival_record(n, chi, regime)?)?;
        }
        Command::GammaStats {
            n,
            k,
            chi,
            trials,
            rho_k,
            regime,
        } => {
            let (stats, rows) = gamma_stats(n, k, chi, trials, g.seed, rho_k, regime)?;
            emit_csv(csv, &rows)?;
            emit_json(json, &stats)?;
        }
        Command::BoundaryAudit { n, trials, exhaustive } => {
            let (audit, rows) = boundary_audit(n, trials, g.seed, exhaustive)?;
            emit_csv(csv, &rows)?;
            emit_json(json, &audit)?;
        }
        Command::DensityAudit {
            n,
            k,
            chi,
            delta,
            trials,
            threshold,
        } => {
            let cutoff = threshold.unwrap_or(n as usize);
            let (audit, rows) = density_audit(n, k, chi, delta, cutoff, trials, g.seed)?;
            emit_csv(csv, &rows)?;
            emit_json(json, &audit)?;
        }
        Command::Sprinkle { n, chi, trials } => {
            let run = sprinkle_experiment(n, chi, trials, g.seed, g.timing)?;
            emit_csv(csv, &run.rows)?;
            emit_json(json, &run.summary)?;
        }
        Command::UConcentration {
            n,
            chi,
            k,
            threshold,
            trials,
        } => {
            let run = u_concentration(n, chi, k, threshold, trials, g.seed, g.timing)?;
            emit_csv(csv, &run.rows)?;
            emit_json(json, &run.summary)?;
        }
    }
    Ok(true)
}

fn parse_cli() -> std::result::Result<Cli, ExitCode> {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config_path(&args) {
        match config_flags(&path) {
            Ok(extra) => args.extend(extra),
            Err(e) => {
                eprintln!("error: config {}: {e}", path.display());
                return Err(ExitCode::FAILURE);
            }
        }
    }
    let command = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true));
    let matches = command.try_get_matches_from(args).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::FAILURE
        } else {
            ExitCode::SUCCESS
        }
    })?;
    Cli::from_arg_matches(&matches).map_err(|e| {
        let _ = e.print();
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = match parse_cli() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some cells exceeded a resource cap");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(2),
                e if e.is_resource_cap() => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
