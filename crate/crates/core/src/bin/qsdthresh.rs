use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsdthresh::bounds::{alpha_fit, main_bound};
use qsdthresh::experiment::{reference_pair, run_scenario, ExperimentConfig};
use qsdthresh::pair_io::{load_pair, pair_to_json};
use qsdthresh::qsd::NOISELESS_THRESHOLD;
use qsdthresh::{threshold_solve, Error};

#[derive(Parser)]
#[command(name = "qsdthresh", version, about = "Thresholded quantum subspace diagonalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path`; without either the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export or inspect projected pairs.
    Pair {
        #[command(subcommand)]
        action: PairAction,
    },
    /// End-to-end eigenangle bound for a stored pair and noise level.
    Bounds {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long = "eta-h")]
        eta_h: f64,
        #[arg(long = "eta-s")]
        eta_s: f64,
        #[arg(long)]
        epsilon: f64,
        /// Defaults to 1/4.
        #[arg(long)]
        alpha: Option<f64>,
        /// Defaults to the smallest constant fitting the pair at `alpha`.
        #[arg(long)]
        mu: Option<f64>,
    },
}

#[derive(Subcommand)]
enum PairAction {
    /// Write the noiseless pair described by a config as JSON.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a pair file and print a JSON summary.
    Import {
        #[arg(long)]
        pair: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::ParseError { .. } | Error::ValidationError(_) => 2,
        _ => 3,
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> qsdthresh::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> qsdthresh::Result<()> {
    match cli.command {
        Command::Run { config, out, trials, seed } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if out.is_some() {
                cfg.output_path = out;
            }
            cfg.validate()?;
            let result = run_scenario(&cfg)?;
            match &cfg.output_path {
                Some(path) => {
                    result.write_to_path(path)?;
                    eprintln!("{}: wrote {}", cfg.scenario.name(), path.display());
                }
                None => result.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Pair { action: PairAction::Export { config, out } } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let pair = reference_pair(&cfg)?;
            emit(out.as_ref(), &pair_to_json(&pair)?)
        }
        Command::Pair { action: PairAction::Import { pair } } => {
            let pair = load_pair(&pair)?;
            let norm_s = pair.norm_s();
            let rep = threshold_solve(&pair.h, &pair.s, NOISELESS_THRESHOLD.resolve(norm_s))?;
            let summary = serde_json::json!({
                "n": pair.n(),
                "toeplitz": pair.toeplitz_rows.is_some(),
                "provenance": pair.provenance,
                "norm_S": norm_s,
                "kept_dim": rep.kept_dim,
                "E0": rep.e0,
                "meta": pair.meta,
            });
            emit(None, &serde_json::to_string_pretty(&summary).expect("summary serializes"))
        }
        Command::Bounds { pair, eta_h, eta_s, epsilon, alpha, mu } => {
            let pair = load_pair(&pair)?;
            let alpha = alpha.unwrap_or(0.25);
            if !(0.0..=0.5).contains(&alpha) {
                return Err(Error::Config { field: "alpha".into(), message: "must lie in [0, 1/2]".into() });
            }
            let mu = match mu {
                Some(m) => m,
                None => alpha_fit(&pair.h, &pair.s, 1e-16)?.mu_at(alpha),
            };
            let rep = main_bound(&pair.h, &pair.s, eta_h, eta_s, epsilon, alpha, mu)?;
            let mut value = serde_json::to_value(&rep).expect("report serializes");
            value["energy_interval"] = serde_json::json!(rep.energy_interval());
            emit(None, &serde_json::to_string_pretty(&value).expect("report serializes"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsdthresh: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
