//! `ufl`: solve, generate, benchmark and verify facility location instances.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use ufl_core::harness::{
    emit_json, emit_orlib, gen_euclidean, gen_regular, gen_two_level, read_instance, run_bench, run_verify,
    BenchConfig, InstanceFormat, VerifyOptions,
};
use ufl_core::{
    a1, a2_randomized, best_of, brute_force_opt, gamma_zero, jms, myz, Error, Instance64, Relaxation,
};

#[derive(Parser)]
#[command(name = "ufl", version, about = "Approximation algorithms for uncapacitated facility location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the solution as JSON.
    Solve {
        #[arg(long, value_enum, default_value = "a2")]
        algo: Algo,
        /// Sparsening parameter for a1 (default γ₀).
        #[arg(long)]
        gamma: Option<f64>,
        /// Cost scaling for myz.
        #[arg(long, default_value_t = 1.504)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// A1 trials for best-of.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        input: PathBuf,
        /// Input format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Generate a random metric instance.
    Gen {
        #[arg(long, value_enum, default_value = "euclidean")]
        kind: Kind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format; inferred from the extension, else ORLIB.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a benchmark grid described by a JSON config and write CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites on generated instances.
    Verify {
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    A1,
    Jms,
    Myz,
    A2,
    BestOf,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Orlib,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Euclidean,
    Regular,
    TwoLevel,
}

enum Failure {
    Core(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn resolve_format(explicit: Option<Format>, path: Option<&Path>) -> InstanceFormat {
    match explicit {
        Some(Format::Json) => InstanceFormat::Json,
        Some(Format::Orlib) => InstanceFormat::Orlib,
        None if path.and_then(Path::extension).is_some_and(|e| e == "json") => InstanceFormat::Json,
        None => InstanceFormat::Orlib,
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { algo, gamma, delta, seed, trials, input, format } => {
            let inst: Instance64 = read_instance(&input, resolve_format(format, Some(&input)))?;
            let sol = match algo {
                Algo::A1 => a1(&inst, gamma.unwrap_or_else(|| gamma_zero(1e-12)), seed)?,
                Algo::Jms => jms(&inst)?,
                Algo::Myz => myz(&inst, delta)?,
                Algo::A2 => a2_randomized(&inst, seed)?,
                Algo::BestOf => best_of(&inst, trials, seed)?,
                Algo::Exact => brute_force_opt(&inst)?,
            };
            let lp = Relaxation::solve(&inst)?.objective();
            let report = json!({
                "open_set": sol.open_set,
                "assignment": sol.assignment,
                "facility_cost": sol.facility_cost,
                "connection_cost": sol.connection_cost,
                "total": sol.total(),
                "lp_objective": lp,
                "ratio_lp": sol.total() / lp,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("plain json"));
        }
        Command::Gen { kind, m, n, seed, out, format } => {
            let inst: Instance64 = match kind {
                Kind::Euclidean => gen_euclidean(m, n, (0.5, 2.0), seed)?,
                Kind::Regular => gen_regular(m, n, seed)?,
                Kind::TwoLevel => gen_two_level(m, n, 3, (1.0, 3.0), seed)?,
            };
            let text = match resolve_format(format, out.as_deref()) {
                InstanceFormat::Json => emit_json(&inst) + "\n",
                InstanceFormat::Orlib => emit_orlib(&inst),
            };
            write_output(out.as_deref(), &text)?;
        }
        Command::Bench { config, out } => {
            let config = BenchConfig::from_json(&std::fs::read_to_string(&config).map_err(Error::from)?)?;
            let csv = run_bench(&config)?.to_csv()?;
            write_output(out.as_deref(), &csv)?;
        }
        Command::Verify { instances, seed } => {
            let checks = run_verify(VerifyOptions { instances, seed })?;
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(4),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
