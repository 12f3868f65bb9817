use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reflectionless::experiments::{
    run_ak_table, run_dr_forward, run_eval, run_omega, run_oracle, run_thm11, write_outputs,
};
use reflectionless::{Error, ExperimentConfig, Format, Report};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Experiments for reflectionless Jacobi matrices.
#[derive(Parser)]
#[command(name = "reflectionless", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report, tables and plot data. Without it the
    /// JSON report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Random admissible inputs over a single interval; a0 must not drop below A(K).
    Thm11,
    /// Perturbation families around the free operator.
    Oracle,
    /// Coefficients of the semicircle plus off-band atoms.
    Dr,
    /// A(K) for a list of sets with a brute-force cross-check.
    Aktable,
    /// Shift-window clustering as an approximation of the omega-limit set.
    Omega,
    /// Evaluates H, the Hilbert transform and the measure for one Krein function.
    Eval,
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn finish<R: Report>(report: Result<R, Error>, cfg: &ExperimentConfig, format: Format) -> ExitCode {
    let report = match report {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match &cfg.out {
        Some(dir) => match write_outputs(&report, dir, format) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => return fail(&e),
        },
        None => match serde_json::to_string_pretty(&report) {
            Ok(text) => println!("{text}"),
            Err(e) => return fail(&Error::Io(format!("json: {e}"))),
        },
    }
    for c in report.checks() {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("seed {}: {} check(s) failed", cfg.seed, report.failures().len());
        ExitCode::from(EXIT_ASSERTION)
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli.common) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let format = match cli.common.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match cli.command {
        Command::Thm11 => finish(run_thm11(&cfg), &cfg, format),
        Command::Oracle => finish(run_oracle(&cfg), &cfg, format),
        Command::Dr => finish(run_dr_forward(&cfg), &cfg, format),
        Command::Aktable => finish(run_ak_table(&cfg), &cfg, format),
        Command::Omega => finish(run_omega(&cfg), &cfg, format),
        Command::Eval => finish(run_eval(&cfg), &cfg, format),
    }
}
