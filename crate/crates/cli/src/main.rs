//! Command-line front end: the identity suite and invariant computations on JSON data.

mod compute;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use caloron_core::gauge::GaugePair;
use caloron_core::ktheory::EquivalenceSign;
use caloron_core::suite::{parse_grid, registry, run_suite, scenarios, Report, ScenarioConfig, TolOverrides};
use clap::{Parser, Subcommand, ValueEnum};

use compute::Kind;

/// Exit status when every check passes.
const EXIT_PASS: u8 = 0;
/// Exit status when at least one check fails.
const EXIT_FAIL: u8 = 1;
/// Exit status for bad input or configuration.
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "caloron", version, about = "Caloron correspondence toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the registered identity checks and write a report.
    Suite(SuiteArgs),
    /// Compute an invariant from a JSON input file.
    Compute(ComputeArgs),
    /// Print the coefficient tables as exact fractions (CSV).
    Table {
        /// Highest degree k.
        #[arg(long, default_value_t = 10)]
        max_degree: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct SuiteArgs {
    /// Run a single scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Base torus grid, e.g. 16x16.
    #[arg(long, default_value = "16x16")]
    grid: String,
    #[arg(long, default_value_t = 32)]
    theta_samples: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Tolerance override: VALUE for every check or CHECK_ID=VALUE. Repeatable.
    #[arg(long)]
    tol: Vec<String>,
    /// Highest form degree kept in series outputs.
    #[arg(long)]
    truncate: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the scenario and check registry and exit.
    #[arg(long)]
    list: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Gauge pair JSON used in place of the first random pair on a matching base.
    #[arg(long)]
    pair: Option<PathBuf>,
    /// Record wall-clock times (reports are then no longer reproducible).
    #[arg(long)]
    timings: bool,
    /// Flip the sign of the homotopy term in the CS-equivalence test.
    #[arg(long)]
    footnote_sign: bool,
}

#[derive(clap::Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// JSON input; optional for `tau`.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Degree k of the invariant polynomial.
    #[arg(long, short = 'k', default_value_t = 1)]
    degree: usize,
    #[arg(long)]
    truncate: Option<usize>,
    /// RK4 steps per loop for `holonomy`.
    #[arg(long, default_value_t = caloron_core::holonomy::DEFAULT_STEPS)]
    steps: usize,
    /// Project holonomy steps back onto the unitary group.
    #[arg(long)]
    reunitarize: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Suite(args) => suite(args),
        Command::Compute(args) => compute::run(&args),
        Command::Table { max_degree } => match caloron_core::coefficients::csv_table(max_degree) {
            Ok(t) => {
                print!("{t}");
                EXIT_PASS
            }
            Err(e) => invalid(e),
        },
    };
    ExitCode::from(code)
}

fn invalid(e: impl std::fmt::Display) -> u8 {
    eprintln!("error: {e}");
    EXIT_INVALID
}

fn print_registry() {
    let checks = registry();
    let mut out = String::new();
    for s in scenarios() {
        out += &format!("{s}\n");
        for c in checks.iter().filter(|c| c.scenario == s) {
            out += &format!("  {:<40} tol {:<9.1e} {}\n", c.id, c.tolerance, c.reference);
        }
    }
    // a closed pipe (e.g. `| head`) is not an error here
    let _ = std::io::stdout().write_all(out.as_bytes());
}

fn suite(args: SuiteArgs) -> u8 {
    if args.list {
        print_registry();
        return EXIT_PASS;
    }
    let emit = |report: &Report| -> Result<(), String> {
        let text = match args.output {
            Format::Json => report.to_json().map(|s| s + "\n"),
            Format::Csv => report.to_csv(),
        }
        .map_err(|e| e.to_string())?;
        match &args.out {
            Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    };
    let pair = match &args.pair {
        None => None,
        Some(path) => {
            let parsed = fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))
                .and_then(|s| serde_json::from_str::<GaugePair>(&s).map_err(|e| e.to_string()));
            match parsed {
                Ok(p) => Some(p),
                Err(msg) => {
                    if let Err(e) = emit(&Report::validation_failure(msg.clone())) {
                        eprintln!("error: {e}");
                    }
                    return invalid(msg);
                }
            }
        }
    };
    let cfg = (|| -> caloron_core::Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            scenario: args.scenario.clone(),
            grid: parse_grid(&args.grid)?,
            theta_samples: args.theta_samples,
            rank: args.rank,
            seed: args.seed,
            tolerance: TolOverrides::parse(&args.tol)?,
            truncate: args.truncate,
            jobs: args.jobs,
            timings: args.timings,
            sign: if args.footnote_sign { EquivalenceSign::Footnote } else { EquivalenceSign::AsPrinted },
            pair,
        })
    })();
    let report = match cfg.and_then(|c| run_suite(&c)) {
        Ok(r) => r,
        Err(e) => return invalid(e),
    };
    if let Err(e) = emit(&report) {
        return invalid(e);
    }
    let failed: Vec<&str> = report.failures().map(|r| r.check_id.as_str()).collect();
    eprintln!("{}/{} checks passed", report.records.len() - failed.len(), report.records.len());
    for id in &failed {
        eprintln!("FAILED {id}");
    }
    if failed.is_empty() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
