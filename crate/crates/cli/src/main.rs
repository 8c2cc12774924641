use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frqd_core::graph::{construct_redundant, is_rr_redundant, read_edge_list, write_edge_list, RedundancyWitness};
use frqd_core::harness::{compare_reports, run_experiment, write_artifacts, ExperimentConfig, RunReport};
use frqd_core::Error;
use tracing_subscriber::EnvFilter;

/// Environment variable holding the log filter, e.g. `FRQD_LOG=debug`.
const LOG_ENV: &str = "FRQD_LOG";

const EXIT_OK: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "frqd", version, about = "Resilient distributed Q-learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether an edge-list graph is (r, r')-redundant.
    VerifyRedundancy(VerifyArgs),
    /// Write the clique-plus-attachments graph as an edge list.
    Construct(ConstructArgs),
    /// Run an experiment from a JSON or TOML config.
    Run(RunArgs),
    /// Tabulate greedy policies from several run reports.
    Compare(CompareArgs),
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    #[arg(long)]
    r: usize,
    #[arg(long = "r-prime")]
    r_prime: usize,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Override a config field, e.g. `--set attack.strategy=none`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Artifact directory; defaults to `outputs.dir`, then `runs/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::InvariantViolation(_) => ExitCode::from(EXIT_INVARIANT),
        _ => ExitCode::from(EXIT_USAGE),
    }
}

fn verify(args: VerifyArgs) -> Result<u8, Error> {
    let g = read_edge_list(&args.graph)?;
    let verdict = is_rr_redundant(&g, args.r, args.r_prime)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&verdict)?);
    } else if verdict.redundant {
        println!("({}, {})-redundant: yes", args.r, args.r_prime);
    } else {
        println!("({}, {})-redundant: no", args.r, args.r_prime);
        match verdict.witness {
            Some(RedundancyWitness::Disconnected { unreachable }) => {
                println!(
                    "witness: node {unreachable} is unreachable in the {}-2-hop graph",
                    args.r
                )
            }
            Some(RedundancyWitness::GapViolation { i, j, shared }) => println!(
                "witness: nodes {i} and {j} share {shared} neighbors, which is above {} and below {}",
                args.r_prime, args.r
            ),
            None => {}
        }
    }
    Ok(if verdict.redundant { EXIT_OK } else { EXIT_FALSE })
}

fn construct(args: ConstructArgs) -> Result<u8, Error> {
    let g = construct_redundant(args.n, args.r)?;
    let text = write_edge_list(&g);
    match args.out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            eprintln!("wrote {} edges to {}", g.edge_count(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn run(args: RunArgs) -> Result<u8, Error> {
    let config = ExperimentConfig::load(&args.config, &args.overrides)?;
    let dir = args
        .out
        .or_else(|| config.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&config.name));
    let output = run_experiment(&config)?;
    let written = write_artifacts(&output, &config, &dir)?;
    let r = &output.report;
    println!(
        "{}: {} steps, relative error {:.4}, disagreeing states {:?}, violations {}",
        r.name,
        r.steps,
        r.final_relative_error,
        r.disagreeing_states(),
        r.violations.total()
    );
    for p in written {
        println!("  {}", p.display());
    }
    Ok(if r.violations.total() > 0 {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    })
}

fn compare(args: CompareArgs) -> Result<u8, Error> {
    let reports = args
        .reports
        .iter()
        .map(RunReport::load)
        .collect::<Result<Vec<_>, _>>()?;
    let table = compare_reports(&reports)?;
    print!("{}", table.to_text());
    if let Some(path) = args.csv {
        std::fs::write(&path, table.to_csv()?).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::VerifyRedundancy(a) => verify(a),
        Command::Construct(a) => construct(a),
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
