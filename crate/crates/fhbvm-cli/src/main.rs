//! `fhbvm` — solve Caputo fractional initial value problems with the
//! FHBVM(k,s) spectral method.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fhbvm_cli::{
    mescd, write_node_csv, write_wpd_csv, JsonDocument, RunReport, WpdRow,
};
use fhbvm_core::problems::{self, BenchmarkEntry};
use fhbvm_core::solver::{solve, FdeProblem, SolverConfig};

#[derive(Parser)]
#[command(
    name = "fhbvm",
    version,
    about = "Spectral solver for Caputo fractional initial value problems",
    after_help = "Exit codes: 0 success, 1 usage error, 2 solver failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a registered problem and emit the node table plus a run report
    Solve(SolveArgs),
    /// Produce work-precision data (M, runtime, mescd) over a list of M values
    Wpd(WpdArgs),
    /// List the registered benchmark problems
    ListProblems,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem name from the registry (see `list-problems`)
    #[arg(long)]
    problem: String,
    /// Fractional order override (only for alpha-parametric problems)
    #[arg(long)]
    alpha: Option<f64>,
    /// Horizon override
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Coarse interval parameter (> 1); the uniform step would be T/M
    #[arg(long = "M")]
    m: usize,
    /// Estimate the global error on a doubled mesh
    #[arg(long)]
    err: bool,
    /// Write the node table (or JSON document) to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct WpdArgs {
    /// Problem name; must have a reference solution
    #[arg(long)]
    problem: String,
    /// Fractional order override (only for alpha-parametric problems)
    #[arg(long)]
    alpha: Option<f64>,
    /// Horizon override
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Comma-separated list of M values, e.g. --M 2,3,4,5
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m_values: Vec<usize>,
    /// Write the CSV to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct MethodArgs {
    /// Quadrature node count (expert override, k >= s)
    #[arg(long)]
    k: Option<usize>,
    /// Basis degree count (expert override)
    #[arg(long)]
    s: Option<usize>,
}

enum CliError {
    Usage(String),
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            Self::Usage(_) => ExitCode::from(1),
            Self::Solver(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Solver(m) => m,
        }
    }
}

fn main() -> ExitCode {
    // clap would exit with its own code on bad flags; remap to the documented
    // usage code and keep help/version on the success path
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Wpd(args) => run_wpd(&args),
        Command::ListProblems => {
            list_problems();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn method_config(method: &MethodArgs) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    if let Some(k) = method.k {
        cfg.k = k;
    }
    if let Some(s) = method.s {
        cfg.s = s;
        if method.k.is_none() {
            cfg.k = cfg.k.max(s);
        }
    }
    if cfg.s < 1 || cfg.k < cfg.s {
        return Err(CliError::Usage("method parameters must satisfy k >= s >= 1".into()));
    }
    Ok(cfg)
}

fn lookup(name: &str) -> Result<&'static BenchmarkEntry, CliError> {
    problems::find(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown problem {name:?}; `fhbvm list-problems` shows the registry"
        ))
    })
}

fn build_problem(
    entry: &BenchmarkEntry,
    alpha: Option<f64>,
    t_end: Option<f64>,
) -> Result<FdeProblem, CliError> {
    entry.build(alpha, t_end).map_err(|e| CliError::Usage(e.to_string()))
}

fn run_solve(args: &SolveArgs) -> Result<(), CliError> {
    if args.m < 2 {
        return Err(CliError::Usage("M must exceed 1".into()));
    }
    let cfg = method_config(&args.method)?;
    let entry = lookup(&args.problem)?;
    let problem = build_problem(entry, args.alpha, args.t_end)?;
    let solution =
        solve(&problem, args.m, &cfg, args.err).map_err(|e| CliError::Solver(e.to_string()))?;
    let report = RunReport::new(entry.name, args.m, &problem, &solution, &cfg);

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    let io_err = |e: io::Error| CliError::Solver(format!("write failed: {e}"));
    match args.format {
        Format::Csv => {
            write_node_csv(&solution, sink).map_err(io_err)?;
            // keep stdout machine-readable; the summary goes to stderr
            report.write_text(io::stderr().lock()).map_err(io_err)?;
        }
        Format::Json => {
            let doc = JsonDocument::new(report, &solution);
            serde_json::to_writer_pretty(sink, &doc)
                .map_err(|e| CliError::Solver(format!("serialization failed: {e}")))?;
        }
    }
    Ok(())
}

fn run_wpd(args: &WpdArgs) -> Result<(), CliError> {
    if args.m_values.is_empty() {
        return Err(CliError::Usage("at least one M value is required".into()));
    }
    if args.m_values.iter().any(|m| *m < 2) {
        return Err(CliError::Usage("all M values must exceed 1".into()));
    }
    let cfg = method_config(&args.method)?;
    let entry = lookup(&args.problem)?;
    if !entry.has_exact {
        return Err(CliError::Usage(format!(
            "problem {:?} has no reference solution; work-precision data needs one",
            entry.name
        )));
    }
    let mut rows = Vec::with_capacity(args.m_values.len());
    for &m in &args.m_values {
        let problem = build_problem(entry, args.alpha, args.t_end)?;
        let solution =
            solve(&problem, m, &cfg, false).map_err(|e| CliError::Solver(e.to_string()))?;
        let exact: Vec<Vec<f64>> = solution
            .mesh
            .nodes()
            .iter()
            .map(|&t| problem.exact(t).unwrap())
            .collect();
        let accuracy = mescd(&exact, &solution.endpoints).map_err(CliError::Solver)?;
        rows.push(WpdRow {
            m,
            runtime_seconds: solution.stats.preprocess + solution.stats.solve,
            mescd: accuracy,
        });
    }
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            write_wpd_csv(&rows, BufWriter::new(file))
        }
        None => write_wpd_csv(&rows, io::stdout().lock()),
    }
    .map_err(|e| CliError::Solver(format!("write failed: {e}")))
}

fn list_problems() {
    println!("{:<6} {:<7} {:<6} {:<7} {:<12} summary", "name", "alpha", "T", "exact", "M values");
    for entry in problems::registry() {
        let alpha = if entry.alpha_parametric {
            format!("{}*", entry.default_alpha)
        } else {
            format!("{:.4}", entry.default_alpha)
        };
        let m_list = entry
            .suggested_m
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(",");
        println!(
            "{:<6} {:<7} {:<6} {:<7} {:<12} {}",
            entry.name, alpha, entry.default_t_end, entry.has_exact, m_list, entry.summary
        );
    }
    println!("(* alpha adjustable via --alpha)");
}
