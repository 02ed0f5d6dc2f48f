use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavexp::experiment::{
    oracle_check, run_converge, run_modes, run_solve, snapshot_path, write_convergence_csv, write_modes_csv,
    write_snapshots_csv, write_state_csv, Mutation, RunConfig, CACHE_ENV, ORACLE_CHECK_TOL,
};
use wavexp::{Error, Result};

/// Exponential integrators for damped semilinear wave and beam equations.
#[derive(Parser)]
#[command(name = "wavexp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate to the final time and write the state as CSV (x, u, w).
    Solve(RunArgs),
    /// Errors against a reference run for a doubling M list (scheme, M, tau, l2_error).
    Converge(RunArgs),
    /// Per-mode spectral data (index, lambda, m, n, case).
    Modes(RunArgs),
    /// Compare the block propagator with the dense oracle.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    c2: Option<f64>,
    /// Number of time steps; repeat for a convergence study.
    #[arg(long = "M", value_name = "M")]
    m: Vec<usize>,
    /// Steps of the reference run.
    #[arg(long = "Mref", value_name = "M")]
    m_ref: Option<usize>,
    /// Interior grid points.
    #[arg(long = "N", value_name = "N")]
    n: Option<usize>,
    /// Final time.
    #[arg(long = "T", value_name = "T")]
    t: Option<f64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eigendecomposition cache directory.
    #[arg(long, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    /// Record the state every K steps (solve only, needs --out).
    #[arg(long, value_name = "K")]
    snapshots: Option<usize>,
}

impl RunArgs {
    fn layers(self) -> Result<(Option<RunConfig>, RunConfig)> {
        let file = self.config.as_deref().map(RunConfig::from_json_file).transpose()?;
        let flags = RunConfig {
            preset: self.preset,
            scheme: self.scheme,
            c2: self.c2,
            m: (!self.m.is_empty()).then_some(self.m),
            m_ref: self.m_ref,
            n: self.n,
            t_final: self.t,
            out: self.out,
            cache: self.cache,
            snapshots: self.snapshots,
            ..RunConfig::default()
        };
        Ok((file, flags))
    }
}

#[derive(Args)]
struct OracleArgs {
    /// Grid sizes to check; defaults to 4, 8 and 16.
    #[arg(long = "N", value_name = "N")]
    n: Vec<usize>,
    #[arg(long, hide = true)]
    mutate: Option<String>,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_solve(args: RunArgs) -> Result<()> {
    let (file, flags) = args.layers()?;
    let run = RunConfig::resolve(file, flags)?;
    if run.snapshots.is_some() && run.out.is_none() {
        return Err(Error::Config("--snapshots needs --out".into()));
    }
    let report = run_solve(&run)?;
    write_state_csv(open_out(run.out.as_deref())?, &report.nodes, &report.result.y_final)?;
    if let (Some(out), Some(_)) = (&run.out, run.snapshots) {
        write_snapshots_csv(BufWriter::new(File::create(snapshot_path(out))?), &report.nodes, &report.result.snapshots)?;
    }
    eprintln!("{}", report.summary());
    Ok(())
}

fn cmd_converge(args: RunArgs) -> Result<()> {
    let (file, flags) = args.layers()?;
    let run = RunConfig::resolve(file, flags)?;
    let report = run_converge(&run)?;
    write_convergence_csv(open_out(run.out.as_deref())?, &report.rows)?;
    for (scheme, order) in &report.orders {
        eprintln!("{scheme} observed order {order:.3}");
    }
    Ok(())
}

fn cmd_modes(args: RunArgs) -> Result<()> {
    let (file, flags) = args.layers()?;
    let run = RunConfig::resolve(file, flags)?;
    write_modes_csv(open_out(run.out.as_deref())?, &run_modes(&run)?)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<()> {
    let mutation = args.mutate.as_deref().map(str::parse::<Mutation>).transpose()?;
    let sizes = if args.n.is_empty() { vec![4, 8, 16] } else { args.n };
    let report = oracle_check(&sizes, mutation)?;
    for c in &report.cases {
        println!("{} n={} {} k<={}: max rel err {:.3e}", c.kind, c.n, c.label, c.k_max, c.max_rel_error);
    }
    let worst = report.max_rel_error();
    println!("max rel err {worst:.3e} (tol {ORACLE_CHECK_TOL:e}); mode cases hit {:?}", report.mode_cases_hit);
    if report.passed() {
        Ok(())
    } else {
        Err(Error::ToleranceExceeded(format!("max relative error {worst:.3e} > {ORACLE_CHECK_TOL:e}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Modes(a) => cmd_modes(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
