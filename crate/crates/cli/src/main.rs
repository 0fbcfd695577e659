use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fibertrace_cli::{compare, execute, load_config, output_dir, read_manifest, CliError, ExperimentKind};

#[derive(Parser)]
#[command(name = "fibertrace", version, about = "Run fibred wave-trace experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// -v prints every check, -vv also the canonical config.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Output directory; overrides the environment and the config.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Replaces the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol-calculus wave and heat invariants.
    Invariants(RunArgs),
    /// Smoothed wave trace and peak matching.
    Wavetrace(RunArgs),
    /// Heat-trace fit and the t = 0 cross-check.
    Heattrace(RunArgs),
    /// Stationary phase against the oscillatory oracle.
    Spa(RunArgs),
    /// Push-down kernels and cover traces.
    Pushdown(RunArgs),
    /// Random graded operators through the functional calculus.
    Matrixmodel(RunArgs),
    /// Singularity ledger enumeration.
    Ledger(RunArgs),
    /// Residual-wise comparison of two manifests.
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn run(kind: ExperimentKind, args: &RunArgs, verbose: u8) -> Result<bool, CliError> {
    let mut cfg = load_config(&args.config)?;
    if cfg.kind != kind {
        return Err(CliError::Validation(format!(
            "config kind \"{}\" does not match subcommand \"{}\"",
            cfg.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if verbose > 1 {
        eprintln!("{}", cfg.echo());
    }
    let dir = output_dir(&cfg, args.output.as_deref());
    let manifest = execute(&cfg, &dir)?;
    for c in &manifest.checks {
        if verbose > 0 || !c.passed {
            let r = c.residual.map_or("non-finite".to_string(), |r| format!("{r:.3e}"));
            println!("{} {}: {r} (tol {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.tolerance);
        }
    }
    let failed = manifest.checks.iter().filter(|c| !c.passed).count();
    println!(
        "{}: {} checks, {failed} failed, {:.2} s, output in {}",
        kind.name(),
        manifest.checks.len(),
        manifest.wall_time_s,
        dir.display()
    );
    Ok(manifest.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Invariants(a) => run(ExperimentKind::Invariants, a, cli.verbose),
        Command::Wavetrace(a) => run(ExperimentKind::Wavetrace, a, cli.verbose),
        Command::Heattrace(a) => run(ExperimentKind::Heattrace, a, cli.verbose),
        Command::Spa(a) => run(ExperimentKind::Spa, a, cli.verbose),
        Command::Pushdown(a) => run(ExperimentKind::Pushdown, a, cli.verbose),
        Command::Matrixmodel(a) => run(ExperimentKind::Matrixmodel, a, cli.verbose),
        Command::Ledger(a) => run(ExperimentKind::Ledger, a, cli.verbose),
        Command::Compare { left, right, tol } => (|| {
            let report = compare(&read_manifest(left)?, &read_manifest(right)?, *tol)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?);
            Ok(report.within)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
