use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entcat_cli::error::{CliError, EXIT_CHECK_FAILED, EXIT_PASS};
use entcat_cli::{emit_plotdata, execute, Command, Report, Scenario};

/// Run entanglement-catalysis checks described by scenario files.
///
/// Every flag can also be set from the environment with the `ENTCAT_`
/// prefix (`ENTCAT_SCENARIO`, `ENTCAT_SEED`, `ENTCAT_OUT`,
/// `ENTCAT_SAMPLES`, and `ENTCAT_REPORT` / `ENTCAT_KIND` for `plot`).
/// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input, 3 the
/// computation was rejected.
#[derive(Parser, Debug)]
#[command(name = "entcat", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long, env = "ENTCAT_SCENARIO")]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, env = "ENTCAT_SEED")]
    seed: Option<u64>,
    /// Report path; stdout when neither this nor the scenario sets one.
    #[arg(long, env = "ENTCAT_OUT")]
    out: Option<PathBuf>,
    /// Overrides the scenario sample count.
    #[arg(long, env = "ENTCAT_SAMPLES")]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a scenario, taking the command from the file.
    Run(RunArgs),
    /// Build a catalyst from an n-copy protocol and check the embedding.
    Catalyze(RunArgs),
    /// Check the catalytic error against measured reduction errors.
    Reduce(RunArgs),
    /// Monte Carlo check of the decoupling and fidelity inequalities.
    #[command(name = "verify-lemma1")]
    VerifyLemma1(RunArgs),
    /// Hashing and squashed-entanglement bounds.
    Bounds(RunArgs),
    /// Composition of two near-exact protocols on a correlated state.
    Superadd(RunArgs),
    /// Recurrence distillation sweep and oracle.
    Distill(RunArgs),
    /// Approximate catalysts over noisy teleportation, and their reuse.
    #[command(name = "synth-catalyst")]
    SynthCatalyst(RunArgs),
    /// Pure-state majorization, catalytic majorization and rates.
    #[command(name = "pure-rate")]
    PureRate(RunArgs),
    /// Extract a series from a report as CSV.
    Plot {
        #[arg(long, env = "ENTCAT_REPORT")]
        report: PathBuf,
        /// Series name, e.g. distill-sweep or decoupling-scatter.
        #[arg(long, env = "ENTCAT_KIND")]
        kind: String,
        #[arg(long, env = "ENTCAT_OUT")]
        out: Option<PathBuf>,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_scenario(args: &RunArgs, command: Option<Command>) -> Result<i32, CliError> {
    let mut scn = Scenario::load(&args.scenario, command)?;
    if let Some(s) = args.seed {
        scn.seed = s;
    }
    if let Some(n) = args.samples {
        if n == 0 {
            return Err(CliError::Scenario("--samples must be positive".into()));
        }
        scn.samples = Some(n);
    }
    let report = execute(&scn)?;
    let json = report.to_json()?;
    for c in &report.checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        match (c.value, &c.relation, c.bound) {
            (Some(v), Some(r), Some(b)) => eprintln!("{mark} {}: {v:.3e} {r} {b:.3e}", c.name),
            _ => eprintln!("{mark} {}", c.name),
        }
    }
    let out = args.out.clone().or(scn.out.clone());
    write_out(out.as_deref(), &json)?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (args, command) = match &cli.cmd {
        Cmd::Plot { report, kind, out } => {
            let text = std::fs::read_to_string(report).map_err(|e| CliError::Io {
                path: report.clone(),
                source: e,
            })?;
            let csv = emit_plotdata(&Report::from_json(&text)?, kind)?;
            write_out(out.as_deref(), &csv)?;
            return Ok(EXIT_PASS);
        }
        Cmd::Run(a) => (a, None),
        Cmd::Catalyze(a) => (a, Some(Command::Catalyze)),
        Cmd::Reduce(a) => (a, Some(Command::Reduce)),
        Cmd::VerifyLemma1(a) => (a, Some(Command::VerifyLemma1)),
        Cmd::Bounds(a) => (a, Some(Command::Bounds)),
        Cmd::Superadd(a) => (a, Some(Command::Superadd)),
        Cmd::Distill(a) => (a, Some(Command::Distill)),
        Cmd::SynthCatalyst(a) => (a, Some(Command::SynthCatalyst)),
        Cmd::PureRate(a) => (a, Some(Command::PureRate)),
    };
    run_scenario(args, command)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
