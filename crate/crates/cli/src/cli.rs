//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::audit::list_checks;
use crate::config::{parse_config_file, validate, ExperimentConfig, Kind};
use crate::error::{CliError, FieldError};
use crate::run::{run_batch, run_experiment};

#[derive(Debug, Parser)]
#[command(name = "fracshape", version, about = "Fractional Dirichlet shape-optimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the stiffness operator and report its diagonal and tail.
    Grid(RunArgs),
    /// Eigenpairs of a mask.
    Eig(RunArgs),
    /// Torsion function of a mask.
    Torsion(RunArgs),
    /// Two separated half balls against one half ball.
    TwoBall(RunArgs),
    /// Volume-constrained annealing of a spectral functional.
    Minimize(RunArgs),
    /// Trichotomy verdicts for synthetic sequences.
    Classify(RunArgs),
    /// Translation search of the Lieb lemma.
    Lieb(RunArgs),
    /// The inequality suite on randomized instances.
    Audit {
        #[command(flatten)]
        run: RunArgs,
        /// Print the checks and their default tolerances, then exit.
        #[arg(long)]
        list_checks: bool,
    },
    /// Run a config or batch whose entries name their own `kind`.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config: one experiment object or an array (batch).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`. Required for batches.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Batch worker cap (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Audit without a config: a 32-cell line.
fn default_audit_config() -> ExperimentConfig {
    serde_json::from_value(serde_json::json!({
        "kind": "bounds-audit",
        "grid": {"dim": 1, "half_width": 2.0, "resolution": 32},
        "seeds": [0, 1, 2],
    }))
    .expect("valid literal")
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    let (kind, args) = match cmd {
        Command::Grid(a) => (Some(Kind::Grid), a),
        Command::Eig(a) => (Some(Kind::Eig), a),
        Command::Torsion(a) => (Some(Kind::Torsion), a),
        Command::TwoBall(a) => (Some(Kind::TwoBall), a),
        Command::Minimize(a) => (Some(Kind::Minimize), a),
        Command::Classify(a) => (Some(Kind::Classify), a),
        Command::Lieb(a) => (Some(Kind::Lieb), a),
        Command::Audit { list_checks: true, .. } => return Ok(list_checks()),
        Command::Audit { run, .. } => (Some(Kind::BoundsAudit), run),
        Command::Run(a) => (None, a),
    };
    let configs = match (&args.config, kind) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config_file(&text)?
        }
        (None, Some(Kind::BoundsAudit)) => vec![default_audit_config()],
        (None, _) => return Err(CliError::invalid("config", "missing; pass --config <path>")),
    };

    let batch = configs.len() > 1;
    let mut experiments = Vec::new();
    let mut errs = Vec::new();
    for (i, c) in configs.into_iter().enumerate() {
        if batch && c.output_dir.is_some() {
            errs.push(FieldError::new(format!("[{i}].output_dir"), "not allowed in a batch; use --out"));
        }
        match validate(c, kind, args.seed) {
            Ok(e) => experiments.push(e),
            Err(CliError::Invalid(fields)) => errs.extend(fields.into_iter().map(|f| {
                if batch {
                    FieldError::new(format!("[{i}].{}", f.field), f.message)
                } else {
                    f
                }
            })),
            Err(e) => return Err(e),
        }
    }
    if !errs.is_empty() {
        return Err(CliError::Invalid(errs));
    }

    if batch {
        let root = args.out.ok_or_else(|| CliError::invalid("output_dir", "a batch needs --out"))?;
        let workers = args
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        run_batch(&experiments, &root, workers)?;
        return Ok(format!("batch of {} experiments written to {}\n", experiments.len(), root.display()));
    }
    let exp = &experiments[0];
    let out = args
        .out
        .or_else(|| exp.config.output_dir.clone())
        .ok_or_else(|| CliError::invalid("output_dir", "missing; set it in the config or pass --out"))?;
    let bundle = run_experiment(exp, &out)?;
    Ok(format!("{}: {} files written to {}\n", exp.kind, bundle.files.len() + 1, out.display()))
}

/// Parse `args` (program name first), run, report, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(msg) => {
            let _ = std::io::stdout().write_all(msg.as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
