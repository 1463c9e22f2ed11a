//! Command-line pipeline driver.
//!
//! One subcommand per pipeline stage plus `validate` for the built-in
//! closed-form checks. Stage subcommands read an optional config file and
//! apply flag overrides, so every run is reproducible from its inputs.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 I/O or file-format error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastimap::config::RunConfig;
use elastimap::pipeline::{run_pipeline, Stage};
use elastimap::validate::run_validation;
use elastimap::Error;

#[derive(Parser)]
#[command(
    name = "elastimap",
    version,
    about = "Forward solvers and modulus-map reconstruction for heterogeneous elasticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate reference modulus maps into the output directory.
    Generate(ConfigFlags),
    /// Solve the forward problem once per configured load.
    Solve(ConfigFlags),
    /// Reconstruct modulus maps from solved strain fields.
    Reconstruct(ConfigFlags),
    /// Run the built-in closed-form validation checks.
    Validate,
    /// Recompute summary statistics, write report.txt, and print it.
    Report(ConfigFlags),
}

/// Configuration source plus per-key overrides. Every flag mirrors one
/// config-file key; flags win over file values.
#[derive(Args)]
struct ConfigFlags {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Spatial dimension, 2 or 3.
    #[arg(long)]
    dimension: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<String>,
    /// Relative modulus contrast in [0, 1].
    #[arg(long)]
    contrast: Option<String>,
    /// Seed for all random generation.
    #[arg(long)]
    seed: Option<String>,
    /// Reference-map generator: smooth, voronoi, or inclusion.
    #[arg(long)]
    generator: Option<String>,
    /// Correlation length along the first axis (smooth generator).
    #[arg(long)]
    corr_x: Option<String>,
    /// Correlation length along the second axis (smooth generator).
    #[arg(long)]
    corr_y: Option<String>,
    /// Cell count (voronoi generator).
    #[arg(long)]
    cells: Option<String>,
    /// Inclusion radius in domain units (inclusion generator).
    #[arg(long)]
    radius: Option<String>,
    /// Forward solver: spectral or fem.
    #[arg(long)]
    solver: Option<String>,
    /// Relative residual tolerance for both solvers.
    #[arg(long)]
    tol: Option<String>,
    /// Iteration cap for the solvers.
    #[arg(long)]
    max_iter: Option<String>,
    /// Load set: spherical, deviatoric, or both.
    #[arg(long)]
    loads: Option<String>,
    /// Bounded-reconstruction anchoring: mean or none.
    #[arg(long)]
    anchoring: Option<String>,
    /// Also emit the single-load shear map (true/false).
    #[arg(long)]
    diagnostics: Option<String>,
    /// Nominal mean bulk modulus.
    #[arg(long)]
    kappa0: Option<String>,
    /// Nominal mean shear modulus.
    #[arg(long)]
    mu0: Option<String>,
    /// Directory for all artifacts.
    #[arg(long)]
    output_dir: Option<String>,
}

impl ConfigFlags {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let overrides: [(&str, &Option<String>); 18] = [
            ("dimension", &self.dimension),
            ("grid", &self.grid),
            ("contrast", &self.contrast),
            ("seed", &self.seed),
            ("generator", &self.generator),
            ("corr_x", &self.corr_x),
            ("corr_y", &self.corr_y),
            ("cells", &self.cells),
            ("radius", &self.radius),
            ("solver", &self.solver),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("loads", &self.loads),
            ("anchoring", &self.anchoring),
            ("diagnostics", &self.diagnostics),
            ("kappa0", &self.kappa0),
            ("mu0", &self.mu0),
            ("output_dir", &self.output_dir),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 1,
        Error::Io(_)
        | Error::BadMagic
        | Error::UnsupportedVersion(_)
        | Error::TruncatedPayload { .. } => 3,
        _ => 2,
    }
}

fn run_stage(flags: &ConfigFlags, stage: Stage) -> Result<(), Error> {
    let config = flags.resolve()?;
    let manifest = run_pipeline(&config, &[stage])?;
    for name in &manifest.files {
        println!("wrote {}", config.output_dir.join(name).display());
    }
    if stage == Stage::Report {
        let report = std::fs::read_to_string(config.output_dir.join("report.txt"))?;
        print!("{report}");
    }
    Ok(())
}

fn run_validate() -> u8 {
    let summary = run_validation();
    for check in &summary.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        println!("{status}  {} ({})", check.name, check.detail);
    }
    if summary.all_passed() {
        0
    } else {
        eprintln!("error: validation checks failed");
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(flags) => run_stage(flags, Stage::Generate),
        Command::Solve(flags) => run_stage(flags, Stage::Solve),
        Command::Reconstruct(flags) => run_stage(flags, Stage::Reconstruct),
        Command::Report(flags) => run_stage(flags, Stage::Report),
        Command::Validate => return ExitCode::from(run_validate()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
