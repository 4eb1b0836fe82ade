use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use optiroute::encode::{EncodeOptions, Formulation};
use optiroute::pipeline::{self, ProblemSource, RunConfig};
use optiroute::qubo::PenaltyWeights;
use optiroute::solver::{AnnealParams, ExportFormat};

#[derive(Parser)]
#[command(name = "optiroute", version, about = "Resilient multicast routing as QUBO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode, anneal, decode and audit; exits 0 iff a valid sample exists.
    Run(RunArgs),
    /// Print per-role variable counts without building the QUBO.
    Counts(ProblemArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    problem: Option<PathBuf>,
    /// Built-in instance: A, B, loop or diamond.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, value_enum, default_value = "time")]
    formulation: FormulationArg,
    /// Keep terminal indicators as variables instead of constants.
    #[arg(long)]
    no_substitute: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = AnnealParams::default().num_reads)]
    reads: usize,
    #[arg(long, default_value_t = AnnealParams::default().sweeps_per_read)]
    sweeps: usize,
    #[arg(long, default_value_t = AnnealParams::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = AnnealParams::default().beta_start)]
    beta_start: f64,
    #[arg(long, default_value_t = AnnealParams::default().beta_end)]
    beta_end: f64,
    /// Penalty overrides, e.g. `flow=4,disjoint=16` (`structural` and
    /// `resource` set whole groups).
    #[arg(long)]
    weights: Option<String>,
    /// Write the QUBO and encoding only; do not solve.
    #[arg(long)]
    export_only: bool,
    /// QUBO file format.
    #[arg(long, value_enum, default_value = "json")]
    export_format: FormatArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Time,
    Path,
    Rwa,
    Rsa,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Time => Formulation::Time,
            FormulationArg::Path => Formulation::Path,
            FormulationArg::Rwa => Formulation::Rwa,
            FormulationArg::Rsa => Formulation::Rsa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Coord,
}

impl ProblemArgs {
    fn config(&self) -> Result<RunConfig> {
        let source = match (&self.problem, &self.fixture) {
            (Some(p), None) => ProblemSource::File(p.clone()),
            (None, Some(f)) => ProblemSource::Fixture(f.clone()),
            _ => bail!("give exactly one of --problem or --fixture"),
        };
        let mut c = RunConfig::new(source, self.formulation.into());
        if self.no_substitute {
            c.options = EncodeOptions::unsubstituted();
        }
        Ok(c)
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let mut config = args.problem.config()?;
    let mut weights = PenaltyWeights::default();
    if let Some(w) = &args.weights {
        weights.apply_overrides(w)?;
    }
    config.weights = weights;
    config.anneal = AnnealParams {
        num_reads: args.reads,
        sweeps_per_read: args.sweeps,
        beta_start: args.beta_start,
        beta_end: args.beta_end,
        seed: args.seed,
    };
    config.anneal.validate()?;
    config.export_only = args.export_only;
    config.export_format = match args.export_format {
        FormatArg::Json => ExportFormat::Json,
        FormatArg::Coord => ExportFormat::Coord,
    };

    let outcome = pipeline::run(&config)?;
    let written = pipeline::write_outputs(&outcome, &config, &args.out)
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;
    if config.export_only {
        println!(
            "{} variables, {} terms",
            outcome.report.num_vars, outcome.report.num_terms
        );
    } else {
        print!("{}", pipeline::summary_text(&outcome));
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(outcome.success(config.export_only))
}

fn counts(args: ProblemArgs) -> Result<()> {
    let config = args.config()?;
    println!("{}", pipeline::counts(&config)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Counts(a) => counts(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("no valid sample found");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
