mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "sixcyl",
    version,
    about = "Six equal cylinders touching the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distances, minimum distance and radius of a symmetric configuration.
    Eval(EvalArgs),
    /// Sample the unlocking trajectory as CSV.
    Curve(CurveArgs),
    /// The record configuration with closed forms.
    Record,
    /// Maximin search over all six-line configurations.
    Optimize(OptimizeArgs),
    /// Random perturbations around a configuration.
    Probe(ProbeArgs),
    /// First-order unlocking verdict for a ring of vertical lines.
    UnlockCheck(UnlockArgs),
    /// Sample the four-cylinder motion as CSV.
    FourCyl(FourCylArgs),
    /// Write the ball and cylinders as an OBJ mesh.
    ExportScene(SceneArgs),
    /// Run every verification check.
    ReportAll(ReportArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Trajectory parameter in (0, 1].
    #[arg(long)]
    pub x: Option<f64>,
    /// Trajectory point with this latitude (branch between the peak and x = 1).
    #[arg(long, allow_hyphen_values = true)]
    pub curve_phi: Option<f64>,
    /// Read and print angles in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Grid x_i = i/n for i = 1..n.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Centre of the starts: record, c6, curve:<x> or file:<path>.
    #[arg(long)]
    pub from: Option<String>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub radius: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// record, c6, curve:<x> or file:<path>.
    #[arg(long, default_value = "record")]
    pub at: String,
}

#[derive(Debug, Args)]
pub struct UnlockArgs {
    /// Longitude gap between neighbouring lines.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct FourCylArgs {
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Follow the other root of U^2 + 2STU = 1.
    #[arg(long)]
    pub mirror: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// record, c6, curve:<x> or file:<path>.
    #[arg(long, default_value = "record")]
    pub at: String,
    /// Cylinder radius; defaults to the admissible radius of the configuration.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    pub cyl_length: f64,
    #[arg(long, default_value_t = 64)]
    pub segments: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub json: bool,
    /// Evaluate the record checks at a shifted point; the run must fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Eval(a) => commands::eval(&a),
        Command::Curve(a) => commands::curve(&a),
        Command::Record => commands::record(),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Probe(a) => commands::probe(&a),
        Command::UnlockCheck(a) => commands::unlock_check(&a),
        Command::FourCyl(a) => commands::four_cyl(&a),
        Command::ExportScene(a) => commands::export_scene(&a),
        Command::ReportAll(a) => commands::report_all(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(error::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Verification(out)) => {
            print!("{out}");
            ExitCode::from(error::EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
