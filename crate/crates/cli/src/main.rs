//! `pwlfit` command-line interface.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwlfit::{FitConfig, FxPolicy, Mono, Transform};

#[derive(Parser)]
#[command(name = "pwlfit", version, about = "Fit piecewise-linear curves and distill additive models into curve code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one curve to a CSV with columns x,y[,weight]
    Fit(FitArgs),
    /// Distill a teacher sample table into a curve model
    Distill(DistillArgs),
    /// Score a feature CSV with a model, appending a `score` column
    Eval(EvalArgs),
    /// Rank features by the error their distillation introduces
    Attribute(AttributeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MonoArg {
    Auto,
    None,
    Up,
    Down,
}

#[derive(Clone, Copy, ValueEnum)]
enum FxArg {
    Auto,
    Identity,
    Log,
    Log1p,
    Symlog1p,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Literal,
    Json,
}

#[derive(Args)]
struct FitOptions {
    /// Number of linear segments
    #[arg(long, default_value_t = 5)]
    segments: usize,
    #[arg(long, value_enum, default_value_t = MonoArg::None)]
    mono: MonoArg,
    /// Number of candidate x-knots
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FxArg::Auto)]
    fx: FxArg,
    /// Minimum slope of every segment (in transformed x)
    #[arg(long, allow_negative_numbers = true)]
    min_slope: Option<f64>,
    /// Maximum slope of every segment (in transformed x)
    #[arg(long, allow_negative_numbers = true)]
    max_slope: Option<f64>,
    /// Run single-threaded
    #[arg(long)]
    sequential: bool,
}

impl FitOptions {
    fn config(&self) -> FitConfig {
        let mono = match self.mono {
            MonoArg::Auto => Mono::Auto,
            MonoArg::None => Mono::None,
            MonoArg::Up => Mono::Increasing,
            MonoArg::Down => Mono::Decreasing,
        };
        let fx = match self.fx {
            FxArg::Auto => FxPolicy::Auto,
            FxArg::Identity => FxPolicy::Fixed(Transform::Identity),
            FxArg::Log => FxPolicy::Fixed(Transform::Log),
            FxArg::Log1p => FxPolicy::Fixed(Transform::Log1p),
            FxArg::Symlog1p => FxPolicy::Fixed(Transform::Symlog1p),
        };
        let mut config = FitConfig {
            num_segments: self.segments,
            mono,
            num_samples: self.samples,
            fx,
            seed: self.seed,
            parallel: !self.sequential,
            ..FitConfig::default()
        };
        if let Some(s) = self.min_slope {
            config.slope_bounds.min_slope = s;
        }
        if let Some(s) = self.max_slope {
            config.slope_bounds.max_slope = s;
        }
        config
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    fit: FitOptions,
    #[arg(long, value_enum, default_value_t = EmitArg::Literal)]
    emit: EmitArg,
    /// Feature name written into the curve
    #[arg(long, default_value = "x")]
    name: String,
    #[arg(long, default_value_t = 4)]
    sig_digits: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistillArgs {
    /// Teacher sample table (JSON)
    #[arg(long)]
    teacher: PathBuf,
    #[command(flatten)]
    fit: FitOptions,
    /// Model JSON output
    #[arg(long)]
    out: PathBuf,
    /// Also write the model as curve literals
    #[arg(long)]
    emit_code: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    sig_digits: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttributeArgs {
    #[arg(long)]
    teacher: PathBuf,
    /// CSV with a `<feature>` and `<feature>:teacher` column per feature
    #[arg(long)]
    eval: PathBuf,
    #[command(flatten)]
    fit: FitOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Distill(a) => commands::distill(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Attribute(a) => commands::attribute(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pwlfit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
