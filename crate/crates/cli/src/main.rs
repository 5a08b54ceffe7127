use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gesture_gmm::gmm::CovarianceMode;

mod commands;

/// Hand-gesture clustering and classification from landmark recordings.
#[derive(Debug, Parser)]
#[command(name = "gesture-gmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic labeled corpus of landmark videos plus a manifest.
    Synth(SynthArgs),
    /// Fit normalization, the mixture and the label map; write a model file.
    Train(TrainArgs),
    /// Classify videos with a trained model and print one record per video.
    Classify(ClassifyArgs),
    /// Silhouette score of a model's clustering of a dataset.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = gesture_gmm::synth::DEFAULT_VIDEOS_PER_PROFILE)]
    videos_per_profile: usize,
    #[arg(long, default_value_t = gesture_gmm::synth::DEFAULT_FRAMES)]
    frames: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CovModeArg {
    Full,
    Diag,
}

impl From<CovModeArg> for CovarianceMode {
    fn from(m: CovModeArg) -> Self {
        match m {
            CovModeArg::Full => CovarianceMode::Full,
            CovModeArg::Diag => CovarianceMode::Diagonal,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of landmark files, a single landmark file, or a feature CSV.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the trained model.
    #[arg(long)]
    model: PathBuf,
    /// Number of components; defaults to the number of distinct labels.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    reg_eps: f64,
    #[arg(long, value_enum, default_value = "full")]
    cov_mode: CovModeArg,
    /// Also write the extracted training features as CSV.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory for scatter data (before.txt by label, after.txt by cluster).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Directory of landmark files, a single landmark file, or a feature CSV.
    #[arg(long)]
    input: PathBuf,
    /// Also write the result records to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Train(a) => commands::train(a),
        Command::Classify(a) => commands::classify(a),
        Command::Score(a) => commands::score(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
