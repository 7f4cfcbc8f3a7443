mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Geometry theorem proving as a Markov decision process.
#[derive(Parser, Debug)]
#[command(name = "georeason", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared search and training knobs. A `--config` file of `key=value` lines
/// is applied after the flags and wins over them.
#[derive(Args, Debug, Clone, Default)]
pub struct Tuning {
    /// Schema library; the bundled one when omitted.
    #[arg(long)]
    pub gdl: Option<PathBuf>,
    /// Policy model JSON; a uniform policy when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Wall-clock limit per search, in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub sims: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Timing and progress on stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a theorem sequence that solves one problem.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value = "mcts")]
        method: String,
        /// Also write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Replay a theorem sequence and check that it solves the problem.
    Verify {
        problem: PathBuf,
        /// JSON list of {"theorem", "branch"}; the problem's annotated
        /// sequence when omitted.
        sequence: Option<PathBuf>,
        /// Write the proof trace as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Supervised pretraining then policy-gradient generations.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory for model files and metrics.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Top-k hit rates of a model on the held-out split.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,10,15,20,25")]
        k: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Success rates of several methods by difficulty level.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated method names; all nine when omitted.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Directory for bench.json and bench.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Problem counts by category and difficulty level.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tuning: Tuning,
    },
}

/// Solved, unsolved, or a tool error.
pub enum Outcome {
    Solved,
    Unsolved,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { problem, method, out, tuning } => commands::solve(&problem, &method, out.as_deref(), &tuning),
        Command::Verify { problem, sequence, dot, tuning } => {
            commands::verify(&problem, sequence.as_deref(), dot.as_deref(), &tuning)
        }
        Command::Train { corpus, out, tuning } => commands::train(&corpus, &out, &tuning),
        Command::Eval { corpus, k, out, tuning } => commands::eval(&corpus, &k, out.as_deref(), &tuning),
        Command::Bench { corpus, methods, out, tuning } => commands::bench(&corpus, &methods, out.as_deref(), &tuning),
        Command::Stats { corpus, json, tuning } => commands::stats(&corpus, json, &tuning),
    };
    match result {
        Ok(Outcome::Solved) => ExitCode::SUCCESS,
        Ok(Outcome::Unsolved) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
