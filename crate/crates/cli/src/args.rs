use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stratpref", version, about = "Measure and analyze strategic preferences of language models")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

/// Overrides applied on top of the config file.
#[derive(Debug, Args, Default, Clone)]
pub struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Score against a population server instead of the configured backend.
    #[arg(long, global = true, value_name = "URL")]
    pub backend_url: Option<String>,
    /// Population size N.
    #[arg(long, global = true, value_name = "N")]
    pub population: Option<u32>,
    /// Significance level for preference tests.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// VBP correlation threshold.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Population seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (or file, for `generate`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Concurrent scoring requests.
    #[arg(long, global = true, value_name = "K")]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit every prompt instance as JSONL.
    Generate {
        /// Built-in game name or game spec path; defaults to the config's games, then all built-ins.
        #[arg(long = "game", value_name = "GAME")]
        games: Vec<String>,
    },
    /// Run an experiment from the config file.
    Run {
        /// Replace a completed experiment directory.
        #[arg(long)]
        overwrite: bool,
        /// Replace the config's game list.
        #[arg(long = "game", value_name = "GAME")]
        games: Vec<String>,
        #[arg(long, value_enum)]
        test: Option<TestArg>,
    },
    /// Recompute verdicts and relations from an experiment directory and print them as JSON.
    Stats {
        dir: PathBuf,
        #[arg(long, value_enum)]
        test: Option<TestArg>,
    },
    /// Regenerate tables and plots; with three or more directories also the size registry.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// Payoff table, dominance and iterated elimination for a game or payoff matrix.
    Game {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact permutation rank-sum test over JSONL `{"a": [...], "b": [...]}` lines.
    Oracle {
        /// Input file; stdin when omitted.
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TestArg {
    RankSum,
    SignedRank,
}

impl From<TestArg> for stratpref_core::WilcoxonKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::RankSum => Self::RankSum,
            TestArg::SignedRank => Self::SignedRank,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}
