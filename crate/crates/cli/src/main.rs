//! `agec`: scoring, annotation, corruption, tagging, statistics and LLM
//! correction over line-aligned corpus files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use agec_core::text::NormalizationMode;

#[derive(Parser, Debug)]
#[command(name = "agec", version, about = "Arabic grammatical error correction toolkit")]
pub struct Cli {
    /// TOML file with optional [score], [corruption] and [transport] sections.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the corruption seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Normalization regime; scoring reports every regime when omitted.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Also write the report as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Only print errors on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    NoAlifYa,
    NoPunct,
    /// No alif/ya and no punctuation.
    None,
}

impl From<Mode> for NormalizationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => NormalizationMode::Exact,
            Mode::NoAlifYa => NormalizationMode::NoAlifYa,
            Mode::NoPunct => NormalizationMode::NoPunct,
            Mode::None => NormalizationMode::NoAlifYaNoPunct,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Score hypotheses against gold M2 edits.
    Score(ScoreArgs),
    /// Build M2 annotations from source and reference files.
    Annotate(AnnotateArgs),
    /// Generate a synthetic parallel corpus from clean sentences.
    Corrupt(CorruptArgs),
    /// Encode, decode or count edit tags.
    Tags {
        #[command(subcommand)]
        action: TagsCommand,
    },
    /// Corpus statistics for an M2 file.
    Stats(StatsArgs),
    /// Correct or corrupt sentences through a chat-completion model.
    Llm(LlmArgs),
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Tokenized source sentences, one per line.
    #[arg(long)]
    pub src: PathBuf,
    /// System output, line-aligned with the source.
    #[arg(long)]
    pub hyp: PathBuf,
    /// Gold annotations.
    #[arg(long)]
    pub m2: PathBuf,
    /// F-measure weights; defaults to the config, then 1.0 and 0.5.
    #[arg(long = "beta", value_name = "BETA")]
    pub betas: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Fill the type field with error classes instead of NA.
    #[arg(long)]
    pub types: bool,
    /// Write M2 here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorruptArgs {
    /// Clean sentences, one per line.
    #[arg(long)]
    pub clean: PathBuf,
    /// Output directory for corpus.tsv (noisy, clean) and corpus.m2.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum TagsCommand {
    /// Print one tag dump line per sentence pair.
    Encode(PairArgs),
    /// Reconstruct targets, either from a dump or by iterating the oracle tagger.
    Decode {
        /// Tag dump lines to apply once each.
        #[arg(long, conflicts_with_all = ["src", "tgt"])]
        tags: Option<PathBuf>,
        #[arg(long, requires = "tgt")]
        src: Option<PathBuf>,
        #[arg(long, requires = "src")]
        tgt: Option<PathBuf>,
        #[arg(long, default_value_t = agec_core::tags::DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Tag counts over a parallel corpus.
    Stats(PairArgs),
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub m2: PathBuf,
    /// Optional source file checked against the M2 sources.
    #[arg(long)]
    pub src: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Cot,
    Expert,
    Corruptor,
}

fn parse_shots(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if agec_core::llm::prompt::ALLOWED_SHOTS.contains(&n) {
        Ok(n)
    } else {
        Err("must be one of 0, 1, 3, 5".into())
    }
}

#[derive(Args, Debug)]
pub struct LlmArgs {
    /// Sentences to correct (or to corrupt with --strategy corruptor).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StrategyArg::Cot)]
    pub strategy: StrategyArg,
    #[arg(long, default_value = "0", value_parser = parse_shots)]
    pub shots: usize,
    /// Example pairs as `source<TAB>target` lines; the first --shots are used.
    #[arg(long)]
    pub shots_file: Option<PathBuf>,
    /// Print prompts as JSON lines and exit without sending anything.
    #[arg(long)]
    pub dry_run: bool,
    /// Answer from recorded `prompt`/`response` JSON lines instead of the network.
    #[arg(long, conflicts_with = "dry_run")]
    pub replay: Option<PathBuf>,
    /// Request/response log (JSON lines).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("AGEC_LOG")
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
