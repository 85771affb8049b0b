use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kasus",
    version,
    about = "Case-marking probes for German ditransitive clauses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate acceptable and violating sentences from templates.
    Generate(GenerateArgs),
    /// Train a unigram or bigram model on a one-sentence-per-line corpus.
    Train(TrainArgs),
    /// Score every dataset sentence with a trained n-gram model.
    Score(ScoreArgs),
    /// Write `<id>\t<text>` requests for an external scorer.
    ExportRequests(ExportRequestsArgs),
    /// Validate and import `<id>\t<score>` lines from an external scorer.
    ImportScores(ImportScoresArgs),
    /// Filter and normalize human ratings into sentence scores.
    ImportAnnotations(ImportAnnotationsArgs),
    /// Compute per-set AUCs for one score file.
    Evaluate(EvaluateArgs),
    /// Render aggregate tables from per-set AUC files.
    Report(ReportArgs),
    /// Pearson correlations between a reference and other scorers.
    Correlate(CorrelateArgs),
    /// Run the rating collection service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, env = "KASUS_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "KASUS_TEMPLATES")]
    pub templates: PathBuf,
    /// Directory receiving dataset.jsonl and sets.jsonl.
    #[arg(long, env = "KASUS_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "KASUS_CORPUS")]
    pub corpus: PathBuf,
    /// 1 for an unsmoothed unigram model, 2 for an add-one bigram model.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    #[arg(long, default_value_t = kasus_core::scoring::ngram::DEFAULT_VOCAB_SIZE)]
    pub vocab_size: usize,
    /// Number of threads counting disjoint line subsets.
    #[arg(long, default_value_t = 1)]
    pub partitions: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "KASUS_MODEL")]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Scorer label; defaults to "unigram" or "bigram".
    #[arg(long)]
    pub name: Option<String>,
    /// Drop `. , ! ?` tokens before scoring.
    #[arg(long)]
    pub no_punctuation: bool,
}

#[derive(Debug, Args)]
pub struct ExportRequestsArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportScoresArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportAnnotationsArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "KASUS_ANNOTATIONS")]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "humans")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RestrictionArg {
    /// All six violations of each set.
    All,
    Nom,
    Acc,
    Dat,
    /// All of the above, one row per set and restriction.
    Every,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum, default_value_t = RestrictionArg::Every)]
    pub restriction: RestrictionArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write ROC points of every set as CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-set AUC files, one per scorer.
    #[arg(long = "aucs", required = true, num_args = 1..)]
    pub aucs: Vec<PathBuf>,
    /// When given, every AUC file must have been produced for this dataset.
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: Option<PathBuf>,
    /// `appendix`, `main`, or a JSON file with markedness_order and
    /// plausibility_order.
    #[arg(long, default_value = "appendix")]
    pub ranking: String,
    #[arg(long, env = "KASUS_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelationMode {
    /// Per-set AUC vectors over the six-violation sets.
    Sets,
    /// Per-sentence scores.
    Sentences,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Reference file (per-set AUCs, or scores in sentence mode).
    #[arg(long)]
    pub reference: PathBuf,
    /// Files to compare with the reference.
    #[arg(long = "with", required = true, num_args = 1..)]
    pub with: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = CorrelationMode::Sets)]
    pub mode: CorrelationMode,
    /// Needed in sentence mode to read score files.
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "KASUS_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "KASUS_FILLERS")]
    pub fillers: PathBuf,
    /// Append-only rating log; created if absent.
    #[arg(long, env = "KASUS_LOG")]
    pub log: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub target_annotations: u32,
    #[arg(long, default_value_t = 12)]
    pub filler_every: usize,
    #[arg(long, default_value_t = 6)]
    pub warmup_items: usize,
    #[arg(long)]
    pub require_eligibility: bool,
}
