use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pronoun_core::align::Heuristic;
use pronoun_core::lm::SearchMode;
use pronoun_core::model::Direction;

const INSTANCE_FORMAT: &str = "\
Instance files: UTF-8, one instance per line, five TAB-separated fields:
  1. class labels, space-separated, one per placeholder in target order
  2. replaced target tokens, one space-separated group per placeholder;
     a group is `lemma|TAG`, several tokens are joined with `+`, and a
     group with no tokens is written `NONE`
  3. source tokens, space-separated
  4. target tokens `lemma|TAG`, space-separated, with `REPLACE_<k>` where
     a pronoun was removed; k is the 0-based source position of the
     pronoun, written without leading zeros
  5. alignment links `s-t` (0-based source and target positions),
     space-separated, sorted by s then t
Example:
  ce OTHER<TAB>ce|PRON qui|PRON<TAB>It 's an idiotic debate . It has to stop .<TAB>REPLACE_0 être|VER un|DET débat|NOM idiot|ADJ REPLACE_6 devoir|VER stopper|VER .|.<TAB>0-0 1-1 2-2 3-4 4-3 6-5 7-6 8-6 9-7 10-8";

const ALIGNMENT_FORMAT: &str = "\
Alignment files: one segment per line, links `s-t` separated by single
spaces, s the 0-based source position and t the 0-based target position.
An empty line is a segment without links.";

const PREDICTION_FORMAT: &str = "\
Prediction files: one line per instance, in instance-file order, holding
the predicted class labels separated by single spaces, one per
placeholder in target order. Labels are case-sensitive class names (e.g.
`ce`, `OTHER`). An instance without placeholders gives an empty line.";

const CANDIDATE_FORMAT: &str = "\
Candidate files: one filler per line, `CLASS<TAB>lemmas`, where lemmas
are space-separated. A line with an empty lemma list (`OTHER<TAB>`) is
the option of inserting nothing, which always counts as OTHER.";

const MODEL_FORMAT: &str = "\
Model files: UTF-8 text. The first line is `pronoun-ngram-lm<TAB>1`
(format name and version); the rest lists the order, the vocabulary, the
per-order discounts and the n-gram counts. Log-probabilities are natural
logarithms.";

const CORPUS_FORMAT: &str = "\
LM corpus files: one sentence per line, lemmas separated by whitespace.
Sentence boundary markers are added automatically.";

const CONFIG_FORMAT: &str = "\
Config files (--config): one `key = value` per line, where key is the
long name of any option (without the leading dashes), e.g.
`order = 3` or `none-penalty = -1.5`; boolean flags take `true` or
`false`. Blank lines and lines starting with `#` are ignored. Values
given on the command line override the file, which overrides defaults.
Keys that belong to other subcommands are ignored.";

const EXIT_CODES: &str = "\
Exit status: 0 on success, 1 on a data error (the message names the file
and line), 2 on a usage error.";

/// Cross-lingual pronoun prediction: build task data, run the n-gram
/// baseline and score predictions.
#[derive(Debug, Parser)]
#[command(name = "pronoun-task", version, after_long_help = [CONFIG_FORMAT, "", EXIT_CODES].join("\n"))]
pub struct Cli {
    /// Worker threads; 0 uses every core, 1 runs sequentially
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub jobs: usize,

    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Read option values from a `key = value` file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    pub dump_config: bool,

    /// Log progress to standard error
    #[arg(long, short, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combine forward and backward word alignments
    #[command(after_long_help = ALIGNMENT_FORMAT)]
    Symmetrize(SymmetrizeArgs),
    /// Build task instances from aligned, tagged bitext
    #[command(after_long_help = [INSTANCE_FORMAT, "", ALIGNMENT_FORMAT].join("\n"))]
    Extract(ExtractArgs),
    /// Train the n-gram language model
    #[command(name = "train-lm", after_long_help = [CORPUS_FORMAT, "", MODEL_FORMAT].join("\n"))]
    TrainLm(TrainLmArgs),
    /// Choose the NONE penalty on development data
    #[command(after_long_help = [INSTANCE_FORMAT, "", CANDIDATE_FORMAT].join("\n"))]
    Tune(TuneArgs),
    /// Fill the gaps of task instances with the language model
    #[command(after_long_help = [INSTANCE_FORMAT, "", PREDICTION_FORMAT, "", CANDIDATE_FORMAT].join("\n"))]
    Predict(PredictArgs),
    /// Score predictions against gold instances
    #[command(after_long_help = [INSTANCE_FORMAT, "", PREDICTION_FORMAT].join("\n"))]
    Score(ScoreArgs),
    /// Precision and recall of alignment links against a gold alignment
    #[command(name = "align-eval", after_long_help = ALIGNMENT_FORMAT)]
    AlignEval(AlignEvalArgs),
    /// Train, tune, predict and score in one run
    #[command(name = "reproduce-baseline", after_long_help = [INSTANCE_FORMAT, "", PREDICTION_FORMAT].join("\n"))]
    ReproduceBaseline(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Symmetrize(_) => "symmetrize",
            Command::Extract(_) => "extract",
            Command::TrainLm(_) => "train-lm",
            Command::Tune(_) => "tune",
            Command::Predict(_) => "predict",
            Command::Score(_) => "score",
            Command::AlignEval(_) => "align-eval",
            Command::ReproduceBaseline(_) => "reproduce-baseline",
        }
    }
}

fn direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|_| format!("unknown direction `{s}` (expected en-fr, fr-en, en-de or de-en)"))
}

fn heuristic(s: &str) -> Result<Heuristic, String> {
    s.parse().map_err(|e: pronoun_core::Error| e.to_string())
}

pub fn search_mode(s: &str) -> Result<SearchMode, String> {
    match s {
        "auto" => Ok(SearchMode::Auto),
        "exhaustive" => Ok(SearchMode::Exhaustive),
        "beam" => Ok(SearchMode::Beam(pronoun_core::lm::search::DEFAULT_BEAM_WIDTH)),
        _ => s
            .strip_prefix("beam:")
            .and_then(|w| w.parse().ok())
            .filter(|&w: &usize| w > 0)
            .map(SearchMode::Beam)
            .ok_or_else(|| format!("bad search mode `{s}` (expected auto, exhaustive, beam or beam:WIDTH)")),
    }
}

#[derive(Debug, Args)]
pub struct SymmetrizeArgs {
    /// Source-to-target alignment file
    #[arg(long, value_name = "FILE")]
    pub fwd: PathBuf,
    /// Target-to-source alignment file, links also written `s-t`
    #[arg(long, value_name = "FILE")]
    pub bwd: PathBuf,
    /// intersection, union, grow-diag, grow-diag-final or
    /// grow-diag-final-and
    #[arg(long, value_parser = heuristic, default_value = "grow-diag-final-and")]
    pub heuristic: Heuristic,
    /// Tokenized source text; sentence lengths default to the largest
    /// linked position
    #[arg(long, value_name = "FILE")]
    pub source: Option<PathBuf>,
    /// Tokenized (or tagged) target text, for sentence lengths
    #[arg(long, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Output file; standard output if omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// en-fr, fr-en, en-de or de-en
    #[arg(long, value_parser = direction)]
    pub direction: Direction,
    /// Tokenized source text, one sentence per line
    #[arg(long, value_name = "FILE")]
    pub source: PathBuf,
    /// Target text as space-separated `lemma|TAG` tokens
    #[arg(long, value_name = "FILE")]
    pub target_tagged: PathBuf,
    /// Symmetrised alignments
    #[arg(long, value_name = "FILE")]
    pub alignments: PathBuf,
    /// Dependency labels of the source tokens, space-separated, one line
    /// per sentence
    #[arg(long, value_name = "FILE")]
    pub dep_labels: Option<PathBuf>,
    /// Keep pronouns whatever their dependency label
    #[arg(long)]
    pub no_subject_filter: bool,
    /// Also emit segments without any selected pronoun
    #[arg(long)]
    pub all_segments: bool,
    /// Instance output file; standard output if omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Class frequency table; standard error if omitted
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainLmArgs {
    /// LM corpus, one sentence of lemmas per line
    #[arg(long = "in", value_name = "FILE", required_unless_present = "instances", conflicts_with = "instances")]
    pub input: Option<PathBuf>,
    /// Train on the reference targets (gaps filled) of an instance file
    #[arg(long, value_name = "FILE", requires = "direction")]
    pub instances: Option<PathBuf>,
    /// Direction of the instance file
    #[arg(long, value_parser = direction)]
    pub direction: Option<Direction>,
    /// N-gram order
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=10))]
    pub order: u64,
    /// Words seen fewer times become <unk>
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Model output file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CandidateArgs {
    /// Candidate filler file
    #[arg(long, value_name = "FILE", conflicts_with = "train")]
    pub candidates: Option<PathBuf>,
    /// Derive candidates from a training instance file: every pronoun
    /// class, the most frequent OTHER words and the empty option
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Number of non-pronoun fillers taken from the training file
    #[arg(long, default_value_t = pronoun_core::lm::DEFAULT_OTHER_FILLERS)]
    pub other_fillers: usize,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, value_parser = direction)]
    pub direction: Direction,
    /// Language model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Development instances
    #[arg(long, value_name = "FILE")]
    pub dev: PathBuf,
    #[command(flatten)]
    pub candidates: CandidateArgs,
    /// Penalty grid `start:end:step`
    #[arg(long, default_value = "0:-4:0.5")]
    pub grid: String,
    /// auto, exhaustive, beam or beam:WIDTH
    #[arg(long, value_parser = search_mode, default_value = "auto")]
    pub search: SearchMode,
    /// Output file for the grid table; standard output if omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_parser = direction)]
    pub direction: Direction,
    /// Language model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Instances to fill
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    pub candidates: CandidateArgs,
    /// Log-score added each time nothing is inserted (usually <= 0)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub none_penalty: f64,
    /// auto, exhaustive, beam or beam:WIDTH
    #[arg(long, value_parser = search_mode, default_value = "auto")]
    pub search: SearchMode,
    /// Prediction output file; standard output if omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_parser = direction)]
    pub direction: Direction,
    /// Gold instances
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Predicted labels
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// JSON output
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    /// Text output (the default)
    #[arg(long)]
    pub text: bool,
    /// Name of the system in the result row
    #[arg(long, default_value = "system")]
    pub system: String,
    /// Also score a uniform random predictor drawn with --seed
    #[arg(long)]
    pub random_baseline: bool,
}

#[derive(Debug, Args)]
pub struct AlignEvalArgs {
    /// Alignment to evaluate
    #[arg(long, value_name = "FILE")]
    pub hyp: PathBuf,
    /// Gold alignment
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Tokenized source text; adds scores for links of source pronouns
    #[arg(long, value_name = "FILE", requires = "direction")]
    pub source: Option<PathBuf>,
    /// Direction whose source pronouns are selected
    #[arg(long, value_parser = direction)]
    pub direction: Option<Direction>,
    /// JSON output
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_parser = direction)]
    pub direction: Direction,
    /// Training instances (LM corpus and candidate fillers)
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Development instances (penalty tuning)
    #[arg(long, value_name = "FILE")]
    pub dev: PathBuf,
    /// Test instances (prediction and scoring)
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,
    /// N-gram order
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=10))]
    pub order: u64,
    /// Words seen fewer times become <unk>
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Number of non-pronoun fillers
    #[arg(long, default_value_t = pronoun_core::lm::DEFAULT_OTHER_FILLERS)]
    pub other_fillers: usize,
    /// Penalty grid `start:end:step`
    #[arg(long, default_value = "0:-4:0.5")]
    pub grid: String,
    /// auto, exhaustive, beam or beam:WIDTH
    #[arg(long, value_parser = search_mode, default_value = "auto")]
    pub search: SearchMode,
    /// Directory for model.lm, candidates.tsv, tune.tsv, predictions.txt
    /// and report.txt
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}
