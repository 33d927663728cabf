use std::path::PathBuf;

use attnsent::training::OptimizerKind;
use attnsent::{AttentionKind, TagKind};
use clap::{Args, Parser, Subcommand};

fn attention(s: &str) -> Result<AttentionKind, String> {
    s.parse().map_err(|e: attnsent::Error| e.to_string())
}

fn optimizer(s: &str) -> Result<OptimizerKind, String> {
    s.parse().map_err(|e: attnsent::Error| e.to_string())
}

fn tag_kind(s: &str) -> Result<TagKind, String> {
    match s {
        "pos" => Ok(TagKind::Pos),
        "ccg" => Ok(TagKind::Ccg),
        _ => Err(format!("unknown tag kind `{s}` (expected pos or ccg)")),
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a non-negative number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Attention-weighted sentence embeddings: language models, training,
/// encoding, evaluation and analysis.
#[derive(Debug, Parser)]
#[command(name = "attnsent", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an n-gram language model or score text with one.
    #[command(subcommand)]
    Lm(LmCommand),
    /// Train word and tag vectors.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Encode sentences into vectors.
    Embed(EmbedArgs),
    /// Evaluate a bundle on similarity or reading-time data.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Inspect what the attention model learned.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Subcommand)]
pub enum LmCommand {
    /// Count n-grams and estimate modified Kneser-Ney discounts.
    Build(LmBuildArgs),
    /// Per-token surprisal in nats, clipped to [0, 10] unless --no-clip.
    Surprisal(LmSurprisalArgs),
}

#[derive(Debug, Args)]
pub struct LmBuildArgs {
    /// Corpus with one sentence per line; `word#TAG` tokens are reduced to the word.
    pub corpus: PathBuf,
    /// N-gram order (published setting).
    #[arg(long, default_value_t = 5, value_parser = positive)]
    pub order: usize,
    /// Words seen fewer times become <unk> (tool default).
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub min_count: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct LmSurprisalArgs {
    #[arg(long)]
    pub lm: PathBuf,
    pub input: PathBuf,
    /// Emit raw surprisal instead of the clipped value.
    #[arg(long)]
    pub no_clip: bool,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TrainCommand {
    /// Adjacent-sentence objective over documents (blank line between documents).
    Scbow(ScbowArgs),
    /// Paraphrase max-margin objective with in-batch hard negatives.
    Pp(PpArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Initial word vectors (`<count> <dim>` header, then `word v1 .. vd`).
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value = "uniform", value_parser = attention)]
    pub attention: AttentionKind,
    /// Language model for surprisal attention.
    #[arg(long)]
    pub lm: Option<PathBuf>,
    /// Dimension of random word vectors when --init is absent [default: 300, published setting].
    #[arg(long, value_parser = positive)]
    pub dim: Option<usize>,
    /// Random seed; recorded in the bundle (tool default).
    #[arg(long, env = "ATTNSENT_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Drop the 1/n factor from sentence composition.
    #[arg(long)]
    pub no_length_factor: bool,
    /// Output bundle directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScbowArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Passes over the corpus (published setting).
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub epochs: usize,
    /// Center sentences per update (published setting).
    #[arg(long, default_value_t = 100, value_parser = positive)]
    pub batch: usize,
    /// Negative sentences per center (published setting).
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub neg: usize,
    /// Learning rate (published setting).
    #[arg(long, default_value_t = 0.001, value_parser = positive_f64)]
    pub lr: f64,
    /// adadelta (published setting) or adagrad.
    #[arg(long, default_value = "adadelta", value_parser = optimizer)]
    pub optimizer: OptimizerKind,
}

#[derive(Debug, Args)]
pub struct PpArgs {
    /// Paraphrase pairs, `phrase1 TAB phrase2 [TAB score]`.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Pairs for a second phase that trains the attention parameters.
    #[arg(long)]
    pub attn_pairs: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Word-phase epochs (published setting).
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub epochs: usize,
    /// Attention-phase epochs (tool default).
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub attn_epochs: usize,
    /// Pairs per batch; negatives are mined within it (published setting).
    #[arg(long, default_value_t = 100, value_parser = positive)]
    pub batch: usize,
    /// Weight of the pull towards the initial vectors (published setting).
    #[arg(long, default_value_t = 1e-5, value_parser = non_negative_f64)]
    pub lambda: f64,
    /// Word-phase learning rate (published setting).
    #[arg(long, default_value_t = 0.05, value_parser = positive_f64)]
    pub lr: f64,
    /// Attention-phase learning rate (tool default).
    #[arg(long, default_value_t = 0.05, value_parser = positive_f64)]
    pub attn_lr: f64,
    /// adagrad (published setting) or adadelta.
    #[arg(long, default_value = "adagrad", value_parser = optimizer)]
    pub optimizer: OptimizerKind,
    /// Keep word vectors fixed in the attention phase (default on).
    #[arg(long, overrides_with = "no_freeze_words")]
    pub freeze_words: bool,
    /// Co-train word vectors in the attention phase.
    #[arg(long, overrides_with = "freeze_words")]
    pub no_freeze_words: bool,
}

#[derive(Debug, Args)]
pub struct EncoderArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Attention scheme; the bundle's own when omitted.
    #[arg(long, value_parser = attention)]
    pub attention: Option<AttentionKind>,
    /// Language model for surprisal attention.
    #[arg(long)]
    pub lm: Option<PathBuf>,
    /// Sentences defining document frequencies for tf-idf; the evaluated
    /// sentences when omitted.
    #[arg(long)]
    pub tfidf_corpus: Option<PathBuf>,
    /// Drop the 1/n factor from sentence composition.
    #[arg(long)]
    pub no_length_factor: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub encoder: EncoderArgs,
    pub sentences: PathBuf,
    /// Per-token attention weights, `word TAB weight`, blank line between sentences.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Pearson and Spearman between gold scores and cosine similarity.
    Sts(EvalStsArgs),
    /// Correlation between attention weights and reading times.
    Rt(EvalRtArgs),
}

#[derive(Debug, Args)]
pub struct EvalStsArgs {
    #[command(flatten)]
    pub encoder: EncoderArgs,
    /// Dataset files, `gold TAB sentence1 TAB sentence2`.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    /// Report TSV; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalRtArgs {
    #[command(flatten)]
    pub encoder: EncoderArgs,
    /// One token per line, `word#TAG TAB fpass TAB gopast TAB rb`.
    pub data: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Mean attention per tag for the most frequent tags (CSV).
    Tags(AnalyzeTagsArgs),
    /// Words closest to a tag vector by cosine.
    Nearest(AnalyzeNearestArgs),
    /// Tags ranked by vector length.
    Norms(AnalyzeNormsArgs),
    /// Words with the lowest and highest mean attention.
    Extremes(AnalyzeExtremesArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeTagsArgs {
    #[command(flatten)]
    pub encoder: EncoderArgs,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of tags reported (tool default).
    #[arg(long, default_value_t = 20, value_parser = positive)]
    pub top: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeNearestArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub tag: String,
    #[arg(short, default_value_t = 3)]
    pub k: usize,
    /// pos or ccg; follows the bundle's attention when omitted.
    #[arg(long, value_parser = tag_kind)]
    pub tags: Option<TagKind>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeNormsArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, value_parser = tag_kind)]
    pub tags: Option<TagKind>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeExtremesArgs {
    #[command(flatten)]
    pub encoder: EncoderArgs,
    /// Tagged test sentences; may be repeated.
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(short, default_value_t = 5)]
    pub k: usize,
    /// Words seen fewer times are not ranked (tool default; 1 ranks every word).
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub min_occurrences: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
