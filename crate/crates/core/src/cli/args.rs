use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::Population;

#[derive(Debug, Parser)]
#[command(
    name = "threadlab",
    version,
    about = "Conversation-thread models, analyses and predictors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub(crate) fn common(&self) -> &Common {
        match &self.command {
            Command::Simulate(a) => &a.common,
            Command::Analyze { analysis } => match analysis {
                Analysis::Heatmap(a) => &a.common,
                Analysis::PatternStats(a) => &a.common,
                Analysis::LengthVsLinks(a) => &a.common,
                Analysis::LengthVsLag(a) => &a.common,
                Analysis::Distinctiveness(a) => &a.common,
            },
            Command::MakeCorpus(a) => &a.common,
            Command::ExtractFeatures(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Evaluate(a) => &a.common,
            Command::SelectFeatures(a) => &a.common,
            Command::CrossValidate(a) => &a.common,
        }
    }

    pub(crate) fn jobs(&self) -> usize {
        self.common().jobs
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo (or exact) distinct-participant density of a model.
    Simulate(SimulateArgs),
    /// Descriptive analyses of a corpus.
    Analyze {
        #[command(subcommand)]
        analysis: Analysis,
    },
    /// Generate a synthetic corpus.
    MakeCorpus(MakeCorpusArgs),
    /// Write the feature matrix of a prediction task.
    ExtractFeatures(ExtractArgs),
    /// Train bagged trees on a prediction task and score the held-out half.
    Train(TrainArgs),
    /// Score a saved model or a baseline.
    Evaluate(EvaluateArgs),
    /// Greedy forward feature selection by validation AUC.
    SelectFeatures(SelectArgs),
    /// K-fold cross-validation of bagged trees.
    CrossValidate(CvArgs),
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Heat map of distinct-participant densities for k = 1..kmax.
    Heatmap(HeatmapArgs),
    /// Re-entry rate of ID code 1 by prefix pattern.
    PatternStats(PatternStatsArgs),
    /// Mean length by number of edges among the first k participants.
    LengthVsLinks(LinksArgs),
    /// Mean length by time to first comment.
    LengthVsLag(LagArgs),
    /// Mean length by post or first-commenter distinctiveness.
    Distinctiveness(DistinctivenessArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// key=value file supplying defaults for any long flag.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Urn,
    Classf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "urn")]
    pub model: ModelKind,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Thread length (number of comments).
    #[arg(long)]
    pub k: usize,
    /// Class-F arrival probabilities: `uniform:P` or `p1,p2,...`.
    #[arg(long)]
    pub p: Option<String>,
    /// Class-F re-entry rule: uniform, rich-get-richer[:s], recency[:decay].
    #[arg(long, default_value = "uniform")]
    pub theta: String,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    /// Write the exact class-F distribution instead of simulating.
    #[arg(long)]
    pub exact: bool,
    /// Also write the simulated threads as a corpus.
    #[arg(long)]
    pub write_corpus: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CorpusArgs {
    /// Threads file (JSONL).
    #[arg(long)]
    pub threads: Option<PathBuf>,
    /// Edges file (CSV); omitted means no edges.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, default_value = "synthetic")]
    pub population: Population,
    /// Drop threads shorter than this when loading.
    #[arg(long, default_value_t = 0)]
    pub min_length: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GroupingArgs {
    #[arg(long, value_enum, default_value = "length")]
    pub response: ResponseArg,
    /// Groups holding less than this share of threads are flagged sparse.
    #[arg(long, default_value_t = 0.01)]
    pub sparse_share: f64,
    #[arg(long, default_value_t = 1)]
    pub min_threads_per_user: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseArg {
    Length,
    Reentry,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityArg {
    Comments,
    Likes,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    Post,
    FirstCommenter,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HeatmapArgs {
    #[arg(long, default_value_t = 50)]
    pub kmax: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PatternStatsArgs {
    #[arg(long, default_value_t = 5)]
    pub prefix: usize,
    /// Group prefixes by ID-code multiset instead of exact sequence.
    #[arg(long)]
    pub binned: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LinksArgs {
    /// Number of first distinct participants whose links are counted.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "comments")]
    pub entity: EntityArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub grouping: GroupingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LagArgs {
    /// Number of quantile buckets of first-comment lag.
    #[arg(long, default_value_t = 20)]
    pub buckets: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grouping: GroupingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DistinctivenessArgs {
    #[arg(long, value_enum, default_value = "post")]
    pub target: TargetArg,
    #[arg(long, default_value_t = 10)]
    pub buckets: usize,
    /// Background language model (CSV); trained on the corpus posts if omitted.
    #[arg(long)]
    pub lm: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub oov_floor: f64,
    #[arg(long, default_value_t = 5)]
    pub min_words: usize,
    #[arg(long, default_value_t = 1)]
    pub min_comments: usize,
    #[arg(long, default_value_t = 5)]
    pub min_posts: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grouping: GroupingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MakeCorpusArgs {
    #[arg(long, default_value_t = 50)]
    pub posters: usize,
    #[arg(long, default_value_t = 20)]
    pub posts_per_poster: usize,
    #[arg(long, value_enum, default_value = "urn")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    /// Comma-separated urn alphas mixed with equal weight; overrides --alpha.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value = "uniform:0.5")]
    pub p: String,
    #[arg(long, default_value = "uniform")]
    pub theta: String,
    /// fixed:L, uniform:MIN:MAX, geometric:MIN:MEAN_EXTRA[:MAX], empirical:L=W,...
    #[arg(long, default_value = "geometric:1:9:200")]
    pub lengths: String,
    #[arg(long, default_value_t = 0.7)]
    pub length_coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    pub time_coupling: f64,
    #[arg(long, default_value_t = 600.0)]
    pub mean_gap_secs: f64,
    #[arg(long, default_value_t = 60)]
    pub audience_size: usize,
    #[arg(long, default_value_t = 0.8)]
    pub audience_share: f64,
    #[arg(long, default_value_t = 0.9)]
    pub poster_link_prob: f64,
    #[arg(long, default_value_t = 0.1)]
    pub edge_prob: f64,
    #[arg(long, default_value_t = 5000)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 1.1)]
    pub zipf_exponent: f64,
    #[arg(long, default_value_t = 3.0)]
    pub post_like_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    pub comment_like_mean: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Length,
    Reentry,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TaskArgs {
    #[arg(long, value_enum, default_value = "length")]
    pub task: TaskKind,
    /// Number of observed comments.
    #[arg(long, default_value_t = 5)]
    pub prefix: usize,
    /// Length task: positive when the thread reaches this many comments.
    #[arg(long, default_value_t = 8)]
    pub threshold: usize,
    /// Re-entry task: the ID code whose return is predicted.
    #[arg(long, default_value_t = 1)]
    pub target_code: u32,
    #[arg(long, default_value_t = 0.5)]
    pub test_fraction: f64,
    /// Comma-separated post terms to use as indicator features.
    #[arg(long)]
    pub terms: Option<String>,
    /// Add post and first-commenter distinctiveness features.
    #[arg(long)]
    pub text_features: bool,
    #[arg(long, default_value_t = 5)]
    pub min_posts: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ForestArgs {
    #[arg(long, default_value_t = 60)]
    pub trees: usize,
    #[arg(long, default_value_t = 12)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 10)]
    pub min_leaf: usize,
    /// Score at or above which ACC counts a prediction as positive.
    #[arg(long, default_value_t = 0.5)]
    pub decision_threshold: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExtractArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    PositiveBias,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvaluateArgs {
    /// Saved model (JSON) to score.
    #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineKind>,
    /// Feature CSV to score in full instead of a corpus task's test split.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub decision_threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SelectArgs {
    #[arg(long, default_value_t = 7)]
    pub max_steps: usize,
    /// Trees per candidate fit during the search.
    #[arg(long, default_value_t = 20)]
    pub inner_trees: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CvArgs {
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Feature CSV to cross-validate instead of a corpus task.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
