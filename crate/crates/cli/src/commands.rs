//! Command-line interface. Each subcommand is one pipeline stage that reads
//! and writes plain files, so stages can be run separately or chained by
//! `pipeline`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use mpwa_core::community::{cd_stats, detect, CommunityAlgorithm};
use mpwa_core::corpus_io::{load_checkpoint, load_gold, load_pos, save_checkpoint, write_pharaoh, BilingualAlignmentSet, PosTaggedCorpus};
use mpwa_core::eval::{frequency_bins, score, EvalReport};
use mpwa_core::features::{raw_features_batch, RawNodeFeatures, StandardizeMode};
use mpwa_core::graph::build_graphs;
use mpwa_core::inference::{align_graphs, AlignMethod, AlignOptions, ScoreMode};
use mpwa_core::projection::{filter_x, project, write_conll, Source};
use mpwa_core::{FitConfig, GnnModel, Lexicon, LinkSet, TrainConfig};

use crate::io::{expand, parse_pair, read_alignments, read_corpus, read_ids, write_file, GraphBundle};
use crate::pipeline::{self, CommunitySection, ModelSection, PipelineConfig};
use crate::synth::{self, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "mpwa", version, about = "Multiparallel word alignment with graph neural networks")]
pub struct Cli {
    /// Worker threads for stage-internal parallelism (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multiparallel corpus with noisy alignments and gold.
    Synth(SynthArgs),
    /// Merge bilingual alignments into per-sentence alignment graphs.
    BuildGraph(BuildGraphArgs),
    /// Detect communities and print per-sentence assignments.
    Communities(CommunitiesArgs),
    /// Compute centrality and community features of every node.
    Features(FeaturesArgs),
    /// Train the link predictor and write a checkpoint.
    Train(TrainArgs),
    /// Induce bilingual alignments from a trained model.
    Align(AlignArgs),
    /// Score alignments against gold as a TSV.
    Eval(EvalArgs),
    /// Project POS tags from tagged source languages onto a target language.
    Project(ProjectArgs),
    /// Run build-graph, communities, features, train, align and eval with caching.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn stage(&self) -> &'static str {
        match self {
            Self::Synth(_) => "synth",
            Self::BuildGraph(_) => "build-graph",
            Self::Communities(_) => "communities",
            Self::Features(_) => "features",
            Self::Train(_) => "train",
            Self::Align(_) => "align",
            Self::Eval(_) => "eval",
            Self::Project(_) => "project",
            Self::Pipeline(_) => "pipeline",
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub train_sentences: usize,
    #[arg(long, default_value_t = 200)]
    pub test_sentences: usize,
    #[arg(long, default_value_t = 8)]
    pub languages: usize,
    /// Number of concepts.
    #[arg(long, default_value_t = 400)]
    pub vocab: usize,
    #[arg(long, default_value_t = 5)]
    pub min_len: usize,
    #[arg(long, default_value_t = 15)]
    pub max_len: usize,
    /// Probability of dropping a true link from the input alignments.
    #[arg(long, default_value_t = 0.3)]
    pub edge_drop: f64,
    /// Probability per token of adding a wrong link.
    #[arg(long, default_value_t = 0.05)]
    pub edge_noise: f64,
    /// Extra drop probability for the rarest quarter of concepts.
    #[arg(long, default_value_t = 0.0)]
    pub rare_drop: f64,
    #[arg(long, default_value_t = 1.0)]
    pub zipf_exponent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Corpus files or directories of `<lang>.txt` files.
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Pharaoh files or directories of `<a>-<b>.align` files.
    #[arg(long, num_args = 1.., required = true)]
    pub alignments: Vec<PathBuf>,
    /// Alignment indices start at 1.
    #[arg(long)]
    pub one_based: bool,
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Output graph bundle (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a human-readable edge listing.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommunityFlags {
    /// Modularity resolution.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Seed of label propagation.
    #[arg(long)]
    pub community_seed: Option<u64>,
    /// Fraction of nodes updated per label propagation round.
    #[arg(long)]
    pub lpc_update_fraction: Option<f64>,
    #[arg(long)]
    pub lpc_max_iterations: Option<usize>,
}

impl CommunityFlags {
    pub fn apply(&self, c: &mut CommunitySection) {
        if let Some(v) = self.gamma {
            c.gamma = v;
        }
        if let Some(v) = self.community_seed {
            c.seed = v;
        }
        if let Some(v) = self.lpc_update_fraction {
            c.lpc_update_fraction = v;
        }
        if let Some(v) = self.lpc_max_iterations {
            c.lpc_max_iterations = v;
        }
    }

    fn section(&self) -> CommunitySection {
        let mut c = CommunitySection::default();
        self.apply(&mut c);
        c
    }
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    /// Graph bundle written by build-graph.
    #[arg(long)]
    pub graphs: PathBuf,
    #[arg(long, default_value = "gmc")]
    pub algorithm: CommunityAlgorithm,
    #[command(flatten)]
    pub community: CommunityFlags,
    /// Assignment file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub graphs: PathBuf,
    #[command(flatten)]
    pub community: CommunityFlags,
    /// Only featurize these sentence ids.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    /// Output features (JSON, keyed by sentence id).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default, Clone)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Number of training sentences sampled per epoch.
    #[arg(long)]
    pub train_sample: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hidden width of the encoder.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Feature blocks to switch off: centrality, community, position, language, word.
    #[arg(long, value_delimiter = ',')]
    pub ablate: Option<Vec<String>>,
    /// Centrality standardization: global or per-graph.
    #[arg(long)]
    pub standardize: Option<StandardizeMode>,
    /// Reuse the same negatives in every epoch.
    #[arg(long)]
    pub fixed_negatives: bool,
}

impl TrainFlags {
    pub fn apply(&self, model: &mut ModelSection, train: &mut TrainConfig) {
        if let Some(v) = self.epochs {
            train.epochs = v;
        }
        if let Some(v) = self.batch_size {
            train.batch_size = v;
        }
        if let Some(v) = self.lr {
            train.lr = v;
        }
        if let Some(v) = self.weight_decay {
            train.weight_decay = v;
        }
        if let Some(v) = self.train_sample {
            train.train_sample = v;
        }
        if let Some(v) = self.seed {
            train.seed = v;
        }
        if self.fixed_negatives {
            train.resample_negatives = false;
        }
        if let Some(v) = self.hidden {
            model.hidden = v;
        }
        if let Some(v) = &self.ablate {
            model.ablate = v.clone();
        }
        if let Some(v) = self.standardize {
            model.standardize = v;
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graphs: PathBuf,
    /// Corpus used for word embeddings (files or directories).
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Precomputed features from the features subcommand.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Training sentence ids; all graphs when absent.
    #[arg(long)]
    pub train_ids: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub community: CommunityFlags,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-batch losses (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct AlignFlags {
    /// Threshold factor: keep cells with softmax >= alpha / row width.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// tgdfa or tgdfa+orig.
    #[arg(long)]
    pub method: Option<AlignMethod>,
    /// Scores fed to the softmax: logit or probs.
    #[arg(long)]
    pub threshold_on: Option<ScoreMode>,
    /// Language pairs to align, such as `eng-fra`.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
}

impl AlignFlags {
    pub fn apply(&self, a: &mut pipeline::AlignSection) {
        if let Some(v) = self.alpha {
            a.alpha = v;
        }
        if let Some(v) = self.method {
            a.method = v;
        }
        if let Some(v) = self.threshold_on {
            a.threshold_on = v;
        }
        if let Some(v) = &self.pairs {
            a.pairs = v.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graphs: PathBuf,
    /// Sentence ids to align; all graphs when absent.
    #[arg(long)]
    pub ids: Option<PathBuf>,
    #[command(flatten)]
    pub align: AlignFlags,
    /// Original bilingual alignments for tgdfa+orig.
    #[arg(long, num_args = 1..)]
    pub orig: Vec<PathBuf>,
    #[arg(long)]
    pub one_based: bool,
    /// Output directory for `<a>-<b>.align` files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold file named `<a>-<b>.gold`.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predicted Pharaoh files named `<a>-<b>.align`.
    #[arg(long, num_args = 1.., required = true)]
    pub predicted: Vec<PathBuf>,
    /// Method names for the rows, one per predicted file.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<String>,
    #[arg(long)]
    pub one_based: bool,
    /// Add F1 per source-frequency bin (needs --corpus).
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Target language code.
    #[arg(long)]
    pub target: String,
    /// Corpus containing the target sentences.
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,
    /// Source languages in priority order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sources: Vec<String>,
    /// Pharaoh files or directories linking the target to each source.
    #[arg(long, num_args = 1.., required = true)]
    pub alignments: Vec<PathBuf>,
    /// POS files `<lang>.pos` of the source languages.
    #[arg(long, num_args = 1.., required = true)]
    pub tags: Vec<PathBuf>,
    /// Drop sentences whose share of unprojected tokens exceeds this.
    #[arg(long, default_value_t = 0.5)]
    pub x_threshold: f64,
    #[arg(long)]
    pub one_based: bool,
    /// CoNLL output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// TOML configuration.
    pub config: PathBuf,
    /// Override `paths.output`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub community: CommunityFlags,
    #[command(flatten)]
    pub align: AlignFlags,
}

/// The clap command with a footer listing every flag of every subcommand.
pub fn command() -> clap::Command {
    let cmd = Cli::command();
    let mut footer = String::from("Flags by subcommand:\n");
    for sub in cmd.get_subcommands() {
        let flags: Vec<String> = sub
            .get_arguments()
            .filter_map(|a| a.get_long().map(|l| format!("--{l}")))
            .filter(|f| f != "--help" && f != "--threads")
            .collect();
        footer.push_str(&format!("  {}: {}\n", sub.get_name(), flags.join(" ")));
    }
    footer.push_str("  global: --threads");
    cmd.after_help(footer)
}

pub fn parse_from<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        ensure!(n > 0, "--threads must be positive");
        // Ignore the error when a pool was already installed (tests call run repeatedly).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::BuildGraph(a) => cmd_build_graph(a),
        Command::Communities(a) => cmd_communities(a),
        Command::Features(a) => cmd_features(a),
        Command::Train(a) => cmd_train(a),
        Command::Align(a) => cmd_align(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Project(a) => cmd_project(a),
        Command::Pipeline(a) => cmd_pipeline(a).map(|_| ()),
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    for (name, v) in [("edge-drop", a.edge_drop), ("edge-noise", a.edge_noise), ("rare-drop", a.rare_drop)] {
        ensure!((0.0..=1.0).contains(&v), "--{name} must lie in [0, 1], got {v}");
    }
    let cfg = SynthConfig {
        train_sentences: a.train_sentences,
        test_sentences: a.test_sentences,
        languages: a.languages,
        vocab: a.vocab,
        min_len: a.min_len,
        max_len: a.max_len,
        edge_drop: a.edge_drop,
        edge_noise: a.edge_noise,
        rare_drop: a.rare_drop,
        zipf_exponent: a.zipf_exponent,
        seed: a.seed,
    };
    let corpus = synth::generate(&cfg)?;
    corpus.write(&a.out)?;
    eprintln!(
        "wrote {} languages, {} train and {} test sentences to {}",
        corpus.languages.len(),
        corpus.train_ids.len(),
        corpus.test_ids.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_build_graph(a: BuildGraphArgs) -> Result<()> {
    let corpus = read_corpus(&a.input.corpus)?;
    let alignments = read_alignments(&a.input.alignments, a.input.one_based)?;
    let lexicon = Lexicon::from_corpus(&corpus);
    let graphs = build_graphs(&corpus, &alignments, &lexicon)?;
    let bundle = GraphBundle { lexicon, graphs };
    bundle.save(&a.out)?;
    if let Some(dump) = &a.dump {
        let text: String = bundle.graphs.iter().map(|g| g.dump(&bundle.lexicon)).collect();
        write_file(dump, text)?;
    }
    let edges: usize = bundle.graphs.iter().map(|g| g.edge_count()).sum();
    eprintln!("{} graphs, {edges} edges", bundle.graphs.len());
    Ok(())
}

fn cmd_communities(a: CommunitiesArgs) -> Result<()> {
    let bundle = GraphBundle::load(&a.graphs)?;
    let c = a.community.section();
    let lpc = c.lpc();
    let mut out = String::new();
    for (k, g) in bundle.graphs.iter().enumerate() {
        let p = detect(g, a.algorithm, c.gamma, c.seed.wrapping_add(k as u64), &lpc);
        let cells: Vec<String> = p.assignment().iter().enumerate().map(|(n, c)| format!("{n}:{c}")).collect();
        out.push_str(&format!("{}\t{}\n", g.sentence_id(), cells.join(" ")));
    }
    emit(a.out.as_ref(), &out)?;
    let s = cd_stats(&bundle.graphs, a.algorithm, c.gamma, c.seed, &lpc)?;
    eprintln!(
        "{}: {} sentences, components {:.3} -> {:.3}, mean length {:.2}, edges removed {:.4}",
        a.algorithm, s.sentences, s.mean_components_before, s.mean_components_after, s.mean_sentence_length, s.edge_removal_fraction
    );
    Ok(())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_features(a: FeaturesArgs) -> Result<()> {
    let bundle = GraphBundle::load(&a.graphs)?;
    let graphs = match &a.ids {
        Some(p) => bundle.select(&read_ids(p)?),
        None => bundle.graphs,
    };
    let raw = raw_features_batch(&graphs, &a.community.section().settings());
    let keyed: BTreeMap<&str, &RawNodeFeatures> = graphs.iter().map(|g| g.sentence_id()).zip(&raw).collect();
    write_file(&a.out, serde_json::to_vec(&keyed)?)?;
    eprintln!("features for {} graphs", graphs.len());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let bundle = GraphBundle::load(&a.graphs)?;
    let (graphs, ids) = match &a.train_ids {
        Some(p) => {
            let ids = read_ids(p)?;
            (bundle.select(&ids), ids)
        }
        None => {
            let ids = bundle.graphs.iter().map(|g| g.sentence_id().to_owned()).collect();
            (bundle.graphs.clone(), ids)
        }
    };
    let corpus = read_corpus(&a.corpus)?.subset(ids.iter().map(String::as_str));
    let mut model = ModelSection::default();
    let mut train = TrainConfig::default();
    a.train.apply(&mut model, &mut train);
    let community = a.community.section();
    let cfg = PipelineConfig {
        paths: pipeline::Paths {
            corpus: PathBuf::new(),
            alignments: PathBuf::new(),
            output: PathBuf::new(),
            gold: None,
            train_ids: None,
            test_ids: None,
            orig: None,
            one_based: false,
        },
        model,
        train,
        community,
        align: Default::default(),
    };
    let fit = FitConfig {
        model: cfg.model_config()?,
        train: cfg.train,
        community: cfg.community.settings(),
        standardize_mode: cfg.model.standardize,
    };
    let log = |k: usize, loss: f32| {
        if k % 200 == 0 {
            eprintln!("batch {k} loss {loss:.4}");
        }
    };
    let (model, report) = match &a.features {
        Some(p) => {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            let mut keyed: BTreeMap<String, RawNodeFeatures> = serde_json::from_slice(&bytes)?;
            let raw = graphs
                .iter()
                .map(|g| keyed.remove(g.sentence_id()).with_context(|| format!("no features for sentence {}", g.sentence_id())))
                .collect::<Result<Vec<_>>>()?;
            GnnModel::fit_with_features(&graphs, &raw, &bundle.lexicon, &corpus, &fit, log)?
        }
        None => GnnModel::fit(&graphs, &bundle.lexicon, &corpus, &fit, log)?,
    };
    save_checkpoint(&a.out, &model)?;
    if let Some((first, last)) = report.decile_means() {
        eprintln!("{} batches, loss first decile {first:.4}, last decile {last:.4}", report.batch_losses.len());
    }
    if let Some(p) = &a.report {
        write_file(p, serde_json::to_vec(&report)?)?;
    }
    Ok(())
}

fn cmd_align(a: AlignArgs) -> Result<()> {
    let bundle = GraphBundle::load(&a.graphs)?;
    let model = load_checkpoint(&a.model, None)?;
    let graphs = match &a.ids {
        Some(p) => bundle.select(&read_ids(p)?),
        None => bundle.graphs.clone(),
    };
    let mut section = pipeline::AlignSection::default();
    a.align.apply(&mut section);
    ensure!(section.alpha > 0.0, "--alpha must be positive");
    let pairs: Vec<(String, String)> = if section.pairs.is_empty() {
        let langs = model.vocab.languages();
        let mut v = Vec::new();
        for (k, x) in langs.iter().enumerate() {
            for y in &langs[k + 1..] {
                v.push((x.clone(), y.clone()));
            }
        }
        v
    } else {
        section.pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?
    };
    let orig = match section.method {
        AlignMethod::TgdfaOrig if a.orig.is_empty() => bail!("--method tgdfa+orig needs --orig"),
        AlignMethod::TgdfaOrig => read_alignments(&a.orig, a.one_based)?,
        AlignMethod::Tgdfa => Vec::new(),
    };
    let opts = AlignOptions {
        alpha: section.alpha,
        method: section.method,
        mode: section.threshold_on,
    };
    let sets = align_graphs(&model, &graphs, &bundle.lexicon, &pairs, &opts, &orig)?;
    for set in &sets {
        write_file(&a.out.join(format!("{}-{}.align", set.lang_pair.0, set.lang_pair.1)), write_pharaoh(set))?;
    }
    eprintln!("aligned {} pairs over {} sentences", sets.len(), graphs.len());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let gold = load_gold(&a.gold)?;
    let gold_pair = a
        .gold
        .file_stem()
        .and_then(|s| s.to_str())
        .map(parse_pair)
        .transpose()?
        .context("gold file name must be `<a>-<b>.gold`")?;
    ensure!(
        a.method.is_empty() || a.method.len() == a.predicted.len(),
        "--method needs one name per predicted file"
    );
    let corpus = match a.bins {
        Some(0) => bail!("--bins must be positive"),
        Some(_) if a.corpus.is_empty() => bail!("--bins needs --corpus"),
        Some(_) => Some(read_corpus(&a.corpus)?),
        None => None,
    };
    let mut header = EvalReport::tsv_header().to_owned();
    if let Some(b) = a.bins {
        for k in 0..b {
            header.push_str(&format!("\tF1_bin{k}"));
        }
    }
    println!("{header}");
    for (k, path) in a.predicted.iter().enumerate() {
        let mut set = read_alignments(std::slice::from_ref(path), a.one_based)?
            .pop()
            .context("no alignments read")?;
        if set.lang_pair.0 == gold_pair.1 && set.lang_pair.1 == gold_pair.0 {
            set = set.transposed();
        }
        ensure!(
            set.lang_pair == gold_pair,
            "{} aligns {}-{}, gold is {}-{}",
            path.display(),
            set.lang_pair.0,
            set.lang_pair.1,
            gold_pair.0,
            gold_pair.1
        );
        let predicted: BTreeMap<String, LinkSet> =
            set.links.into_iter().filter(|(id, _)| gold.sentences.contains_key(id)).collect();
        let report = score(&predicted, &gold)?;
        if report.empty_prediction {
            eprintln!("warning: {} predicts no links; precision reported as 1", path.display());
        }
        let name = match a.method.get(k) {
            Some(m) => m.clone(),
            None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        let mut row = report.tsv_row(&name);
        if let (Some(b), Some(c)) = (a.bins, &corpus) {
            for bin in frequency_bins(&predicted, &gold, c, &gold_pair.0, b)? {
                match bin {
                    Some(r) => row.push_str(&format!("\t{:.4}", r.f1)),
                    None => row.push_str("\t-"),
                }
            }
        }
        println!("{row}");
    }
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    ensure!((0.0..=1.0).contains(&a.x_threshold), "--x-threshold must lie in [0, 1]");
    let corpus = read_corpus(&a.corpus)?;
    let mut tags = PosTaggedCorpus::default();
    for p in expand(&a.tags, "pos")? {
        tags.merge(load_pos(&p)?);
    }
    let sets = read_alignments(&a.alignments, a.one_based)?;
    // Links of each source oriented as (target token, source token).
    let mut links: BTreeMap<&str, BilingualAlignmentSet> = BTreeMap::new();
    for src in &a.sources {
        let set = sets
            .iter()
            .find_map(|s| {
                if s.lang_pair.0 == a.target && s.lang_pair.1 == *src {
                    Some(s.clone())
                } else if s.lang_pair.1 == a.target && s.lang_pair.0 == *src {
                    Some(s.transposed())
                } else {
                    None
                }
            })
            .with_context(|| format!("no alignments between {} and {src}", a.target))?;
        links.insert(src, set);
    }
    let empty = LinkSet::new();
    let mut projected = Vec::new();
    for (id, sentence) in corpus.sentences() {
        let Some(target) = sentence.get(&a.target) else { continue };
        let sources: Vec<Source<'_>> = a
            .sources
            .iter()
            .filter_map(|lang| {
                let tokens = tags.get(id, lang)?;
                let l = links[lang.as_str()].links.get(id).unwrap_or(&empty);
                Some(Source { language: lang, tokens, links: l })
            })
            .collect();
        projected.push(project(target, &sources));
    }
    let total = projected.len();
    let kept = filter_x(projected, a.x_threshold);
    eprintln!("projected {total} sentences, kept {}", kept.len());
    emit(a.out.as_ref(), &write_conll(&kept))
}

pub fn cmd_pipeline(a: PipelineArgs) -> Result<pipeline::PipelineOutcome> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(o) = a.output {
        cfg.paths.output = o;
    }
    a.train.apply(&mut cfg.model, &mut cfg.train);
    a.community.apply(&mut cfg.community);
    a.align.apply(&mut cfg.align);
    pipeline::run(&cfg)
}
