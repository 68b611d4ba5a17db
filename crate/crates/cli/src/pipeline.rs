//! End-to-end pipeline: build-graph → communities → features → train →
//! align → eval. Every stage caches its output under
//! `<output>/cache/<stage>-<key>`, where the key hashes the stage inputs and
//! configuration, so reruns with unchanged inputs skip finished stages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use mpwa_core::community::{cd_stats, CdStats, CommunityAlgorithm, LpcConfig};
use mpwa_core::corpus_io::{load_checkpoint, load_gold, save_checkpoint, write_pharaoh, BilingualAlignmentSet};
use mpwa_core::eval::{community_alignment_eval, input_alignment_eval, score, EvalReport};
use mpwa_core::features::{raw_features_batch, Ablation, CommunitySettings, FeatureConfig, RawNodeFeatures, StandardizeMode};
use mpwa_core::gnn::TrainReport;
use mpwa_core::graph::{build_graphs, Lexicon};

use mpwa_core::inference::{align_graphs, AlignMethod, AlignOptions, ScoreMode};
use mpwa_core::{AlignmentGraph, FitConfig, GnnModel, ModelConfig, TrainConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::io::{GraphBundle, hash_files, hash_str, parse_pair, read_alignments, read_corpus, read_ids, write_file};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub community: CommunitySection,
    #[serde(default)]
    pub align: AlignSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Directory of `<lang>.txt` files.
    pub corpus: PathBuf,
    /// Directory of `<a>-<b>.align` files.
    pub alignments: PathBuf,
    pub output: PathBuf,
    pub gold: Option<PathBuf>,
    pub train_ids: Option<PathBuf>,
    pub test_ids: Option<PathBuf>,
    /// Original bilingual alignments for `tgdfa+orig`; defaults to `alignments`.
    pub orig: Option<PathBuf>,
    #[serde(default)]
    pub one_based: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub hidden: usize,
    /// Feature blocks to switch off.
    pub ablate: Vec<String>,
    pub standardize: StandardizeMode,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: 512,
            ablate: Vec::new(),
            standardize: StandardizeMode::Global,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommunitySection {
    /// Algorithms whose refined edges are evaluated.
    pub algorithms: Vec<CommunityAlgorithm>,
    pub gamma: f64,
    pub seed: u64,
    pub lpc_update_fraction: f64,
    pub lpc_max_iterations: usize,
}

impl Default for CommunitySection {
    fn default() -> Self {
        let lpc = LpcConfig::default();
        Self {
            algorithms: vec![CommunityAlgorithm::Gmc, CommunityAlgorithm::Lpc],
            gamma: 1.0,
            seed: 0,
            lpc_update_fraction: lpc.update_fraction,
            lpc_max_iterations: lpc.max_iterations,
        }
    }
}

impl CommunitySection {
    pub fn settings(&self) -> CommunitySettings {
        CommunitySettings {
            gamma: self.gamma,
            seed: self.seed,
            lpc: self.lpc(),
        }
    }

    pub fn lpc(&self) -> LpcConfig {
        LpcConfig {
            update_fraction: self.lpc_update_fraction,
            max_iterations: self.lpc_max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignSection {
    pub alpha: f64,
    pub method: AlignMethod,
    pub threshold_on: ScoreMode,
    /// Pairs such as `eng-fra`; empty means every pair of the alignment files.
    pub pairs: Vec<String>,
    /// Pair scored against the gold file.
    pub eval_pair: Option<String>,
}

impl Default for AlignSection {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            method: AlignMethod::Tgdfa,
            threshold_on: ScoreMode::Logit,
            pairs: Vec::new(),
            eval_pair: None,
        }
    }
}

impl PipelineConfig {
    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut c: Self = toml::from_str(text).context("parsing pipeline configuration")?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.paths.corpus);
        fix(&mut c.paths.alignments);
        fix(&mut c.paths.output);
        for p in [&mut c.paths.gold, &mut c.paths.train_ids, &mut c.paths.test_ids, &mut c.paths.orig]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        Ok(ModelConfig {
            features: FeatureConfig {
                ablation: Ablation::parse_list(&self.model.ablate.join(","))?,
                ..FeatureConfig::default()
            },
            hidden: self.model.hidden,
            ..ModelConfig::default()
        })
    }

    /// Checks everything that can be checked before running a stage.
    pub fn validate(&self) -> Result<()> {
        let p = &self.paths;
        for (name, path) in [("corpus", Some(&p.corpus)), ("alignments", Some(&p.alignments))]
            .into_iter()
            .chain([("gold", p.gold.as_ref()), ("train_ids", p.train_ids.as_ref()), ("test_ids", p.test_ids.as_ref()), ("orig", p.orig.as_ref())])
        {
            if let Some(path) = path {
                ensure!(path.exists(), "paths.{name}: {} does not exist", path.display());
            }
        }
        ensure!(self.model.hidden > 0, "model.hidden must be positive");
        self.model_config()?;
        ensure!(self.train.batch_size > 0, "train.batch_size must be positive");
        ensure!(self.train.epochs > 0, "train.epochs must be positive");
        ensure!(self.train.train_sample > 0, "train.train_sample must be positive");
        ensure!(self.train.lr >= 0.0 && self.train.lr.is_finite(), "train.lr must be finite and non-negative");
        ensure!(self.align.alpha > 0.0, "align.alpha must be positive");
        ensure!(
            (0.0..=1.0).contains(&self.community.lpc_update_fraction) && self.community.lpc_update_fraction > 0.0,
            "community.lpc_update_fraction must lie in (0, 1]"
        );
        for pair in self.align.pairs.iter().chain(&self.align.eval_pair) {
            parse_pair(pair)?;
        }
        if self.align.eval_pair.is_some() && p.gold.is_none() {
            bail!("align.eval_pair needs paths.gold");
        }
        Ok(())
    }
}

/// What a pipeline run produced.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PipelineOutcome {
    /// Stage name and whether it was served from the cache.
    pub stages: Vec<(String, bool)>,
    pub checkpoint: PathBuf,
    pub alignment_files: Vec<PathBuf>,
    pub train_report: TrainReport,
    pub community_stats: BTreeMap<String, CdStats>,
    /// Method name → report on the evaluation pair.
    pub eval: BTreeMap<String, EvalReport>,
}

struct Cache {
    root: PathBuf,
}

impl Cache {
    fn dir(&self, stage: &str, key: &str) -> PathBuf {
        self.root.join(format!("{stage}-{}", &key[..16]))
    }

    fn done(&self, stage: &str, key: &str) -> bool {
        self.dir(stage, key).join("DONE").exists()
    }

    fn finish(&self, stage: &str, key: &str) -> Result<()> {
        write_file(&self.dir(stage, key).join("DONE"), key)
    }

    fn read_json<T: DeserializeOwned>(&self, stage: &str, key: &str, name: &str) -> Result<T> {
        let path = self.dir(stage, key).join(name);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("decoding {}", path.display()))
    }

    fn write_json<T: Serialize>(&self, stage: &str, key: &str, name: &str, value: &T) -> Result<()> {
        write_file(&self.dir(stage, key).join(name), serde_json::to_vec(value)?)
    }
}

fn log(stage: &str, msg: impl std::fmt::Display) {
    eprintln!("[{stage}] {msg}");
}

/// Runs a closure and tags its error with the stage name.
fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().with_context(|| format!("stage `{name}` failed"))
}

pub fn run(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate().context("invalid pipeline configuration")?;
    let paths = &config.paths;
    let cache = Cache {
        root: paths.output.join("cache"),
    };
    let mut out = PipelineOutcome::default();
    let config_json = |v: &dyn erased::Json| v.json();

    // build-graph
    let corpus_files = crate::io::expand(&[paths.corpus.clone()], "txt")?;
    let align_files = crate::io::expand(&[paths.alignments.clone()], "align")?;
    let graph_key = hash_str(&[
        "build-graph",
        &hash_files(&corpus_files)?,
        &hash_files(&align_files)?,
        &paths.one_based.to_string(),
    ]);
    let corpus = stage("build-graph", || read_corpus(&corpus_files))?;
    let alignments = stage("build-graph", || read_alignments(&align_files, paths.one_based))?;
    let hit = cache.done("build-graph", &graph_key);
    let GraphBundle { lexicon, graphs } = stage("build-graph", || {
        if hit {
            return cache.read_json("build-graph", &graph_key, "graphs.json");
        }
        let lexicon = Lexicon::from_corpus(&corpus);
        let graphs = build_graphs(&corpus, &alignments, &lexicon)?;
        let s = GraphBundle { lexicon, graphs };
        cache.write_json("build-graph", &graph_key, "graphs.json", &s)?;
        cache.finish("build-graph", &graph_key)?;
        Ok(s)
    })?;
    log("build-graph", format!("{} sentence graphs{}", graphs.len(), if hit { " (cached)" } else { "" }));
    out.stages.push(("build-graph".into(), hit));

    let all_ids: Vec<String> = graphs.iter().map(|g| g.sentence_id().to_owned()).collect();
    let test_ids: Vec<String> = match &paths.test_ids {
        Some(p) => read_ids(p)?,
        None => all_ids.clone(),
    };
    let train_ids: Vec<String> = match &paths.train_ids {
        Some(p) => read_ids(p)?,
        None if paths.test_ids.is_some() => {
            let test: std::collections::BTreeSet<&String> = test_ids.iter().collect();
            all_ids.iter().filter(|i| !test.contains(i)).cloned().collect()
        }
        None => all_ids.clone(),
    };
    let pick = |ids: &[String]| -> Vec<AlignmentGraph> {
        let wanted: std::collections::BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        graphs.iter().filter(|g| wanted.contains(g.sentence_id())).cloned().collect()
    };
    let train_graphs = pick(&train_ids);
    let test_graphs = pick(&test_ids);
    let gold = paths.gold.as_deref().map(load_gold).transpose()?;
    let eval_pair = match (&config.align.eval_pair, &gold) {
        (Some(p), _) => Some(parse_pair(p)?),
        (None, Some(_)) => paths
            .gold
            .as_deref()
            .and_then(|p| p.file_stem())
            .and_then(|s| s.to_str())
            .and_then(|s| parse_pair(s).ok()),
        (None, None) => None,
    };
    let gold_hash = match &paths.gold {
        Some(p) => hash_files(&[p.clone()])?,
        None => String::new(),
    };

    // communities
    let cd_key = hash_str(&["communities", &graph_key, &config_json(&config.community), &test_ids.join(","), &gold_hash]);
    let hit = cache.done("communities", &cd_key);
    let (stats, cd_eval): (BTreeMap<String, CdStats>, BTreeMap<String, EvalReport>) = stage("communities", || {
        if hit {
            return cache.read_json("communities", &cd_key, "communities.json");
        }
        let mut stats = BTreeMap::new();
        let mut evals = BTreeMap::new();
        for &alg in &config.community.algorithms {
            let s = cd_stats(&train_graphs, alg, config.community.gamma, config.community.seed, &config.community.lpc())?;
            stats.insert(alg.to_string(), s);
            if let (Some(g), Some((x, y))) = (&gold, &eval_pair) {
                let r = community_alignment_eval(
                    &test_graphs,
                    alg,
                    config.community.gamma,
                    config.community.seed,
                    &config.community.lpc(),
                    g,
                    (x.as_str(), y.as_str()),
                )?;
                evals.insert(format!("cd-{alg}"), r);
            }
        }
        let v = (stats, evals);
        cache.write_json("communities", &cd_key, "communities.json", &v)?;
        cache.finish("communities", &cd_key)?;
        Ok(v)
    })?;
    for (alg, s) in &stats {
        log(
            "communities",
            format!(
                "{alg}: components {:.2} -> {:.2}, edges removed {:.3}",
                s.mean_components_before, s.mean_components_after, s.edge_removal_fraction
            ),
        );
    }
    out.stages.push(("communities".into(), hit));
    out.community_stats = stats;
    write_file(&paths.output.join("communities.json"), serde_json::to_vec_pretty(&out.community_stats)?)?;

    // features
    let settings = config.community.settings();
    let feat_key = hash_str(&["features", &graph_key, &config_json(&settings), &train_ids.join(",")]);
    let hit = cache.done("features", &feat_key);
    let raw: Vec<RawNodeFeatures> = stage("features", || {
        if hit {
            return cache.read_json("features", &feat_key, "features.json");
        }
        let raw = raw_features_batch(&train_graphs, &settings);
        cache.write_json("features", &feat_key, "features.json", &raw)?;
        cache.finish("features", &feat_key)?;
        Ok(raw)
    })?;
    log("features", format!("{} training graphs featurized", raw.len()));
    out.stages.push(("features".into(), hit));

    // train
    let model_config = config.model_config()?;
    let fit = FitConfig {
        model: model_config,
        train: config.train,
        community: settings,
        standardize_mode: config.model.standardize,
    };
    let train_key = hash_str(&[
        "train",
        &feat_key,
        &config_json(&model_config),
        &config_json(&config.train),
        &config_json(&config.model.standardize),
    ]);
    let hit = cache.done("train", &train_key);
    let ckpt = cache.dir("train", &train_key).join("model.mpwa");
    let (model, report) = stage("train", || {
        if hit {
            let model = load_checkpoint(&ckpt, None)?;
            let report: TrainReport = cache.read_json("train", &train_key, "train_report.json")?;
            return Ok((model, report));
        }
        let train_corpus = corpus.subset(train_ids.iter().map(String::as_str));
        let (model, report) = GnnModel::fit_with_features(&train_graphs, &raw, &lexicon, &train_corpus, &fit, |k, loss| {
            if k % 200 == 0 {
                log("train", format!("batch {k} loss {loss:.4}"));
            }
        })?;
        std::fs::create_dir_all(cache.dir("train", &train_key))?;
        save_checkpoint(&ckpt, &model)?;
        cache.write_json("train", &train_key, "train_report.json", &report)?;
        cache.finish("train", &train_key)?;
        Ok((model, report))
    })?;
    if let Some((first, last)) = report.decile_means() {
        log("train", format!("{} batches, loss first decile {first:.4}, last decile {last:.4}", report.batch_losses.len()));
    }
    let final_ckpt = paths.output.join("model.mpwa");
    write_file(&final_ckpt, std::fs::read(&ckpt)?)?;
    write_file(&paths.output.join("train_report.json"), serde_json::to_vec(&report)?)?;
    out.stages.push(("train".into(), hit));
    out.checkpoint = final_ckpt;
    out.train_report = report;

    // align
    let pairs: Vec<(String, String)> = if config.align.pairs.is_empty() {
        alignments.iter().map(|s| s.lang_pair.clone()).collect()
    } else {
        config.align.pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?
    };
    let pairs = {
        let mut pairs = pairs;
        if let Some((x, y)) = &eval_pair {
            if !pairs.iter().any(|(a, b)| (a == x && b == y) || (a == y && b == x)) {
                pairs.push((x.clone(), y.clone()));
            }
        }
        pairs
    };
    stage("align", || {
        for (a, b) in &pairs {
            for l in [a, b] {
                ensure!(model.vocab.languages().contains(l), "language `{l}` does not occur in the corpus");
            }
        }
        Ok(())
    })?;
    let orig_files = match &paths.orig {
        Some(p) => crate::io::expand(&[p.clone()], "align")?,
        None => align_files.clone(),
    };
    let opts = AlignOptions {
        alpha: config.align.alpha,
        method: config.align.method,
        mode: config.align.threshold_on,
    };
    let mut align_parts = vec!["align".to_owned(), train_key.clone(), config_json(&opts), test_ids.join(",")];
    align_parts.extend(pairs.iter().map(|(a, b)| format!("{a}-{b}")));
    if opts.method == AlignMethod::TgdfaOrig {
        align_parts.push(hash_files(&orig_files)?);
    }
    let align_key = hash_str(&align_parts.iter().map(String::as_str).collect::<Vec<_>>());
    let hit = cache.done("align", &align_key);
    let predicted: Vec<BilingualAlignmentSet> = stage("align", || {
        if hit {
            return cache.read_json("align", &align_key, "alignments.json");
        }
        let orig = if opts.method == AlignMethod::TgdfaOrig {
            read_alignments(&orig_files, paths.one_based)?
        } else {
            Vec::new()
        };
        let sets = align_graphs(&model, &test_graphs, &lexicon, &pairs, &opts, &orig)?;
        cache.write_json("align", &align_key, "alignments.json", &sets)?;
        cache.finish("align", &align_key)?;
        Ok(sets)
    })?;
    for set in &predicted {
        let path = paths.output.join("align").join(format!("{}-{}.align", set.lang_pair.0, set.lang_pair.1));
        write_file(&path, write_pharaoh(set))?;
        out.alignment_files.push(path);
    }
    log("align", format!("{} language pairs over {} sentences", predicted.len(), test_graphs.len()));
    out.stages.push(("align".into(), hit));

    // eval
    if let (Some(gold), Some((x, y))) = (&gold, &eval_pair) {
        let method = match opts.method {
            AlignMethod::Tgdfa => "gnn-tgdfa",
            AlignMethod::TgdfaOrig => "gnn-tgdfa+orig",
        };
        let pred = predicted
            .iter()
            .find_map(|s| {
                if s.lang_pair.0 == *x && s.lang_pair.1 == *y {
                    Some(s.clone())
                } else if s.lang_pair.1 == *x && s.lang_pair.0 == *y {
                    Some(s.transposed())
                } else {
                    None
                }
            })
            .with_context(|| format!("stage `eval` failed: pair {x}-{y} was not aligned"))?;
        let reports = stage("eval", || {
            let scored: BTreeMap<String, _> =
                pred.links.into_iter().filter(|(id, _)| gold.sentences.contains_key(id)).collect();
            let mut r = BTreeMap::new();
            r.insert("input".to_owned(), input_alignment_eval(&test_graphs, gold, (x.as_str(), y.as_str()))?);
            r.extend(cd_eval.clone());
            r.insert(method.to_owned(), score(&scored, gold)?);
            Ok(r)
        })?;
        let mut tsv = format!("{}\n", EvalReport::tsv_header());
        for (name, r) in &reports {
            tsv.push_str(&r.tsv_row(name));
            tsv.push('\n');
        }
        write_file(&paths.output.join("eval.tsv"), &tsv)?;
        for line in tsv.lines() {
            log("eval", line);
        }
        out.eval = reports;
        out.stages.push(("eval".into(), false));
    }
    Ok(out)
}

/// Stable JSON rendering of configuration values for cache keys.
mod erased {
    pub trait Json {
        fn json(&self) -> String;
    }

    impl<T: serde::Serialize> Json for T {
        fn json(&self) -> String {
            serde_json::to_string(self).expect("configuration serializes")
        }
    }
}
