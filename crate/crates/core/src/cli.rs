//! Command-line entry points. Every subcommand resolves its flags into a
//! config that is echoed into the files it writes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::curation::{self, SuffixQuotas};
use crate::datamodel::{load_manifest, DatasetManifest};
use crate::encoder::{encode_dataset, EncodedDataset, FeatureSource, FusionConfig, DEFAULT_K};
use crate::error::{Error, Result};
use crate::eval::{self, attach_composition, compose_setup, parse_model_list, DatasetSetup, EvalConfig};
use crate::net::{self, layer_dims, Mlp, TrainConfig};
use crate::storage;
use crate::synth::{self, SynthConfig};
use crate::vocab::{self, Vocabulary, DEFAULT_CAP, DEFAULT_TOP_N};

#[derive(Debug, Parser)]
#[command(name = "posterfuse", version, about = "Political poster classification from fused appearance and text vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the corpus word histogram and write the top-n vocabulary.
    BuildVocab(BuildVocabArgs),
    /// Train one classifier on a manifest and write its checkpoint.
    Train(TrainArgs),
    /// K-fold comparison of models on a dataset setup composed from a pool.
    Eval(EvalArgs),
    /// Write the keyword x suffix crawl plan as CSV.
    Plan(PlanArgs),
    /// Generate a synthetic pool (features, annotations, manifest).
    Synth(SynthArgs),
    /// Score a manifest with a trained checkpoint.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct BuildVocabArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    pub top_n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingFlags {
    /// Fusion weight applied to the text segment.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
    #[arg(long, default_value_t = 90)]
    pub epochs: usize,
    #[arg(long = "batch", default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hidden widths for multi-layer classifiers.
    #[arg(long, value_delimiter = ',', default_value = "512,64")]
    pub hidden: Vec<usize>,
    /// Expected appearance dimension; read from the first feature file when omitted.
    #[arg(long)]
    pub appearance_dim: Option<usize>,
}

impl TrainingFlags {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// appearance, text or fused
    #[arg(long, default_value = "fused")]
    pub mode: FeatureSource,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Loss history JSON; defaults to `<out-model>.history.json`.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pool_manifest: PathBuf,
    /// Preset 1-5, or `custom` together with --counts.
    #[arg(long, default_value = "1")]
    pub setup: String,
    /// Custom composition, e.g. `Political=170,Positive=60,Off-Topic=30`.
    #[arg(long)]
    pub counts: Option<String>,
    /// Multiplier applied to preset counts.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value = "D,R,T,RT,RT-3L")]
    pub models: String,
    #[arg(long, default_value_t = 5)]
    pub kfold: usize,
    /// Vocabulary file; built from the composed set when omitted.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    pub top_n: usize,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Directory of `<category>.txt` keyword lists.
    #[arg(long)]
    pub keywords_dir: PathBuf,
    /// CSV `suffix,quota[,category]`; the ideology quotas are used when omitted.
    #[arg(long)]
    pub quotas: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Preset 1-5 or `custom` together with --counts.
    #[arg(long, default_value = "1")]
    pub setup: String,
    #[arg(long)]
    pub counts: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = crate::encoder::DEFAULT_APPEARANCE_DIM)]
    pub appearance_dim: usize,
    #[arg(long, default_value_t = 3.0)]
    pub signal: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, default_value = "fused")]
    pub mode: FeatureSource,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
    #[arg(long)]
    pub appearance_dim: Option<usize>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::BuildVocab(a) => cmd_build_vocab(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn load_annotations(manifest: &DatasetManifest) -> Result<Vec<crate::datamodel::TextAnnotation>> {
    manifest
        .records
        .iter()
        .map(|r| storage::read_annotation_for(manifest.resolve(&r.annotation_ref), &r.id).map_err(|e| e.for_sample(&r.id)))
        .collect()
}

pub fn cmd_build_vocab(a: &BuildVocabArgs, out: &mut dyn Write) -> Result<()> {
    if a.cap == 0 || a.top_n == 0 {
        return Err(Error::Config("--cap and --top-n must be >= 1".into()));
    }
    let manifest = load_manifest(&a.manifest)?;
    let annotations = load_annotations(&manifest)?;
    let hist = vocab::build_histogram(&annotations, a.cap);
    let v = vocab::truncate_top_k(&hist, a.top_n);
    v.save(&a.out)?;

    writeln!(
        out,
        "{} documents, {} tokens, {} distinct words (cap {}, {} dropped); kept {}",
        annotations.len(),
        hist.total(),
        hist.distinct(),
        hist.cap(),
        hist.overflow_dropped(),
        v.len()
    )
    .map_err(io_err)?;
    for (rank, (w, c)) in v.entries().take(50).enumerate() {
        writeln!(out, "{:>4}  {w:<24} {c}", rank + 1).map_err(io_err)?;
    }
    Ok(())
}

fn appearance_dim_of(manifest: &DatasetManifest, flag: Option<usize>) -> Result<usize> {
    if let Some(d) = flag {
        return Ok(d);
    }
    let first = manifest
        .records
        .first()
        .ok_or_else(|| Error::Config("manifest is empty".into()))?;
    let v = storage::read_feature(manifest.resolve(&first.feature_ref)).map_err(|e| e.for_sample(&first.id))?;
    Ok(v.dim())
}

fn encode(manifest: &DatasetManifest, vocab: &Vocabulary, k: f64, appearance_dim: Option<usize>) -> Result<EncodedDataset> {
    if vocab.is_empty() {
        return Err(Error::Config("vocabulary is empty".into()));
    }
    let fusion = FusionConfig::new(k, appearance_dim_of(manifest, appearance_dim)?, vocab.len())?;
    encode_dataset(manifest, vocab, &fusion)
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    manifest: &'a Path,
    vocab: &'a Path,
    mode: FeatureSource,
    depth: usize,
    layer_dims: Vec<usize>,
    fusion: FusionConfig,
    train: TrainConfig,
    samples: usize,
    epoch_losses: &'a [f64],
    epochs_to_converge: Option<usize>,
    train_accuracy: f64,
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let manifest = load_manifest(&a.manifest)?;
    let vocab = Vocabulary::load(&a.vocab)?;
    let data = encode(&manifest, &vocab, a.training.k, a.training.appearance_dim)?;
    let x = data.design_matrix(a.mode);
    let dims = layer_dims(x.cols(), a.depth, &a.training.hidden)?;
    let cfg = a.training.train_config();
    let mut model = Mlp::init(&dims, cfg.seed)?;
    let history = net::train(&mut model, &x, &data.targets, &cfg)?;
    let predictions = model.predict_all(&x)?;
    let (m, _) = eval::metrics(&predictions, &data.targets)?;

    net::save_checkpoint(&model, &a.out_model)?;
    let history_path = a.history.clone().unwrap_or_else(|| {
        let mut p = a.out_model.clone().into_os_string();
        p.push(".history.json");
        PathBuf::from(p)
    });
    let record = TrainOutput {
        manifest: &a.manifest,
        vocab: &a.vocab,
        mode: a.mode,
        depth: a.depth,
        layer_dims: dims,
        fusion: data.fusion,
        train: cfg,
        samples: data.len(),
        epoch_losses: &history.epoch_losses,
        epochs_to_converge: net::epochs_to_converge(&history.epoch_losses),
        train_accuracy: m.accuracy,
    };
    let mut body = serde_json::to_vec_pretty(&record)?;
    body.push(b'\n');
    storage::write_atomic(&history_path, &body)?;
    writeln!(
        out,
        "trained {:?} {}-layer model on {} samples: final loss {:.6}, train accuracy {:.2}%",
        a.mode,
        a.depth,
        data.len(),
        history.final_loss().unwrap_or(f64::NAN),
        100.0 * m.accuracy
    )
    .map_err(io_err)?;
    Ok(())
}

fn resolve_setup(setup: &str, counts: Option<&str>, scale: f64, seed: u64) -> Result<DatasetSetup> {
    if setup.eq_ignore_ascii_case("custom") {
        let counts = counts.ok_or_else(|| Error::Config("--setup custom needs --counts".into()))?;
        return DatasetSetup::custom(counts, seed);
    }
    if counts.is_some() {
        return Err(Error::Config("--counts is only valid with --setup custom".into()));
    }
    let n: usize = setup
        .parse()
        .map_err(|_| Error::Config(format!("--setup must be 1-5 or custom, got `{setup}`")))?;
    DatasetSetup::preset(n, scale, seed)
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let specs = parse_model_list(&a.models)?;
    if specs.is_empty() {
        return Err(Error::Config("--models lists no models".into()));
    }
    let setup = resolve_setup(&a.setup, a.counts.as_deref(), a.scale, a.training.seed)?;
    let pool = load_manifest(&a.pool_manifest)?;
    let composed = compose_setup(&pool, &setup)?;

    let vocab = match &a.vocab {
        Some(p) => Vocabulary::load(p)?,
        None => {
            let annotations = load_annotations(&composed)?;
            vocab::truncate_top_k(&vocab::build_histogram(&annotations, a.cap), a.top_n)
        }
    };
    let data = encode(&composed, &vocab, a.training.k, a.training.appearance_dim)?;
    let cfg = EvalConfig {
        kfold: a.kfold,
        seed: a.training.seed,
        train: a.training.train_config(),
        hidden: a.training.hidden.clone(),
    };
    let mut report = eval::evaluate(&data, &specs, &cfg)?;
    attach_composition(&mut report, &composed);
    report.setup = Some(setup);
    let mut run = BTreeMap::new();
    run.insert("pool_manifest".into(), a.pool_manifest.display().to_string());
    run.insert("scale".into(), a.scale.to_string());
    run.insert("models".into(), a.models.clone());
    match &a.vocab {
        Some(p) => run.insert("vocab".into(), p.display().to_string()),
        None => run.insert("vocab".into(), format!("built from composed set (cap {}, top-n {})", a.cap, a.top_n)),
    };
    report.run = run;

    storage::write_atomic(&a.report, report.to_json()?.as_bytes())?;
    write!(out, "{}", eval::render_table(&[&report])).map_err(io_err)?;
    for m in report.models.iter().filter(|m| m.error.is_some()) {
        log::error!("{}: {}", m.name, m.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

pub fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> Result<()> {
    let quotas = match &a.quotas {
        Some(p) => SuffixQuotas::load(p)?,
        None => SuffixQuotas::ideology_defaults(),
    };
    let categories = curation::load_keyword_dir(&a.keywords_dir)?;
    let plan = curation::generate_query_plan(&categories, &quotas)?;
    plan.export(&a.out)?;
    writeln!(
        out,
        "{} categories, {} queries, image budget {}",
        categories.len(),
        plan.len(),
        plan.total_quota()
    )
    .map_err(io_err)?;
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let setup = resolve_setup(&a.setup, a.counts.as_deref(), a.scale, a.seed)?;
    let cfg = SynthConfig {
        counts: setup.counts.clone(),
        appearance_dim: a.appearance_dim,
        signal: a.signal,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let path = synth::write_pool(&cfg, &a.out_dir)?;
    writeln!(out, "wrote {} samples to {}", setup.total(), path.display()).map_err(io_err)?;
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = net::load_checkpoint(&a.model)?;
    let manifest = load_manifest(&a.manifest)?;
    let vocab = Vocabulary::load(&a.vocab)?;
    let data = encode(&manifest, &vocab, a.k, a.appearance_dim)?;
    let x = data.design_matrix(a.mode);
    let logits = model.logits(&x)?;
    for (id, z) in data.ids.iter().zip(logits) {
        writeln!(out, "{id}\t{:.6}\t{}", net::sigmoid(z), net::decide(z)).map_err(io_err)?;
    }
    Ok(())
}
