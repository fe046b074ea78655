//! K-fold comparison of classifiers on a composed dataset setup.

mod kfold;
mod metrics;
mod setup;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use kfold::{kfold_split, stratified_folds, Fold};
pub use metrics::{dummy_classifier, metrics, Confusion, DummyClassifier, Metrics};
pub use setup::{column_name, compose_setup, parse_category, scale_count, DatasetSetup, PRESETS, PRESET_COLUMNS};

use crate::datamodel::{CategoryLabel, DatasetManifest};
use crate::encoder::{EncodedDataset, FeatureSource, FusionConfig};
use crate::error::{Error, Result};
use crate::net::{epochs_to_converge, layer_dims, train, Mlp, TrainConfig, DEFAULT_HIDDEN};

/// A column of the comparison: the majority baseline or a classifier of a
/// given depth over one feature source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Dummy,
    Network { source: FeatureSource, depth: usize },
}

impl ModelSpec {
    pub fn name(&self) -> String {
        match *self {
            ModelSpec::Dummy => "D".into(),
            ModelSpec::Network { source, depth } => {
                let base = match source {
                    FeatureSource::Appearance => "R",
                    FeatureSource::Text => "T",
                    FeatureSource::Fused => "RT",
                };
                if depth == 1 {
                    base.into()
                } else {
                    format!("{base}-{depth}L")
                }
            }
        }
    }

    pub fn input_dim(&self, fusion: &FusionConfig) -> Option<usize> {
        match *self {
            ModelSpec::Dummy => None,
            ModelSpec::Network { source, .. } => Some(source.input_dim(fusion.appearance_dim, fusion.n)),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// `D`, `R`, `T`, `RT`, optionally suffixed with `-<depth>L`
    /// (`RT-3L`). `R-proxy` is accepted for `R`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("D") {
            return Ok(ModelSpec::Dummy);
        }
        let (base, depth) = match s.rsplit_once('-') {
            Some((b, d)) if d.ends_with(['L', 'l']) && d.len() > 1 && d[..d.len() - 1].bytes().all(|c| c.is_ascii_digit()) => {
                (b, d[..d.len() - 1].parse::<usize>().map_err(|e| Error::Config(e.to_string()))?)
            }
            _ => (s, 1),
        };
        let source = match base.to_ascii_uppercase().as_str() {
            "R" | "R-PROXY" => FeatureSource::Appearance,
            "T" => FeatureSource::Text,
            "RT" | "RT-PROXY" => FeatureSource::Fused,
            _ => return Err(Error::Config(format!("unknown model `{s}` (expected D, R, T, RT, optionally with -<n>L)"))),
        };
        if depth == 0 {
            return Err(Error::Config(format!("model `{s}` has depth 0")));
        }
        Ok(ModelSpec::Network { source, depth })
    }
}

pub fn parse_model_list(list: &str) -> Result<Vec<ModelSpec>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub kfold: usize,
    /// Seed of the fold assignment.
    pub seed: u64,
    /// Training schedule. Fold `i` trains with seed `train.seed + i`, used
    /// for both initialization and shuffling.
    pub train: TrainConfig,
    pub hidden: Vec<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            kfold: 5,
            seed: 0,
            train: TrainConfig::default(),
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: Metrics,
    pub confusion: Confusion,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub loss_history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epochs_to_converge: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub spec: ModelSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub layer_dims: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub folds: Vec<FoldResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<MeanMetrics>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub test_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Free-form echo of the run's inputs (paths, flags).
    #[serde(default)]
    pub run: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub setup: Option<DatasetSetup>,
    /// Category counts of the dataset actually evaluated.
    pub composition: BTreeMap<CategoryLabel, usize>,
    pub samples: usize,
    pub positives: usize,
    pub fusion: FusionConfig,
    pub config: EvalConfig,
    pub folds: Vec<FoldSummary>,
    pub models: Vec<ModelReport>,
}

impl EvalReport {
    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn mean_accuracy(&self, name: &str) -> Option<f64> {
        self.model(name).and_then(|m| m.mean).map(|m| m.accuracy)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Arithmetic mean of per-fold metrics.
pub fn mean_metrics(folds: &[FoldResult]) -> Option<MeanMetrics> {
    if folds.is_empty() {
        return None;
    }
    let n = folds.len() as f64;
    let sum = |f: fn(&Metrics) -> f64| folds.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    Some(MeanMetrics {
        accuracy: sum(|m| m.accuracy),
        precision: sum(|m| m.precision),
        recall: sum(|m| m.recall),
    })
}

fn run_fold(data: &EncodedDataset, spec: &ModelSpec, fold_idx: usize, fold: &Fold, cfg: &EvalConfig) -> Result<FoldResult> {
    let test_y = data.targets_of(&fold.test);
    let train_y = data.targets_of(&fold.train);
    let (predictions, history) = match *spec {
        ModelSpec::Dummy => (DummyClassifier::fit(&train_y)?.predict(fold.test.len()), Vec::new()),
        ModelSpec::Network { source, depth } => {
            let x_train = data.design_matrix_rows(source, &fold.train);
            let dims = layer_dims(x_train.cols(), depth, &cfg.hidden)?;
            let seed = cfg.train.seed.wrapping_add(fold_idx as u64);
            let mut model = Mlp::init(&dims, seed)?;
            let train_cfg = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            let history = train(&mut model, &x_train, &train_y, &train_cfg)?;
            let x_test = data.design_matrix_rows(source, &fold.test);
            (model.predict_all(&x_test)?, history.epoch_losses)
        }
    };
    let (metrics, confusion) = metrics(&predictions, &test_y)?;
    Ok(FoldResult {
        fold: fold_idx,
        metrics,
        confusion,
        epochs_to_converge: epochs_to_converge(&history),
        loss_history: history,
    })
}

/// K-fold evaluation of every spec on the same folds. A failing spec is
/// recorded in its [`ModelReport::error`] and does not stop the others.
pub fn evaluate(data: &EncodedDataset, specs: &[ModelSpec], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.train.validate()?;
    let folds = stratified_folds(&data.targets, cfg.kfold, cfg.seed)?;
    let fold_summaries = folds
        .iter()
        .enumerate()
        .map(|(i, f)| FoldSummary {
            fold: i,
            train_size: f.train.len(),
            test_size: f.test.len(),
            test_positives: f.test.iter().filter(|&&j| data.targets[j] == 1).count(),
        })
        .collect();

    let mut models = Vec::with_capacity(specs.len());
    for spec in specs {
        let name = spec.name();
        let layer_dims = spec
            .input_dim(&data.fusion)
            .and_then(|d| match spec {
                ModelSpec::Network { depth, .. } => layer_dims(d, *depth, &cfg.hidden).ok(),
                ModelSpec::Dummy => None,
            });
        log::info!("evaluating {name}");
        let results: Result<Vec<FoldResult>> = folds
            .iter()
            .enumerate()
            .map(|(i, f)| run_fold(data, spec, i, f, cfg))
            .collect();
        let report = match results {
            Ok(folds) => ModelReport {
                name,
                spec: *spec,
                layer_dims,
                error: None,
                mean: mean_metrics(&folds),
                folds,
            },
            Err(e) => {
                log::warn!("{name} failed: {e}");
                ModelReport {
                    name,
                    spec: *spec,
                    layer_dims,
                    error: Some(e.to_string()),
                    folds: Vec::new(),
                    mean: None,
                }
            }
        };
        models.push(report);
    }

    Ok(EvalReport {
        run: BTreeMap::new(),
        setup: None,
        composition: BTreeMap::new(),
        samples: data.len(),
        positives: data.targets.iter().filter(|&&t| t == 1).count(),
        fusion: data.fusion,
        config: cfg.clone(),
        folds: fold_summaries,
        models,
    })
}

/// Records the composition of `manifest` into the report.
pub fn attach_composition(report: &mut EvalReport, manifest: &DatasetManifest) {
    report.composition = manifest.counts_by_category();
}

/// Aligned text table with one row per report: the composition columns
/// followed by each model's mean accuracy in percent.
pub fn render_table(reports: &[&EvalReport]) -> String {
    let mut model_names: Vec<String> = Vec::new();
    for r in reports {
        for m in &r.models {
            if !model_names.contains(&m.name) {
                model_names.push(m.name.clone());
            }
        }
    }
    let mut header = vec!["Index".to_string()];
    header.extend(PRESET_COLUMNS.iter().map(|&c| column_name(c).to_string()));
    header.extend(model_names.iter().cloned());

    let mut rows = vec![header];
    for (i, r) in reports.iter().enumerate() {
        let mut row = vec![r.setup.as_ref().map_or_else(|| (i + 1).to_string(), |s| s.index.clone())];
        for c in PRESET_COLUMNS {
            row.push(match r.composition.get(&c) {
                Some(&n) if n > 0 => n.to_string(),
                _ => "-".into(),
            });
        }
        for name in &model_names {
            row.push(match r.model(name) {
                Some(ModelReport { mean: Some(m), .. }) => format!("{:.1}", 100.0 * m.accuracy),
                Some(ModelReport { error: Some(_), .. }) => "err".into(),
                _ => "".into(),
            });
        }
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (ri, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        if ri == 0 {
            let _ = writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-"));
        }
    }
    out
}
