//! Speaker-independent cross-validation harness comparing
//! bi-classification-and-voting against the single-global-subspace
//! multiclass baseline, for both the GA-selection and NN-transform paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, TrainConfig};
use crate::dataset::{
    make_speaker_folds, standardize, Dataset, LabelUniverse, Sex, SpeakerFoldPlan,
};
use crate::error::{Error, Result};
use crate::ga::{run_ga, subset_overlap, FitnessClassifier, GaConfig, Genome};
use crate::seed::{derive_seed, fingerprint};
use crate::stats::{paired_t_test, per_emotion_recall, RecallEntry, TTest};
use crate::vote::{classify, train_ensemble, PairKey, PairPlan};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const BI_METHOD_LABEL: &str = "Bi-classification and voting";
pub const MULTI_METHOD_LABEL: &str = "Multi-classification";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BiVoting,
    Multiclass,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::BiVoting => BI_METHOD_LABEL,
            Method::Multiclass => MULTI_METHOD_LABEL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspacePath {
    GaSelection,
    NnTransform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub path: SubspacePath,
    /// Bi-classifier and wrapper-fitness classifier for the GA path.
    pub classifier: FitnessClassifier,
    pub ga: GaConfig,
    pub train: TrainConfig,
    pub n_folds: usize,
    /// Hidden width of the transform network (NN path).
    pub hidden_dim: usize,
    pub master_seed: u64,
    /// Labels scored but flagged out of headline figures.
    pub exclude_from_report: Vec<String>,
    /// When set, excluded labels are dropped from training and testing
    /// entirely instead of only being flagged.
    pub exclude_from_training: bool,
    /// Optional speaker sex metadata for balanced test folds.
    pub speaker_sex: Option<BTreeMap<String, Sex>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            path: SubspacePath::GaSelection,
            classifier: FitnessClassifier::Lr,
            ga: GaConfig::default(),
            train: TrainConfig::default(),
            n_folds: 5,
            hidden_dim: 50,
            master_seed: 0,
            exclude_from_report: Vec::new(),
            exclude_from_training: false,
            speaker_sex: None,
        }
    }
}

impl ExperimentConfig {
    pub fn classifier_label(&self) -> &'static str {
        match self.path {
            SubspacePath::NnTransform => "Neural Network",
            SubspacePath::GaSelection => match self.classifier {
                FitnessClassifier::Lr => "Logistic Regression",
                FitnessClassifier::Svm => "SVM",
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldArtifacts {
    pub fold: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// GA path, bi-voting: the selected subspace per pair.
    pub pair_genomes: Vec<(PairKey, Vec<usize>)>,
    /// GA path, multiclass: the global subspace.
    pub global_genome: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub method_label: String,
    pub classifier_label: String,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub pooled_accuracy: f64,
    pub per_emotion: BTreeMap<String, RecallEntry>,
    pub folds: Vec<FoldArtifacts>,
    pub master_seed: u64,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapEntry {
    pub fold: usize,
    pub pair: String,
    pub common_features: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonColumn {
    pub classifier_label: String,
    pub bi: MethodReport,
    pub multi: MethodReport,
    pub t_test: Option<TTest>,
    /// Per-pair common-feature counts against the same fold's global genome.
    pub overlap: Vec<OverlapEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub master_seed: u64,
    pub config_fingerprint: String,
    pub columns: Vec<ComparisonColumn>,
}

struct FoldOutcome {
    predictions: Vec<(usize, usize)>,
    accuracy: f64,
    artifacts: FoldArtifacts,
}

fn drop_labels(dataset: &Dataset, drop: &[String]) -> Result<Dataset> {
    let universe = dataset.universe_required()?;
    let keep: Vec<usize> = (0..universe.len())
        .filter(|&l| !drop.contains(&universe.label(l).to_string()))
        .collect();
    if keep.len() < 2 {
        return Err(Error::Config(
            "excluding these labels leaves fewer than 2 classes".into(),
        ));
    }
    if keep.len() == universe.len() {
        return Ok(dataset.clone());
    }
    let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let labels = dataset.labels_required()?;
    let rows: Vec<usize> = (0..dataset.n_rows())
        .filter(|&r| remap.contains_key(&labels[r]))
        .collect();
    let mut out = dataset.select_rows(&rows)?;
    out.labels = Some(rows.iter().map(|&r| remap[&labels[r]]).collect());
    out.universe = Some(LabelUniverse::new(
        keep.iter().map(|&l| universe.label(l).to_string()).collect(),
    )?);
    Ok(out)
}

fn check_no_leakage(
    train: &Dataset,
    plan: &SpeakerFoldPlan,
    fold: usize,
) -> Result<()> {
    if plan.folds.len() == 1 {
        // single fold is resubstitution by construction
        return Ok(());
    }
    let test_speakers = &plan.folds[fold].test_speakers;
    let train_speakers: BTreeSet<&String> = train.speakers_required()?.iter().collect();
    for s in test_speakers {
        if train_speakers.contains(s) {
            return Err(Error::Data(format!(
                "speaker leakage: test speaker {s:?} appears in fold {fold} training data"
            )));
        }
    }
    Ok(())
}

fn check_classes_present(train: &Dataset, fold: usize) -> Result<()> {
    let universe = train.universe_required()?;
    let labels = train.labels_required()?;
    for c in 0..universe.len() {
        if !labels.contains(&c) {
            return Err(Error::Data(format!(
                "fold {fold}: class {:?} missing from training data",
                universe.label(c)
            )));
        }
    }
    Ok(())
}

fn run_fold(
    dataset: &Dataset,
    plan: &SpeakerFoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    method: Method,
) -> Result<FoldOutcome> {
    let (train_rows, test_rows) = plan.fold_rows(dataset, fold)?;
    if test_rows.is_empty() {
        return Err(Error::Data(format!("fold {fold} has no test rows")));
    }
    let train = dataset.select_rows(&train_rows)?;
    let test = dataset.select_rows(&test_rows)?;
    check_no_leakage(&train, plan, fold)?;
    check_classes_present(&train, fold)?;
    let universe = train.universe_required()?.clone();
    let master = config.master_seed;

    let mut artifacts = FoldArtifacts {
        fold,
        n_test: test.n_rows(),
        accuracy: 0.0,
        pair_genomes: Vec::new(),
        global_genome: None,
    };

    let predict: Box<dyn Fn(&[f64]) -> Result<usize>> = match (method, config.path) {
        (Method::BiVoting, SubspacePath::GaSelection) => {
            let mut plans = BTreeMap::new();
            for (lo, hi) in universe.pairs() {
                let pair_raw = train.restrict(lo, hi)?;
                let (pair_std, _, _) = standardize(&pair_raw, &[])?;
                let ga_config = GaConfig {
                    seed: derive_seed(master, &format!("fold{fold}-pair{lo}-{hi}-ga")),
                    fitness_classifier: config.classifier,
                    ..config.ga.clone()
                };
                let outcome = run_ga(&pair_std, &ga_config)?;
                let key = PairKey::new(lo, hi)?;
                artifacts
                    .pair_genomes
                    .push((key, outcome.best.indices().to_vec()));
                plans.insert(
                    key,
                    PairPlan::Ga {
                        genome: outcome.best,
                        classifier: config.classifier,
                    },
                );
            }
            let ensemble = train_ensemble(
                &train,
                &plans,
                &config.train,
                derive_seed(master, &format!("fold{fold}-ensemble")),
            )?;
            Box::new(move |row| Ok(classify(&ensemble, row)?.final_label))
        }
        (Method::Multiclass, SubspacePath::GaSelection) => {
            let (train_std, _, scaler) = standardize(&train, &[])?;
            let ga_config = GaConfig {
                seed: derive_seed(master, &format!("fold{fold}-global-ga")),
                fitness_classifier: config.classifier,
                ..config.ga.clone()
            };
            let outcome = run_ga(&train_std, &ga_config)?;
            artifacts.global_genome = Some(outcome.best.indices().to_vec());
            let projected = train_std.project(outcome.best.indices())?;
            let train_config = TrainConfig {
                seed: derive_seed(master, &format!("fold{fold}-multiclass")),
                ..config.train.clone()
            };
            let model = match config.classifier {
                FitnessClassifier::Lr => classifiers::train_logistic(&projected, &train_config)?,
                FitnessClassifier::Svm => classifiers::train_svm(&projected, &train_config)?,
            };
            let genome = outcome.best;
            Box::new(move |row| {
                let scaled = scaler.transform_row(row)?;
                let cols: Vec<f64> = genome.indices().iter().map(|&i| scaled[i]).collect();
                Ok(model.predict(&cols)?.0)
            })
        }
        (Method::BiVoting, SubspacePath::NnTransform) => {
            let plans: BTreeMap<PairKey, PairPlan> = universe
                .pairs()
                .into_iter()
                .map(|(lo, hi)| {
                    (
                        PairKey { lo, hi },
                        PairPlan::Nn {
                            hidden_dim: config.hidden_dim,
                        },
                    )
                })
                .collect();
            let ensemble = train_ensemble(
                &train,
                &plans,
                &config.train,
                derive_seed(master, &format!("fold{fold}-ensemble")),
            )?;
            Box::new(move |row| Ok(classify(&ensemble, row)?.final_label))
        }
        (Method::Multiclass, SubspacePath::NnTransform) => {
            let (train_std, _, scaler) = standardize(&train, &[])?;
            let train_config = TrainConfig {
                seed: derive_seed(master, &format!("fold{fold}-multiclass-nn")),
                ..config.train.clone()
            };
            let model = classifiers::train_nn(&train_std, &train_config, config.hidden_dim)?;
            Box::new(move |row| {
                let scaled = scaler.transform_row(row)?;
                Ok(model.predict(&scaled)?.0)
            })
        }
    };

    let truth = test.labels_required()?;
    let mut predictions = Vec::with_capacity(test.n_rows());
    let mut correct = 0usize;
    for r in 0..test.n_rows() {
        let predicted = predict(test.row(r))?;
        predictions.push((truth[r], predicted));
        if predicted == truth[r] {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / test.n_rows() as f64;
    artifacts.accuracy = accuracy;
    Ok(FoldOutcome {
        predictions,
        accuracy,
        artifacts,
    })
}

/// Run the speaker-independent cross-validation protocol for one method.
/// Folds are independent and evaluated in parallel; each owns an RNG
/// stream derived from the master seed, so results do not depend on
/// scheduling.
pub fn run_cv(dataset: &Dataset, config: &ExperimentConfig, method: Method) -> Result<MethodReport> {
    let dataset = if config.exclude_from_training {
        drop_labels(dataset, &config.exclude_from_report)?
    } else {
        dataset.clone()
    };
    let plan = make_speaker_folds(
        &dataset,
        config.n_folds,
        derive_seed(config.master_seed, "fold-plan"),
        config.speaker_sex.as_ref(),
    )?;

    let outcomes: Vec<FoldOutcome> = (0..config.n_folds)
        .into_par_iter()
        .map(|fold| run_fold(&dataset, &plan, fold, config, method))
        .collect::<Result<Vec<_>>>()?;

    let per_fold_accuracy: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
    let mean_accuracy = per_fold_accuracy.iter().sum::<f64>() / per_fold_accuracy.len() as f64;
    let all_predictions: Vec<(usize, usize)> = outcomes
        .iter()
        .flat_map(|o| o.predictions.iter().copied())
        .collect();
    let pooled_correct = all_predictions.iter().filter(|(t, p)| t == p).count();
    let pooled_accuracy = pooled_correct as f64 / all_predictions.len() as f64;
    let per_emotion = per_emotion_recall(
        &all_predictions,
        dataset.universe_required()?,
        &config.exclude_from_report,
    )?;

    Ok(MethodReport {
        method,
        method_label: method.label().to_string(),
        classifier_label: config.classifier_label().to_string(),
        per_fold_accuracy,
        mean_accuracy,
        pooled_accuracy,
        per_emotion,
        folds: outcomes.into_iter().map(|o| o.artifacts).collect(),
        master_seed: config.master_seed,
        config_fingerprint: fingerprint(config),
    })
}

/// Run both methods on the same fold plan, test the per-fold accuracy
/// difference, and (GA path) compute per-pair common-feature counts
/// against the global subspace.
pub fn compare(dataset: &Dataset, config: &ExperimentConfig) -> Result<ComparisonColumn> {
    let bi = run_cv(dataset, config, Method::BiVoting)?;
    let multi = run_cv(dataset, config, Method::Multiclass)?;
    let t_test = if config.n_folds >= 2 {
        Some(paired_t_test(
            &bi.per_fold_accuracy,
            &multi.per_fold_accuracy,
        )?)
    } else {
        None
    };
    let universe = dataset.universe_required()?;
    let mut overlap = Vec::new();
    for (bi_fold, multi_fold) in bi.folds.iter().zip(&multi.folds) {
        if let Some(global) = &multi_fold.global_genome {
            let global = Genome::new(global.clone())?;
            for (key, indices) in &bi_fold.pair_genomes {
                let genome = Genome::new(indices.clone())?;
                overlap.push(OverlapEntry {
                    fold: bi_fold.fold,
                    pair: pair_label(universe, key),
                    common_features: subset_overlap(&genome, &global),
                });
            }
        }
    }
    Ok(ComparisonColumn {
        classifier_label: config.classifier_label().to_string(),
        bi,
        multi,
        t_test,
        overlap,
    })
}

pub fn pair_label(universe: &LabelUniverse, key: &PairKey) -> String {
    format!("{}-{}", universe.label(key.lo), universe.label(key.hi))
}

pub fn comparison_report(
    master_seed: u64,
    config_fingerprint: String,
    columns: Vec<ComparisonColumn>,
) -> ComparisonReport {
    ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        master_seed,
        config_fingerprint,
        columns,
    }
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Self::Table),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

/// Aligned-text rendering mirroring the accuracy-comparison table layout:
/// one column per classifier, one row per method.
pub fn render_table(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let label_width = BI_METHOD_LABEL.len().max(MULTI_METHOD_LABEL.len());
    out.push_str("Comparison of emotion recognition accuracy\n");
    out.push_str(&format!(
        "(master seed {}, config {})\n\n",
        report.master_seed, report.config_fingerprint
    ));
    out.push_str(&format!("{:label_width$}", ""));
    for col in &report.columns {
        out.push_str(&format!("  {:>19}", col.classifier_label));
    }
    out.push('\n');
    out.push_str(&format!("{BI_METHOD_LABEL:label_width$}"));
    for col in &report.columns {
        out.push_str(&format!("  {:>19.3}", col.bi.mean_accuracy));
    }
    out.push('\n');
    out.push_str(&format!("{MULTI_METHOD_LABEL:label_width$}"));
    for col in &report.columns {
        out.push_str(&format!("  {:>19.3}", col.multi.mean_accuracy));
    }
    out.push('\n');
    for col in &report.columns {
        match &col.t_test {
            Some(t) => match (t.t, t.p, t.significant_at_005) {
                (Some(ts), Some(p), Some(sig)) => out.push_str(&format!(
                    "\n{}: paired t-test t = {:.4}, p = {:.4}{}",
                    col.classifier_label,
                    ts,
                    p,
                    if sig { " (P < 0.05)" } else { " (not significant)" }
                )),
                _ => out.push_str(&format!(
                    "\n{}: paired t-test undefined (zero-variance differences)",
                    col.classifier_label
                )),
            },
            None => out.push_str(&format!(
                "\n{}: t-test unavailable (single fold)",
                col.classifier_label
            )),
        }
    }
    out.push('\n');
    out
}

fn method_csv_rows(prefix: &str, report: &MethodReport, rows: &mut Vec<(String, String, String)>) {
    rows.push((
        prefix.to_string(),
        "mean_accuracy".into(),
        report.mean_accuracy.to_string(),
    ));
    rows.push((
        prefix.to_string(),
        "pooled_accuracy".into(),
        report.pooled_accuracy.to_string(),
    ));
    for (f, acc) in report.per_fold_accuracy.iter().enumerate() {
        rows.push((format!("{prefix}/fold{f}"), "accuracy".into(), acc.to_string()));
    }
    for (label, entry) in &report.per_emotion {
        let value = match entry.recall {
            Some(r) => r.to_string(),
            None => "undefined".into(),
        };
        let name = if entry.excluded_from_report {
            format!("recall_excluded/{label}")
        } else {
            format!("recall/{label}")
        };
        rows.push((prefix.to_string(), name, value));
    }
}

/// CSV rendering: one metric per row, columns scope,name,value.
pub fn render_csv(report: &ComparisonReport) -> String {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    rows.push((
        "run".into(),
        "master_seed".into(),
        report.master_seed.to_string(),
    ));
    rows.push((
        "run".into(),
        "config_fingerprint".into(),
        report.config_fingerprint.clone(),
    ));
    for col in &report.columns {
        let slug = col
            .classifier_label
            .to_ascii_lowercase()
            .replace(' ', "_");
        method_csv_rows(&format!("{slug}/bi"), &col.bi, &mut rows);
        method_csv_rows(&format!("{slug}/multi"), &col.multi, &mut rows);
        if let Some(t) = &col.t_test {
            rows.push((slug.clone(), "mean_diff".into(), t.mean_diff.to_string()));
            if let (Some(ts), Some(p), Some(sig)) = (t.t, t.p, t.significant_at_005) {
                rows.push((slug.clone(), "t_statistic".into(), ts.to_string()));
                rows.push((slug.clone(), "p_value".into(), p.to_string()));
                rows.push((
                    slug.clone(),
                    "significant_at_005".into(),
                    u8::from(sig).to_string(),
                ));
            } else {
                rows.push((slug.clone(), "t_test".into(), "undefined".into()));
            }
        }
        for entry in &col.overlap {
            rows.push((
                format!("{slug}/overlap/fold{}", entry.fold),
                entry.pair.clone(),
                entry.common_features.to_string(),
            ));
        }
    }
    let mut out = String::from("scope,name,value\n");
    for (scope, name, value) in rows {
        out.push_str(&format!("{scope},{name},{value}\n"));
    }
    out
}

pub fn render_json(report: &ComparisonReport) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(report)?))
}

/// Write a report in the requested format; output is byte-stable for a
/// given report object.
pub fn emit_report(report: &ComparisonReport, format: ReportFormat, path: &Path) -> Result<()> {
    let content = match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report)?,
    };
    fs::write(path, content)?;
    Ok(())
}
