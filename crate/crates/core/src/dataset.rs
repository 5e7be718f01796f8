//! Utterance-level feature data: loading, validation, speaker folds,
//! standardization, and pair restriction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Ordered, fixed set of emotion labels. Label indices are stable for the
/// lifetime of the universe and across serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelUniverse {
    labels: Vec<String>,
}

impl LabelUniverse {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Data(format!(
                "label universe needs at least 2 labels, got {}",
                labels.len()
            )));
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::Data("label universe contains duplicates".into()));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All unordered label pairs in canonical (index) order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let m = self.labels.len();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                out.push((i, j));
            }
        }
        out
    }
}

/// Immutable utterance-level feature matrix plus bookkeeping. Labels are
/// stored as indices into the attached universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub utterance_ids: Vec<String>,
    features: Vec<f64>,
    n_features: usize,
    pub labels: Option<Vec<usize>>,
    pub speakers: Option<Vec<String>>,
    pub universe: Option<LabelUniverse>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        utterance_ids: Vec<String>,
        features: Vec<f64>,
        n_features: usize,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Data("dataset must have at least one feature".into()));
        }
        if utterance_ids.is_empty() {
            return Err(Error::Data("dataset contains no rows".into()));
        }
        if features.len() != utterance_ids.len() * n_features {
            return Err(Error::Data(format!(
                "feature buffer length {} does not match {} rows x {} columns",
                features.len(),
                utterance_ids.len(),
                n_features
            )));
        }
        let mut seen = HashSet::new();
        for id in &utterance_ids {
            if !seen.insert(id) {
                return Err(Error::Data(format!("duplicate utterance id {id:?}")));
            }
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature value at row {}, column {}",
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Self {
            utterance_ids,
            features,
            n_features,
            labels: None,
            speakers: None,
            universe: None,
            feature_names: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.utterance_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn features_flat(&self) -> &[f64] {
        &self.features
    }

    pub fn labels_required(&self) -> Result<&[usize]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Data("dataset has no labels".into()))
    }

    pub fn universe_required(&self) -> Result<&LabelUniverse> {
        self.universe
            .as_ref()
            .ok_or_else(|| Error::Data("dataset has no label universe".into()))
    }

    pub fn speakers_required(&self) -> Result<&[String]> {
        self.speakers
            .as_deref()
            .ok_or_else(|| Error::Data("dataset has no speaker metadata".into()))
    }

    /// New dataset keeping only the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("row selection is empty".into()));
        }
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut ids = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            ids.push(self.utterance_ids[r].clone());
        }
        Ok(Self {
            utterance_ids: ids,
            features,
            n_features: self.n_features,
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
            speakers: self
                .speakers
                .as_ref()
                .map(|s| rows.iter().map(|&r| s[r].clone()).collect()),
            universe: self.universe.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    /// New dataset keeping only the given feature columns (in the given order).
    pub fn project(&self, columns: &[usize]) -> Result<Self> {
        for &c in columns {
            if c >= self.n_features {
                return Err(Error::Data(format!(
                    "projection index {c} out of range for {} features",
                    self.n_features
                )));
            }
        }
        let mut features = Vec::with_capacity(self.n_rows() * columns.len());
        for r in 0..self.n_rows() {
            let row = self.row(r);
            features.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Self {
            utterance_ids: self.utterance_ids.clone(),
            features,
            n_features: columns.len(),
            labels: self.labels.clone(),
            speakers: self.speakers.clone(),
            universe: self.universe.clone(),
            feature_names: self
                .feature_names
                .as_ref()
                .map(|n| columns.iter().map(|&c| n[c].clone()).collect()),
        })
    }

    /// Restrict to the two labels of an emotion-pair. The result's universe
    /// is exactly the pair, in canonical (original index) order, with labels
    /// remapped to 0/1.
    pub fn restrict(&self, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::Data("pair labels must be distinct".into()));
        }
        let universe = self.universe_required()?;
        if a >= universe.len() || b >= universe.len() {
            return Err(Error::Data(format!(
                "pair ({a}, {b}) out of range for {} labels",
                universe.len()
            )));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let labels = self.labels_required()?;
        let rows: Vec<usize> = (0..self.n_rows())
            .filter(|&r| labels[r] == lo || labels[r] == hi)
            .collect();
        if rows.is_empty() {
            return Err(Error::Data(format!(
                "no rows with labels {:?} or {:?}",
                universe.label(lo),
                universe.label(hi)
            )));
        }
        let mut out = self.select_rows(&rows)?;
        let pair_universe = LabelUniverse::new(vec![
            universe.label(lo).to_string(),
            universe.label(hi).to_string(),
        ])?;
        out.labels = Some(
            rows.iter()
                .map(|&r| usize::from(labels[r] == hi))
                .collect(),
        );
        out.universe = Some(pair_universe);
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = DatasetFile::from_dataset(self);
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        file.into_dataset()
    }
}

/// On-disk dataset representation.
#[derive(Serialize, Deserialize)]
struct DatasetFile {
    schema_version: u32,
    utterance_ids: Vec<String>,
    n_features: usize,
    features: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    speakers: Option<Vec<String>>,
    universe: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

impl DatasetFile {
    fn from_dataset(d: &Dataset) -> Self {
        Self {
            schema_version: DATASET_SCHEMA_VERSION,
            utterance_ids: d.utterance_ids.clone(),
            n_features: d.n_features,
            features: (0..d.n_rows()).map(|r| d.row(r).to_vec()).collect(),
            labels: d.labels.as_ref().map(|labels| {
                let universe = d.universe.as_ref().expect("labels imply universe");
                labels.iter().map(|&l| universe.label(l).to_string()).collect()
            }),
            speakers: d.speakers.clone(),
            universe: d.universe.as_ref().map(|u| u.labels().to_vec()),
            feature_names: d.feature_names.clone(),
        }
    }

    fn into_dataset(self) -> Result<Dataset> {
        if self.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported dataset schema version {}",
                self.schema_version
            )));
        }
        let flat: Vec<f64> = self.features.iter().flatten().copied().collect();
        let mut dataset = Dataset::new(self.utterance_ids, flat, self.n_features)?;
        if let Some(names) = self.universe {
            let universe = LabelUniverse::new(names)?;
            if let Some(labels) = self.labels {
                let mut indices = Vec::with_capacity(labels.len());
                for l in &labels {
                    indices.push(universe.index_of(l).ok_or_else(|| {
                        Error::Data(format!("label {l:?} not in universe"))
                    })?);
                }
                dataset.labels = Some(indices);
            }
            dataset.universe = Some(universe);
        }
        dataset.speakers = self.speakers;
        dataset.feature_names = self.feature_names;
        Ok(dataset)
    }
}

// ---------------------------------------------------------------------------
// ARFF / CSV ingestion
// ---------------------------------------------------------------------------

enum ArffAttr {
    Numeric(String),
    Str,
    Nominal(Vec<String>),
}

/// Parse the ARFF subset produced by common feature extractors:
/// `@relation`, numeric/string attributes, at most one nominal attribute
/// (treated as the class), `%` comments, comma-separated `@data` rows.
pub fn parse_arff(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut attrs: Vec<ArffAttr> = Vec::new();
    let mut in_data = false;
    let mut string_col: Option<usize> = None;
    let mut nominal_col: Option<usize> = None;

    let mut ids: Vec<String> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut features: Vec<f64> = Vec::new();
    let mut n_rows = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                continue;
            } else if lower.starts_with("@attribute") {
                let rest = line["@attribute".len()..].trim();
                let (name, type_str) = split_attr(rest).ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "malformed @attribute declaration".into(),
                })?;
                let type_lower = type_str.to_ascii_lowercase();
                if type_lower == "numeric" || type_lower == "real" || type_lower == "integer" {
                    attrs.push(ArffAttr::Numeric(name));
                } else if type_lower == "string" {
                    if string_col.is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "more than one string attribute".into(),
                        });
                    }
                    string_col = Some(attrs.len());
                    attrs.push(ArffAttr::Str);
                } else if type_str.starts_with('{') && type_str.ends_with('}') {
                    if nominal_col.is_some() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "more than one nominal attribute".into(),
                        });
                    }
                    let values: Vec<String> = type_str[1..type_str.len() - 1]
                        .split(',')
                        .map(|v| unquote(v.trim()).to_string())
                        .collect();
                    nominal_col = Some(attrs.len());
                    attrs.push(ArffAttr::Nominal(values));
                } else {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unsupported attribute type {type_str:?}"),
                    });
                }
            } else if lower.starts_with("@data") {
                if attrs.iter().all(|a| !matches!(a, ArffAttr::Numeric(_))) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "no numeric attributes declared".into(),
                    });
                }
                in_data = true;
            } else {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unexpected header line {line:?}"),
                });
            }
        } else {
            let values: Vec<&str> = line.split(',').map(str::trim).collect();
            if values.len() != attrs.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "data row {} has {} values, expected {}",
                        n_rows,
                        values.len(),
                        attrs.len()
                    ),
                });
            }
            for (col, (value, attr)) in values.iter().zip(&attrs).enumerate() {
                match attr {
                    ArffAttr::Numeric(_) => {
                        let v: f64 = value.parse().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("invalid numeric value {value:?}"),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Parse {
                                line: lineno,
                                message: format!(
                                    "non-finite value in row {n_rows}, column {col}"
                                ),
                            });
                        }
                        features.push(v);
                    }
                    ArffAttr::Str => ids.push(unquote(value).to_string()),
                    ArffAttr::Nominal(allowed) => {
                        let v = unquote(value).to_string();
                        if !allowed.contains(&v) {
                            return Err(Error::Parse {
                                line: lineno,
                                message: format!("value {v:?} not in nominal domain"),
                            });
                        }
                        labels.push(v);
                    }
                }
            }
            n_rows += 1;
        }
    }

    if n_rows == 0 {
        return Err(Error::Data("ARFF file contains no data rows".into()));
    }
    if string_col.is_none() {
        ids = (0..n_rows).map(|i| i.to_string()).collect();
    }
    let feature_names: Vec<String> = attrs
        .iter()
        .filter_map(|a| match a {
            ArffAttr::Numeric(name) => Some(name.clone()),
            _ => None,
        })
        .collect();
    let mut dataset = Dataset::new(ids, features, feature_names.len())?;
    dataset.feature_names = Some(feature_names);
    if let Some(col) = nominal_col {
        let domain = match &attrs[col] {
            ArffAttr::Nominal(values) => values.clone(),
            _ => unreachable!(),
        };
        let universe = LabelUniverse::new(domain)?;
        dataset.labels = Some(
            labels
                .iter()
                .map(|l| universe.index_of(l).expect("checked during parse"))
                .collect(),
        );
        dataset.universe = Some(universe);
    }
    Ok(dataset)
}

fn split_attr(rest: &str) -> Option<(String, String)> {
    let rest = rest.trim();
    if rest.starts_with('\'') {
        let end = rest[1..].find('\'')? + 1;
        let name = rest[1..end].to_string();
        let ty = rest[end + 1..].trim().to_string();
        if ty.is_empty() {
            return None;
        }
        Some((name, ty))
    } else {
        let mut parts = rest.splitn(2, char::is_whitespace);
        let name = parts.next()?.to_string();
        let ty = parts.next()?.trim().to_string();
        Some((name, ty))
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .or_else(|| s.strip_prefix('"').and_then(|s| s.strip_suffix('"')))
        .unwrap_or(s)
}

/// Parse a plain CSV feature file. The header row is required. A column
/// named `utterance_id` supplies ids and a column named `label` or `class`
/// supplies labels; every other column must be numeric.
pub fn parse_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_col = headers.iter().position(|h| h == "utterance_id");
    let label_col = headers.iter().position(|h| h == "label" || h == "class");

    let numeric_cols: Vec<usize> = (0..headers.len())
        .filter(|c| Some(*c) != id_col && Some(*c) != label_col)
        .collect();
    if numeric_cols.is_empty() {
        return Err(Error::Data("CSV has no feature columns".into()));
    }

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut features = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line: i + 2,
                message: format!(
                    "row has {} values, expected {}",
                    record.len(),
                    headers.len()
                ),
            });
        }
        ids.push(match id_col {
            Some(c) => record[c].to_string(),
            None => i.to_string(),
        });
        if let Some(c) = label_col {
            labels.push(record[c].to_string());
        }
        for &c in &numeric_cols {
            let v: f64 = record[c].parse().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("invalid numeric value {:?}", &record[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("non-finite value in column {:?}", &headers[c]),
                });
            }
            features.push(v);
        }
    }
    if ids.is_empty() {
        return Err(Error::Data("CSV file contains no data rows".into()));
    }
    let mut dataset = Dataset::new(ids, features, numeric_cols.len())?;
    dataset.feature_names = Some(
        numeric_cols
            .iter()
            .map(|&c| headers[c].to_string())
            .collect(),
    );
    if label_col.is_some() {
        let universe = universe_in_first_appearance_order(&labels)?;
        dataset.labels = Some(
            labels
                .iter()
                .map(|l| universe.index_of(l).unwrap())
                .collect(),
        );
        dataset.universe = Some(universe);
    }
    Ok(dataset)
}

fn universe_in_first_appearance_order(labels: &[String]) -> Result<LabelUniverse> {
    let mut order = Vec::new();
    for l in labels {
        if !order.contains(l) {
            order.push(l.clone());
        }
    }
    LabelUniverse::new(order)
}

/// Bind speaker and label metadata from a manifest CSV with columns
/// `utterance_id,speaker_id,label`. The manifest must cover the dataset's
/// rows exactly. When `fixed_universe` is given, manifest labels must be
/// members; otherwise the universe is inferred in first-appearance order.
pub fn parse_manifest(
    path: &Path,
    dataset: &Dataset,
    fixed_universe: Option<&LabelUniverse>,
) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("manifest missing column {name:?}")))
    };
    let id_col = col("utterance_id")?;
    let speaker_col = col("speaker_id")?;
    let label_col = col("label")?;

    let mut by_id: HashMap<String, (String, String)> = HashMap::new();
    let mut duplicates = Vec::new();
    let mut n_manifest_rows = 0usize;
    for record in reader.records() {
        let record = record?;
        n_manifest_rows += 1;
        let id = record[id_col].to_string();
        if by_id
            .insert(
                id.clone(),
                (record[speaker_col].to_string(), record[label_col].to_string()),
            )
            .is_some()
        {
            duplicates.push(id);
        }
    }
    if !duplicates.is_empty() {
        return Err(Error::Data(format!(
            "manifest has duplicate utterance ids: {duplicates:?}"
        )));
    }
    if n_manifest_rows != dataset.n_rows() {
        return Err(Error::Data(format!(
            "manifest has {} rows but dataset has {}",
            n_manifest_rows,
            dataset.n_rows()
        )));
    }
    let missing: Vec<&String> = dataset
        .utterance_ids
        .iter()
        .filter(|id| !by_id.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "manifest missing utterance ids: {missing:?}"
        )));
    }

    let row_labels: Vec<String> = dataset
        .utterance_ids
        .iter()
        .map(|id| by_id[id].1.clone())
        .collect();
    let universe = match fixed_universe {
        Some(u) => u.clone(),
        None => universe_in_first_appearance_order(&row_labels)?,
    };
    let mut label_indices = Vec::with_capacity(row_labels.len());
    for l in &row_labels {
        label_indices.push(universe.index_of(l).ok_or_else(|| {
            Error::Data(format!("manifest label {l:?} not in fixed universe"))
        })?);
    }

    let mut out = dataset.clone();
    out.speakers = Some(
        dataset
            .utterance_ids
            .iter()
            .map(|id| by_id[id].0.clone())
            .collect(),
    );
    out.labels = Some(label_indices);
    out.universe = Some(universe);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Speaker folds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeakerFold {
    pub train_speakers: BTreeSet<String>,
    pub test_speakers: BTreeSet<String>,
}

/// Speaker-disjoint cross-validation plan: each speaker appears in exactly
/// one test set across the folds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeakerFoldPlan {
    pub folds: Vec<SpeakerFold>,
}

impl SpeakerFoldPlan {
    /// Row indices (train, test) of a fold within `dataset`.
    pub fn fold_rows(&self, dataset: &Dataset, fold: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let speakers = dataset.speakers_required()?;
        let f = &self.folds[fold];
        let mut train = Vec::new();
        let mut test = Vec::new();
        // not mutually exclusive: the resubstitution fold lists every
        // speaker on both sides
        for (r, s) in speakers.iter().enumerate() {
            if f.test_speakers.contains(s) {
                test.push(r);
            }
            if f.train_speakers.contains(s) {
                train.push(r);
            }
        }
        Ok((train, test))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

/// Build a deterministic speaker-disjoint fold plan. When a sex map covers
/// all speakers, each test set is balanced by dealing the sexes separately.
pub fn make_speaker_folds(
    dataset: &Dataset,
    n_folds: usize,
    seed: u64,
    sex: Option<&BTreeMap<String, Sex>>,
) -> Result<SpeakerFoldPlan> {
    if n_folds == 0 {
        return Err(Error::Config("n_folds must be at least 1".into()));
    }
    let speakers: BTreeSet<String> = dataset.speakers_required()?.iter().cloned().collect();
    if speakers.len() < n_folds {
        return Err(Error::Data(format!(
            "{} speakers is too few for {} folds",
            speakers.len(),
            n_folds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<String>> = match sex {
        Some(map) if speakers.iter().all(|s| map.contains_key(s)) => {
            let mut males: Vec<String> = speakers
                .iter()
                .filter(|s| map[*s] == Sex::Male)
                .cloned()
                .collect();
            let mut females: Vec<String> = speakers
                .iter()
                .filter(|s| map[*s] == Sex::Female)
                .cloned()
                .collect();
            males.shuffle(&mut rng);
            females.shuffle(&mut rng);
            vec![males, females]
        }
        _ => {
            let mut all: Vec<String> = speakers.iter().cloned().collect();
            all.shuffle(&mut rng);
            vec![all]
        }
    };

    let mut test_sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n_folds];
    for group in groups {
        for (i, speaker) in group.into_iter().enumerate() {
            test_sets[i % n_folds].insert(speaker);
        }
    }
    // a single fold degenerates to resubstitution; anything else would
    // leave the train side empty
    let folds = test_sets
        .into_iter()
        .map(|test| SpeakerFold {
            train_speakers: if n_folds == 1 {
                speakers.clone()
            } else {
                speakers.difference(&test).cloned().collect()
            },
            test_speakers: test,
        })
        .collect();
    Ok(SpeakerFoldPlan { folds })
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-column affine map fitted on training data. Columns with zero
/// variance map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(train: &Dataset) -> Self {
        let d = train.n_features();
        let n = train.n_rows() as f64;
        let mut means = vec![0.0; d];
        for r in 0..train.n_rows() {
            for (m, v) in means.iter_mut().zip(train.row(r)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; d];
        for r in 0..train.n_rows() {
            for ((v, x), m) in vars.iter_mut().zip(train.row(r)).zip(&means) {
                let diff = x - m;
                *v += diff * diff;
            }
        }
        let stds = vars.iter().map(|v| (v / n).sqrt()).collect();
        Scaler { means, stds }
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.means.len() {
            return Err(Error::Dimension {
                expected: self.means.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect())
    }

    pub fn transform(&self, dataset: &Dataset) -> Result<Dataset> {
        let mut features = Vec::with_capacity(dataset.features.len());
        for r in 0..dataset.n_rows() {
            features.extend(self.transform_row(dataset.row(r))?);
        }
        let mut out = dataset.clone();
        out.features = features;
        Ok(out)
    }
}

/// Fit a scaler on `train` and apply it to train and every other split.
pub fn standardize(
    train: &Dataset,
    others: &[&Dataset],
) -> Result<(Dataset, Vec<Dataset>, Scaler)> {
    let scaler = Scaler::fit(train);
    let train_std = scaler.transform(train)?;
    let others_std = others
        .iter()
        .map(|d| scaler.transform(d))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_std, others_std, scaler))
}

// ---------------------------------------------------------------------------
// EmoDB filename conventions (opt-in; the manifest stays authoritative)
// ---------------------------------------------------------------------------

pub mod emodb {
    use std::collections::BTreeMap;

    use super::Sex;
    use crate::error::{Error, Result};

    pub const LABELS: [&str; 7] = [
        "neutral",
        "anger",
        "boredom",
        "happiness",
        "sadness",
        "disgust",
        "fear",
    ];

    /// Decode speaker and emotion from an EmoDB-style utterance id like
    /// `03a01Wa`: two-digit speaker, text code, emotion letter, version.
    pub fn parse_filename(id: &str) -> Result<(String, String)> {
        let chars: Vec<char> = id.chars().collect();
        if chars.len() < 6 {
            return Err(Error::Data(format!("id {id:?} too short for EmoDB convention")));
        }
        let speaker: String = chars[0..2].iter().collect();
        if !speaker.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Data(format!("id {id:?} has non-numeric speaker code")));
        }
        let label = match chars[5] {
            'W' => "anger",
            'L' => "boredom",
            'E' => "disgust",
            'A' => "fear",
            'F' => "happiness",
            'T' => "sadness",
            'N' => "neutral",
            other => {
                return Err(Error::Data(format!(
                    "unknown EmoDB emotion code {other:?} in id {id:?}"
                )))
            }
        };
        Ok((speaker, label.to_string()))
    }

    /// Sexes of the ten EmoDB actors.
    pub fn speaker_sexes() -> BTreeMap<String, Sex> {
        let males = ["03", "10", "11", "12", "15"];
        let females = ["08", "09", "13", "14", "16"];
        let mut map = BTreeMap::new();
        for m in males {
            map.insert(m.to_string(), Sex::Male);
        }
        for f in females {
            map.insert(f.to_string(), Sex::Female);
        }
        map
    }
}
