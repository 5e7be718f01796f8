//! Pairwise ensemble construction and the voting-and-competition decision
//! rule, plus an exhaustive verifier for its correctness guarantee: when
//! every bi-classifier involving the true label decides for it, the vote
//! returns that label regardless of all other verdicts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, BiClassifierModel, TrainConfig};
use crate::dataset::{Dataset, LabelUniverse, Scaler};
use crate::error::{Error, Result};
use crate::ga::Genome;
use crate::seed::derive_seed;

pub const ENSEMBLE_SCHEMA_VERSION: u32 = 1;

/// Unordered pair of distinct label indices, canonicalized as lo < hi.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct PairKey {
    pub lo: usize,
    pub hi: usize,
}

impl PairKey {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::Data("pair labels must be distinct".into()));
        }
        Ok(if a < b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        })
    }

    pub fn members(&self) -> [usize; 2] {
        [self.lo, self.hi]
    }

    /// Position of this pair in the canonical enumeration of all C(M,2)
    /// pairs of an M-label universe.
    pub fn index(&self, m: usize) -> usize {
        self.lo * (2 * m - self.lo - 1) / 2 + (self.hi - self.lo - 1)
    }
}

/// All pairs of an M-label universe in canonical order.
pub fn all_pairs(m: usize) -> Vec<PairKey> {
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for lo in 0..m {
        for hi in (lo + 1)..m {
            out.push(PairKey { lo, hi });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PairSubspace {
    /// Selected feature indices; the model consumes the projection.
    Genome(Genome),
    /// The model is a network whose hidden layer is the transformed space.
    NnHidden,
}

/// Per-pair training recipe.
#[derive(Debug, Clone)]
pub enum PairPlan {
    Ga {
        genome: Genome,
        classifier: crate::ga::FitnessClassifier,
    },
    Nn {
        hidden_dim: usize,
    },
}

/// One trained bi-classifier bound to its pair, subspace, and scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub key: PairKey,
    pub subspace: PairSubspace,
    pub model: BiClassifierModel,
    pub scaler: Scaler,
}

impl PairModel {
    /// Verdict for a raw (unscaled, full-dimensional) feature vector:
    /// one of the pair's two global label indices.
    pub fn verdict(&self, features: &[f64]) -> Result<usize> {
        let scaled = self.scaler.transform_row(features)?;
        let local = match &self.subspace {
            PairSubspace::Genome(genome) => {
                let projected: Vec<f64> =
                    genome.indices().iter().map(|&i| scaled[i]).collect();
                self.model.predict(&projected)?.0
            }
            PairSubspace::NnHidden => self.model.predict(&scaled)?.0,
        };
        Ok(if local == 0 { self.key.lo } else { self.key.hi })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EnsembleMetadata {
    pub config_fingerprint: String,
    pub seed: u64,
}

/// The full set of C(M,2) pair models over one label universe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseEnsemble {
    pub universe: LabelUniverse,
    pub models: Vec<PairModel>,
    pub metadata: EnsembleMetadata,
}

impl PairwiseEnsemble {
    pub fn n_pairs(&self) -> usize {
        self.models.len()
    }

    pub fn raw_dimensionality(&self) -> usize {
        self.models[0].scaler.means.len()
    }
}

/// Train one bi-classifier per pair: restrict to the pair, standardize on
/// the pair's rows, then project (GA plan) or learn the transform and
/// classifier jointly (NN plan).
pub fn train_ensemble(
    dataset: &Dataset,
    plans: &BTreeMap<PairKey, PairPlan>,
    config: &TrainConfig,
    seed: u64,
) -> Result<PairwiseEnsemble> {
    let universe = dataset.universe_required()?.clone();
    let labels = dataset.labels_required()?;
    for c in 0..universe.len() {
        if !labels.contains(&c) {
            return Err(Error::Data(format!(
                "dataset has no rows for label {:?}",
                universe.label(c)
            )));
        }
    }
    let mut models = Vec::new();
    for (lo, hi) in universe.pairs() {
        let key = PairKey { lo, hi };
        let plan = plans.get(&key).ok_or_else(|| {
            Error::Data(format!(
                "missing subspace plan for pair {}-{}",
                universe.label(lo),
                universe.label(hi)
            ))
        })?;
        let pair_raw = dataset.restrict(lo, hi)?;
        let scaler = Scaler::fit(&pair_raw);
        let pair_std = scaler.transform(&pair_raw)?;
        let pair_config = TrainConfig {
            seed: derive_seed(seed, &format!("pair-{lo}-{hi}")),
            ..config.clone()
        };
        let (subspace, model) = match plan {
            PairPlan::Ga { genome, classifier } => {
                let projected = pair_std.project(genome.indices())?;
                let model = match classifier {
                    crate::ga::FitnessClassifier::Lr => {
                        classifiers::train_logistic(&projected, &pair_config)?
                    }
                    crate::ga::FitnessClassifier::Svm => {
                        classifiers::train_svm(&projected, &pair_config)?
                    }
                };
                (
                    PairSubspace::Genome(genome.clone()),
                    BiClassifierModel::Linear(model),
                )
            }
            PairPlan::Nn { hidden_dim } => {
                let model = classifiers::train_nn(&pair_std, &pair_config, *hidden_dim)?;
                (PairSubspace::NnHidden, BiClassifierModel::Nn(model))
            }
        };
        // class order of the bi-classifier must match the canonical pair order
        debug_assert_eq!(model.class_order()[0], universe.label(lo));
        debug_assert_eq!(model.class_order()[1], universe.label(hi));
        models.push(PairModel {
            key,
            subspace,
            model,
            scaler,
        });
    }
    Ok(PairwiseEnsemble {
        universe,
        models,
        metadata: EnsembleMetadata {
            config_fingerprint: String::new(),
            seed,
        },
    })
}

/// Verdict of every pair model for one raw feature vector.
pub fn pairwise_verdicts(
    ensemble: &PairwiseEnsemble,
    features: &[f64],
) -> Result<BTreeMap<PairKey, usize>> {
    let mut out = BTreeMap::new();
    for pm in &ensemble.models {
        out.insert(pm.key, pm.verdict(features)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompetitionStep {
    pub champion: usize,
    pub challenger: usize,
    pub winner: usize,
}

/// Outcome of the vote: per-label win counts, the max-count set, the
/// competition trace, and the final label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub counts: Vec<usize>,
    pub e_max: Vec<usize>,
    pub trace: Vec<CompetitionStep>,
    pub final_label: usize,
}

/// Vote counting plus the sequential competition tie-break over the
/// max-count set, taken in ascending universe-index order.
pub fn vote_decision(
    universe: &LabelUniverse,
    verdicts: &BTreeMap<PairKey, usize>,
) -> Result<VoteTally> {
    let m = universe.len();
    let n_pairs = m * (m - 1) / 2;
    if verdicts.len() != n_pairs {
        return Err(Error::Data(format!(
            "verdict map has {} entries, expected {}",
            verdicts.len(),
            n_pairs
        )));
    }
    let mut flat = vec![usize::MAX; n_pairs];
    for (key, &verdict) in verdicts {
        if key.hi >= m {
            return Err(Error::Data(format!(
                "pair ({}, {}) out of range for {} labels",
                key.lo, key.hi, m
            )));
        }
        if verdict != key.lo && verdict != key.hi {
            return Err(Error::Data(format!(
                "verdict {} is not a member of pair ({}, {})",
                verdict, key.lo, key.hi
            )));
        }
        flat[key.index(m)] = verdict;
    }
    if flat.contains(&usize::MAX) {
        return Err(Error::Data("verdict map does not cover all pairs".into()));
    }
    Ok(vote_decision_flat(m, &flat))
}

/// Vote over verdicts stored in canonical pair order. Input is assumed
/// valid; the public entry point checks completeness and membership.
pub fn vote_decision_flat(m: usize, verdicts: &[usize]) -> VoteTally {
    let mut counts = vec![0usize; m];
    for &v in verdicts {
        counts[v] += 1;
    }
    let max = *counts.iter().max().expect("m >= 2");
    let e_max: Vec<usize> = (0..m).filter(|&l| counts[l] == max).collect();

    let mut champion = e_max[0];
    let mut trace = Vec::new();
    for &challenger in &e_max[1..] {
        let key = PairKey::new(champion, challenger).expect("distinct members of E_max");
        let winner = verdicts[key.index(m)];
        trace.push(CompetitionStep {
            champion,
            challenger,
            winner,
        });
        champion = winner;
    }
    VoteTally {
        counts,
        e_max,
        trace,
        final_label: champion,
    }
}

/// End-to-end prediction: pairwise verdicts then the vote decision.
pub fn classify(ensemble: &PairwiseEnsemble, features: &[f64]) -> Result<VoteTally> {
    let verdicts = pairwise_verdicts(ensemble, features)?;
    vote_decision(&ensemble.universe, &verdicts)
}

// ---------------------------------------------------------------------------
// Correctness verifier
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremReport {
    pub m: usize,
    pub mode: VerifyMode,
    pub cases_checked: u64,
    pub failures: u64,
}

/// Check that whenever a target label wins all of its M-1 pairs, the vote
/// returns the target — for every (exhaustive) or a sampled set of
/// assignments of the pairs not involving the target.
pub fn verify_theorem(
    m: usize,
    mode: VerifyMode,
    trials: u64,
    seed: u64,
) -> Result<TheoremReport> {
    if m < 2 {
        return Err(Error::Config("need at least 2 labels".into()));
    }
    let pairs = all_pairs(m);
    let n_pairs = pairs.len();
    let mut cases_checked = 0u64;
    let mut failures = 0u64;

    let mut check = |target: usize, free_choices: &dyn Fn(usize) -> bool| {
        let mut verdicts = vec![0usize; n_pairs];
        let mut free_slot = 0usize;
        for (idx, pair) in pairs.iter().enumerate() {
            if pair.lo == target || pair.hi == target {
                verdicts[idx] = target;
            } else {
                verdicts[idx] = if free_choices(free_slot) {
                    pair.lo
                } else {
                    pair.hi
                };
                free_slot += 1;
            }
        }
        let tally = vote_decision_flat(m, &verdicts);
        cases_checked += 1;
        if tally.final_label != target {
            failures += 1;
        }
    };

    match mode {
        VerifyMode::Exhaustive => {
            let free = (m - 1) * (m - 2) / 2;
            if free > 24 {
                return Err(Error::Config(format!(
                    "exhaustive mode infeasible for M = {m}"
                )));
            }
            for target in 0..m {
                for mask in 0u64..(1u64 << free) {
                    check(target, &|slot| mask >> slot & 1 == 1);
                }
            }
        }
        VerifyMode::Sampled => {
            let free = (m - 1) * (m - 2) / 2;
            if free > 64 {
                return Err(Error::Config(format!(
                    "sampled mode supports at most 64 free pairs, M = {m} has {free}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in 0..trials {
                let target = (t % m as u64) as usize;
                let bits: u64 = rng.gen();
                check(target, &|slot| bits >> slot & 1 == 1);
            }
        }
    }

    Ok(TheoremReport {
        m,
        mode,
        cases_checked,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Persistence: one JSON file per pair model plus a manifest
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EnsembleManifest {
    schema_version: u32,
    universe: Vec<String>,
    pairs: Vec<ManifestEntry>,
    metadata: EnsembleMetadata,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    key: PairKey,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct PairModelFile {
    schema_version: u32,
    model: PairModel,
}

pub fn save_ensemble(ensemble: &PairwiseEnsemble, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for pm in &ensemble.models {
        let file = format!("pair_{:02}_{:02}.json", pm.key.lo, pm.key.hi);
        let doc = PairModelFile {
            schema_version: ENSEMBLE_SCHEMA_VERSION,
            model: pm.clone(),
        };
        fs::write(dir.join(&file), serde_json::to_string_pretty(&doc)?)?;
        entries.push(ManifestEntry { key: pm.key, file });
    }
    let manifest = EnsembleManifest {
        schema_version: ENSEMBLE_SCHEMA_VERSION,
        universe: ensemble.universe.labels().to_vec(),
        pairs: entries,
        metadata: ensemble.metadata.clone(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn load_ensemble(dir: &Path) -> Result<PairwiseEnsemble> {
    let manifest: EnsembleManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.schema_version != ENSEMBLE_SCHEMA_VERSION {
        return Err(Error::Data(format!(
            "unsupported ensemble schema version {}",
            manifest.schema_version
        )));
    }
    let universe = LabelUniverse::new(manifest.universe)?;
    let expected = universe.pairs().len();
    if manifest.pairs.len() != expected {
        return Err(Error::Data(format!(
            "manifest lists {} pair models, expected {}",
            manifest.pairs.len(),
            expected
        )));
    }
    let mut models = Vec::new();
    for entry in &manifest.pairs {
        let doc: PairModelFile =
            serde_json::from_str(&fs::read_to_string(dir.join(&entry.file))?)?;
        if doc.model.key != entry.key {
            return Err(Error::Data(format!(
                "pair model file {} does not match its manifest key",
                entry.file
            )));
        }
        models.push(doc.model);
    }
    models.sort_by_key(|pm| pm.key);
    Ok(PairwiseEnsemble {
        universe,
        models,
        metadata: manifest.metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::FitnessClassifier;

    fn universe(m: usize) -> LabelUniverse {
        LabelUniverse::new((0..m).map(|i| format!("e{i}")).collect()).unwrap()
    }

    /// Three separable clusters, one per label, informative in dims 0..2.
    fn cluster_dataset(m: usize, per_class: usize) -> Dataset {
        let d = 4;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for c in 0..m {
            let angle = c as f64 * std::f64::consts::TAU / m as f64;
            for i in 0..per_class {
                let jitter = 0.05 * i as f64;
                features.extend([
                    4.0 * angle.cos() + jitter,
                    4.0 * angle.sin() - jitter,
                    0.3 * jitter,
                    -0.3 * jitter,
                ]);
                labels.push(c);
                ids.push(format!("c{c}i{i}"));
            }
        }
        let mut data = Dataset::new(ids, features, d).unwrap();
        data.universe = Some(universe(m));
        data.labels = Some(labels);
        data
    }

    fn ga_plans(m: usize) -> BTreeMap<PairKey, PairPlan> {
        all_pairs(m)
            .into_iter()
            .map(|key| {
                (
                    key,
                    PairPlan::Ga {
                        genome: Genome::new(vec![0, 1]).unwrap(),
                        classifier: FitnessClassifier::Lr,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn pair_index_is_canonical_enumeration() {
        for m in 2..=7 {
            for (i, pair) in all_pairs(m).iter().enumerate() {
                assert_eq!(pair.index(m), i);
            }
        }
    }

    #[test]
    fn ensemble_has_one_model_per_pair() {
        let data = cluster_dataset(4, 10);
        let ensemble =
            train_ensemble(&data, &ga_plans(4), &TrainConfig::default(), 1).unwrap();
        assert_eq!(ensemble.n_pairs(), 6);
        for pm in &ensemble.models {
            assert_eq!(
                pm.model.class_order(),
                &[
                    ensemble.universe.label(pm.key.lo).to_string(),
                    ensemble.universe.label(pm.key.hi).to_string()
                ]
            );
        }
    }

    #[test]
    fn minimal_universe_has_single_model() {
        let data = cluster_dataset(2, 10);
        let ensemble =
            train_ensemble(&data, &ga_plans(2), &TrainConfig::default(), 1).unwrap();
        assert_eq!(ensemble.n_pairs(), 1);
    }

    #[test]
    fn missing_plan_errors() {
        let data = cluster_dataset(3, 8);
        let mut plans = ga_plans(3);
        plans.remove(&PairKey { lo: 0, hi: 2 });
        assert!(train_ensemble(&data, &plans, &TrainConfig::default(), 1).is_err());
    }

    #[test]
    fn verdict_map_shape_and_codomain() {
        let data = cluster_dataset(4, 10);
        let ensemble =
            train_ensemble(&data, &ga_plans(4), &TrainConfig::default(), 1).unwrap();
        let verdicts = pairwise_verdicts(&ensemble, data.row(0)).unwrap();
        assert_eq!(verdicts.len(), 6);
        for (key, v) in &verdicts {
            assert!(key.members().contains(v));
        }
        let again = pairwise_verdicts(&ensemble, data.row(0)).unwrap();
        assert_eq!(verdicts, again);
    }

    #[test]
    fn classify_recovers_cluster_labels() {
        let data = cluster_dataset(4, 10);
        let ensemble =
            train_ensemble(&data, &ga_plans(4), &TrainConfig::default(), 1).unwrap();
        let labels = data.labels_required().unwrap();
        for r in 0..data.n_rows() {
            let tally = classify(&ensemble, data.row(r)).unwrap();
            assert_eq!(tally.final_label, labels[r]);
            assert_eq!(tally.counts.iter().sum::<usize>(), 6);
        }
    }

    #[test]
    fn single_pair_vote() {
        let u = universe(2);
        let mut verdicts = BTreeMap::new();
        verdicts.insert(PairKey { lo: 0, hi: 1 }, 0);
        let tally = vote_decision(&u, &verdicts).unwrap();
        assert_eq!(tally.final_label, 0);
        assert_eq!(tally.counts, vec![1, 0]);
        assert!(tally.trace.is_empty());
    }

    #[test]
    fn three_way_cycle_resolved_by_competition() {
        // verdict(A,B)=A, verdict(B,C)=B, verdict(A,C)=C: all counts 1,
        // champion A loses nothing to B, then falls to C
        let u = universe(3);
        let mut verdicts = BTreeMap::new();
        verdicts.insert(PairKey { lo: 0, hi: 1 }, 0);
        verdicts.insert(PairKey { lo: 1, hi: 2 }, 1);
        verdicts.insert(PairKey { lo: 0, hi: 2 }, 2);
        let tally = vote_decision(&u, &verdicts).unwrap();
        assert_eq!(tally.counts, vec![1, 1, 1]);
        assert_eq!(tally.e_max, vec![0, 1, 2]);
        assert_eq!(tally.final_label, 2);
        assert_eq!(
            tally.trace,
            vec![
                CompetitionStep {
                    champion: 0,
                    challenger: 1,
                    winner: 0
                },
                CompetitionStep {
                    champion: 0,
                    challenger: 2,
                    winner: 2
                },
            ]
        );
    }

    #[test]
    fn target_winning_all_its_pairs_wins_overall() {
        let m = 7;
        let target = 3;
        let pairs = all_pairs(m);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let mut verdicts = BTreeMap::new();
            for pair in &pairs {
                let v = if pair.lo == target || pair.hi == target {
                    target
                } else if rng.gen::<bool>() {
                    pair.lo
                } else {
                    pair.hi
                };
                verdicts.insert(*pair, v);
            }
            let tally = vote_decision(&universe(m), &verdicts).unwrap();
            assert_eq!(tally.final_label, target);
        }
    }

    #[test]
    fn incomplete_verdicts_rejected() {
        let u = universe(3);
        let mut verdicts = BTreeMap::new();
        verdicts.insert(PairKey { lo: 0, hi: 1 }, 0);
        assert!(vote_decision(&u, &verdicts).is_err());
    }

    #[test]
    fn verdict_outside_pair_rejected() {
        let u = universe(3);
        let mut verdicts = BTreeMap::new();
        verdicts.insert(PairKey { lo: 0, hi: 1 }, 2);
        verdicts.insert(PairKey { lo: 0, hi: 2 }, 0);
        verdicts.insert(PairKey { lo: 1, hi: 2 }, 1);
        assert!(vote_decision(&u, &verdicts).is_err());
    }

    #[test]
    fn theorem_holds_for_two_labels() {
        let report = verify_theorem(2, VerifyMode::Exhaustive, 0, 0).unwrap();
        assert_eq!(report.cases_checked, 2);
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn theorem_holds_exhaustively_for_small_m() {
        for m in 2..=5 {
            let report = verify_theorem(m, VerifyMode::Exhaustive, 0, 0).unwrap();
            let free = (m - 1) * (m - 2) / 2;
            assert_eq!(report.cases_checked, m as u64 * (1 << free));
            assert_eq!(report.failures, 0, "failures at M={m}");
        }
    }

    #[test]
    fn ensemble_round_trip() {
        let data = cluster_dataset(3, 8);
        let ensemble =
            train_ensemble(&data, &ga_plans(3), &TrainConfig::default(), 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ensemble(&ensemble, dir.path()).unwrap();
        let loaded = load_ensemble(dir.path()).unwrap();
        assert_eq!(ensemble.models, loaded.models);
        for r in 0..data.n_rows() {
            assert_eq!(
                classify(&ensemble, data.row(r)).unwrap(),
                classify(&loaded, data.row(r)).unwrap()
            );
        }
    }
}
