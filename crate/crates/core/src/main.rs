use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pairvote::classifiers::TrainConfig;
use pairvote::dataset::{self, Dataset};
use pairvote::error::{Error, Result};
use pairvote::experiment::{
    self, compare, comparison_report, emit_report, render_table, ExperimentConfig, Method,
    ReportFormat, SubspacePath,
};
use pairvote::ga::{run_ga, FitnessClassifier, GaConfig, GenomeFile};
use pairvote::seed::{derive_seed, fingerprint};
use pairvote::synth::{make_synthetic, SynthSpec};
use pairvote::vote::{
    save_ensemble, train_ensemble, verify_theorem, PairKey, PairPlan, VerifyMode,
};

#[derive(Parser)]
#[command(
    name = "pairvote",
    about = "Pairwise emotion classification with per-pair feature subspaces and vote fusion",
    version
)]
struct Cli {
    /// Master seed; all component seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Bound on concurrent fold/pair/fitness work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config JSON; defaults come from PAIRVOTE_CONFIG or
    /// built-in settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self, seed: Option<u64>) -> Result<ExperimentConfig> {
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var("PAIRVOTE_CONFIG").ok().map(PathBuf::from));
        let mut config = match path {
            Some(p) => ExperimentConfig::load(&p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = seed {
            config.master_seed = seed;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a feature file (ARFF or CSV), bind metadata, write a dataset file.
    Ingest {
        /// Feature file; .arff or .csv by extension.
        #[arg(long)]
        features: PathBuf,
        /// Manifest CSV with columns utterance_id,speaker_id,label.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Derive speaker/label metadata from EmoDB-style utterance ids.
        #[arg(long)]
        emodb_names: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic benchmark dataset with pair-specific
    /// informative dimensions.
    Synth {
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 60)]
        noise_dims: usize,
        #[arg(long, default_value_t = 3)]
        informative_per_pair: usize,
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        #[arg(long, default_value_t = 10)]
        speakers: usize,
        #[arg(long)]
        out: PathBuf,
        /// Optional manifest CSV mirroring the dataset's metadata.
        #[arg(long)]
        manifest_out: Option<PathBuf>,
    },
    /// GA feature-subset selection: one genome per pair plus the global genome.
    Select {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the pairwise ensemble from selected genomes (or NN transforms).
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Genome directory produced by `select` (GA path).
        #[arg(long)]
        genomes: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run cross-validation for one method and write the report.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// bi | multi
        #[arg(long)]
        method: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run both methods, the paired t-test, and the overlap analysis;
    /// write table/CSV/JSON reports.
    Compare {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated classifier columns for the GA path: lr,svm.
        #[arg(long)]
        classifiers: Option<String>,
        /// Reports are written as <out_prefix>.txt/.csv/.json.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Verify the vote-decision correctness guarantee.
    VerifyTheorem {
        #[arg(long)]
        m: usize,
        /// exhaustive | sampled
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Common-feature counts between each pair genome and the global genome.
    OverlapReport {
        /// Genome directory produced by `select`.
        #[arg(long)]
        genomes: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_features(path: &Path) -> Result<Dataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("arff") => dataset::parse_arff(path),
        Some("csv") => dataset::parse_csv(path),
        _ => Err(Error::Config(format!(
            "cannot infer feature format of {path:?}; expected .arff or .csv"
        ))),
    }
}

fn write_manifest_csv(data: &Dataset, path: &Path) -> Result<()> {
    let speakers = data.speakers_required()?;
    let labels = data.labels_required()?;
    let universe = data.universe_required()?;
    let mut out = String::from("utterance_id,speaker_id,label\n");
    for (i, id) in data.utterance_ids.iter().enumerate() {
        out.push_str(&format!("{id},{},{}\n", speakers[i], universe.label(labels[i])));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn emodb_manifest(data: &Dataset) -> Result<Dataset> {
    let mut speakers = Vec::new();
    let mut labels = Vec::new();
    for id in &data.utterance_ids {
        let (speaker, label) = dataset::emodb::parse_filename(id)?;
        speakers.push(speaker);
        labels.push(label);
    }
    let mut order: Vec<String> = Vec::new();
    for l in &labels {
        if !order.contains(l) {
            order.push(l.clone());
        }
    }
    let universe = dataset::LabelUniverse::new(order)?;
    let mut out = data.clone();
    out.labels = Some(
        labels
            .iter()
            .map(|l| universe.index_of(l).unwrap())
            .collect(),
    );
    out.universe = Some(universe);
    out.speakers = Some(speakers);
    Ok(out)
}

fn run_select(data: &Dataset, config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let universe = data.universe_required()?.clone();
    let fp = fingerprint(config);
    for (lo, hi) in universe.pairs() {
        let pair_raw = data.restrict(lo, hi)?;
        let (pair_std, _, _) = dataset::standardize(&pair_raw, &[])?;
        let seed = derive_seed(config.master_seed, &format!("select-pair{lo}-{hi}"));
        let ga_config = GaConfig {
            seed,
            fitness_classifier: config.classifier,
            ..config.ga.clone()
        };
        let outcome = run_ga(&pair_std, &ga_config)?;
        eprintln!(
            "pair {}-{}: best fitness {:.4} after {} generations",
            universe.label(lo),
            universe.label(hi),
            outcome.best_fitness,
            outcome.generations
        );
        let file = GenomeFile::new(
            &outcome.best,
            data.n_features(),
            format!("{}-{}", universe.label(lo), universe.label(hi)),
            fp.clone(),
            seed,
        );
        file.save(&out_dir.join(format!("pair_{lo:02}_{hi:02}.json")))?;
    }
    let (data_std, _, _) = dataset::standardize(data, &[])?;
    let seed = derive_seed(config.master_seed, "select-global");
    let ga_config = GaConfig {
        seed,
        fitness_classifier: config.classifier,
        ..config.ga.clone()
    };
    let outcome = run_ga(&data_std, &ga_config)?;
    eprintln!(
        "global: best fitness {:.4} after {} generations",
        outcome.best_fitness, outcome.generations
    );
    GenomeFile::new(
        &outcome.best,
        data.n_features(),
        "global".into(),
        fp,
        seed,
    )
    .save(&out_dir.join("global.json"))?;
    Ok(())
}

fn load_pair_genomes(dir: &Path) -> Result<Vec<(PairKey, GenomeFile)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = match path.file_name().and_then(|n| n.to_str()) {
            Some(n) => n,
            None => continue,
        };
        if let Some(stem) = name.strip_prefix("pair_").and_then(|n| n.strip_suffix(".json")) {
            let mut parts = stem.split('_');
            let lo: usize = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Data(format!("bad genome filename {name:?}")))?;
            let hi: usize = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Data(format!("bad genome filename {name:?}")))?;
            out.push((PairKey::new(lo, hi)?, GenomeFile::load(&path)?));
        }
    }
    out.sort_by_key(|(key, _)| *key);
    Ok(out)
}

fn run_train(
    data: &Dataset,
    genomes: Option<&Path>,
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<()> {
    let universe = data.universe_required()?.clone();
    let plans: BTreeMap<PairKey, PairPlan> = match config.path {
        SubspacePath::GaSelection => {
            let dir = genomes.ok_or_else(|| {
                Error::Config("GA path needs --genomes from `select`".into())
            })?;
            load_pair_genomes(dir)?
                .into_iter()
                .map(|(key, file)| {
                    Ok((
                        key,
                        PairPlan::Ga {
                            genome: file.genome()?,
                            classifier: config.classifier,
                        },
                    ))
                })
                .collect::<Result<_>>()?
        }
        SubspacePath::NnTransform => universe
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
            .collect(),
    };
    let train_config = TrainConfig {
        seed: derive_seed(config.master_seed, "train-ensemble"),
        ..config.train.clone()
    };
    let mut ensemble = train_ensemble(data, &plans, &train_config, train_config.seed)?;
    ensemble.metadata.config_fingerprint = fingerprint(config);
    save_ensemble(&ensemble, out_dir)?;
    eprintln!(
        "trained {} pair models into {}",
        ensemble.n_pairs(),
        out_dir.display()
    );
    Ok(())
}

fn parse_classifiers(spec: &str) -> Result<Vec<FitnessClassifier>> {
    spec.split(',')
        .map(|s| match s.trim() {
            "lr" => Ok(FitnessClassifier::Lr),
            "svm" => Ok(FitnessClassifier::Svm),
            other => Err(Error::Config(format!("unknown classifier {other:?}"))),
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Ingest {
            features,
            manifest,
            emodb_names,
            out,
        } => {
            let data = load_features(&features)?;
            let data = match (&manifest, emodb_names) {
                (Some(path), _) => dataset::parse_manifest(path, &data, None)?,
                (None, true) => emodb_manifest(&data)?,
                (None, false) => data,
            };
            data.save(&out)?;
            eprintln!(
                "ingested {} rows x {} features -> {}",
                data.n_rows(),
                data.n_features(),
                out.display()
            );
        }
        Command::Synth {
            classes,
            per_class,
            noise_dims,
            informative_per_pair,
            separation,
            speakers,
            out,
            manifest_out,
        } => {
            let spec = SynthSpec {
                n_classes: classes,
                per_class,
                noise_dims,
                informative_per_pair,
                separation,
                n_speakers: speakers,
                seed: derive_seed(cli.seed.unwrap_or(0), "synth"),
            };
            let data = make_synthetic(&spec)?;
            data.save(&out)?;
            if let Some(path) = manifest_out {
                write_manifest_csv(&data, &path)?;
            }
            eprintln!(
                "generated {} rows x {} features -> {}",
                data.n_rows(),
                data.n_features(),
                out.display()
            );
        }
        Command::Select {
            dataset: dataset_path,
            config,
            out_dir,
        } => {
            let config = config.load(cli.seed)?;
            let data = Dataset::load(&dataset_path)?;
            run_select(&data, &config, &out_dir)?;
        }
        Command::Train {
            dataset: dataset_path,
            genomes,
            config,
            out_dir,
        } => {
            let config = config.load(cli.seed)?;
            let data = Dataset::load(&dataset_path)?;
            run_train(&data, genomes.as_deref(), &config, &out_dir)?;
        }
        Command::Evaluate {
            dataset: dataset_path,
            config,
            method,
            out,
        } => {
            let config = config.load(cli.seed)?;
            let data = Dataset::load(&dataset_path)?;
            let method = match method.as_str() {
                "bi" => Method::BiVoting,
                "multi" => Method::Multiclass,
                other => {
                    return Err(Error::Config(format!(
                        "unknown method {other:?}; use bi or multi"
                    )))
                }
            };
            let report = experiment::run_cv(&data, &config, method)?;
            std::fs::write(&out, format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            eprintln!(
                "{} mean accuracy {:.4} -> {}",
                report.method_label,
                report.mean_accuracy,
                out.display()
            );
        }
        Command::Compare {
            dataset: dataset_path,
            config,
            classifiers,
            out_prefix,
        } => {
            let base = config.load(cli.seed)?;
            let data = Dataset::load(&dataset_path)?;
            let columns = match (base.path, classifiers) {
                (SubspacePath::GaSelection, Some(spec)) => parse_classifiers(&spec)?
                    .into_iter()
                    .map(|classifier| {
                        compare(&data, &ExperimentConfig { classifier, ..base.clone() })
                    })
                    .collect::<Result<Vec<_>>>()?,
                _ => vec![compare(&data, &base)?],
            };
            let report = comparison_report(base.master_seed, fingerprint(&base), columns);
            let prefix = out_prefix.display();
            emit_report(&report, ReportFormat::Table, &PathBuf::from(format!("{prefix}.txt")))?;
            emit_report(&report, ReportFormat::Csv, &PathBuf::from(format!("{prefix}.csv")))?;
            emit_report(&report, ReportFormat::Json, &PathBuf::from(format!("{prefix}.json")))?;
            print!("{}", render_table(&report));
        }
        Command::VerifyTheorem { m, mode, trials } => {
            let mode = match mode.as_str() {
                "exhaustive" => VerifyMode::Exhaustive,
                "sampled" => VerifyMode::Sampled,
                other => {
                    return Err(Error::Config(format!(
                        "unknown mode {other:?}; use exhaustive or sampled"
                    )))
                }
            };
            let report = verify_theorem(m, mode, trials, cli.seed.unwrap_or(0))?;
            println!("{} cases, {} failures", report.cases_checked, report.failures);
            if report.failures > 0 {
                return Err(Error::Data(format!(
                    "vote decision failed {} of {} cases",
                    report.failures, report.cases_checked
                )));
            }
        }
        Command::OverlapReport { genomes, out } => {
            let global = GenomeFile::load(&genomes.join("global.json"))?.genome()?;
            let pairs = load_pair_genomes(&genomes)?;
            if pairs.is_empty() {
                return Err(Error::Data(format!(
                    "no pair genome files in {}",
                    genomes.display()
                )));
            }
            let mut content = String::from("pair,common_features\n");
            for (_, file) in &pairs {
                let count = pairvote::ga::subset_overlap(&file.genome()?, &global);
                content.push_str(&format!("{},{count}\n", file.provenance));
            }
            std::fs::write(&out, content)?;
            eprintln!("wrote {} overlap counts -> {}", pairs.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
