//! Exit-code and plumbing checks for the command-line interface.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairvote"))
}

#[test]
fn no_subcommand_prints_usage_and_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "stderr was: {stderr}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["verify-theorem", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_theorem_reports_case_count() {
    let out = bin()
        .args(["verify-theorem", "--m", "7", "--mode", "exhaustive"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim(), "229376 cases, 0 failures");
}

#[test]
fn verify_theorem_sampled_mode_runs() {
    let out = bin()
        .args([
            "--seed", "3", "verify-theorem", "--m", "9", "--mode", "sampled", "--trials", "5000",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.trim(), "5000 cases, 0 failures");
}

#[test]
fn synth_then_evaluate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.json");
    let manifest = dir.path().join("manifest.csv");
    let status = bin()
        .args([
            "--seed", "11", "synth", "--classes", "3", "--per-class", "20", "--noise-dims", "4",
            "--informative-per-pair", "2", "--speakers", "5",
        ])
        .arg("--out")
        .arg(&dataset)
        .arg("--manifest-out")
        .arg(&manifest)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dataset.is_file());
    let manifest_text = std::fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_text.lines().count(), 61); // header + 60 rows
    assert!(manifest_text.starts_with("utterance_id,speaker_id,label\n"));

    let config = serde_json::json!({
        "n_folds": 2,
        "master_seed": 11,
        "ga": {
            "genome_size": 2,
            "population_size": 6,
            "max_generations": 4,
            "stall_window": 2,
            "inner_repetitions": 2,
            "crossover_prob": 0.8,
            "mutation_prob": 0.1,
            "mutation_granularity": "PerOffspring",
            "seed": 0,
            "fitness_classifier": "Lr",
            "inner_split_fraction": 0.8,
            "avg_fitness_threshold": null,
            "train": {"learning_rate": 0.5, "max_epochs": 60, "tolerance": 1e-6, "l2": 1e-4, "seed": 0}
        }
    });
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, config.to_string()).unwrap();

    let report = dir.path().join("report.json");
    let status = bin()
        .args(["evaluate", "--method", "bi", "--dataset"])
        .arg(&dataset)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&report)
        .status()
        .unwrap();
    assert!(status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["per_fold_accuracy"].as_array().unwrap().len(), 2);
}

#[test]
fn select_then_train_and_overlap_report() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("dataset.json");
    let status = bin()
        .args([
            "--seed", "13", "synth", "--classes", "3", "--per-class", "16", "--noise-dims", "3",
            "--informative-per-pair", "2", "--speakers", "4",
        ])
        .arg("--out")
        .arg(&dataset)
        .status()
        .unwrap();
    assert!(status.success());

    let config = serde_json::json!({
        "master_seed": 13,
        "ga": {
            "genome_size": 2,
            "population_size": 6,
            "max_generations": 3,
            "stall_window": 2,
            "inner_repetitions": 2,
            "crossover_prob": 0.8,
            "mutation_prob": 0.1,
            "mutation_granularity": "PerOffspring",
            "seed": 0,
            "fitness_classifier": "Lr",
            "inner_split_fraction": 0.8,
            "avg_fitness_threshold": null,
            "train": {"learning_rate": 0.5, "max_epochs": 60, "tolerance": 1e-6, "l2": 1e-4, "seed": 0}
        }
    });
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, config.to_string()).unwrap();

    let genomes = dir.path().join("genomes");
    let status = bin()
        .args(["select", "--dataset"])
        .arg(&dataset)
        .arg("--config")
        .arg(&config_path)
        .arg("--out-dir")
        .arg(&genomes)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(genomes.join("global.json").is_file());
    assert!(genomes.join("pair_00_01.json").is_file());
    assert!(genomes.join("pair_00_02.json").is_file());
    assert!(genomes.join("pair_01_02.json").is_file());

    let ensemble = dir.path().join("ensemble");
    let status = bin()
        .args(["train", "--dataset"])
        .arg(&dataset)
        .arg("--genomes")
        .arg(&genomes)
        .arg("--config")
        .arg(&config_path)
        .arg("--out-dir")
        .arg(&ensemble)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(ensemble.join("manifest.json").is_file());

    let overlap = dir.path().join("overlap.csv");
    let status = bin()
        .args(["overlap-report", "--genomes"])
        .arg(&genomes)
        .arg("--out")
        .arg(&overlap)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&overlap).unwrap();
    assert_eq!(text.lines().count(), 4); // header + 3 pairs
    assert!(text.starts_with("pair,common_features\n"));
}
