//! Metrics and significance testing for the experiment harness.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::LabelUniverse;
use crate::error::{Error, Result};

/// Two-sided paired t-test. `t`, `p`, and `significant` are `None` when
/// the differences have zero variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub significant_at_005: Option<bool>,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Data("paired t-test needs at least 2 pairs".into()));
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // treat rounding-noise spread around a constant difference as zero variance
    let scale = diffs.iter().fold(1.0f64, |acc, d| acc.max(d.abs()));
    if var.sqrt() <= 1e-12 * scale {
        return Ok(TTest {
            n,
            mean_diff: mean,
            t: None,
            p: None,
            significant_at_005: None,
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::Data(format!("t-distribution: {e}")))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(TTest {
        n,
        mean_diff: mean,
        t: Some(t),
        p: Some(p),
        significant_at_005: Some(p < 0.05),
    })
}

/// Per-label recall. `recall` is `None` (undefined, not zero) when the
/// label never appears among the true labels; `excluded_from_report`
/// marks labels computed but not meant for headline figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallEntry {
    pub correct: usize,
    pub total: usize,
    pub recall: Option<f64>,
    pub excluded_from_report: bool,
}

pub fn per_emotion_recall(
    predictions: &[(usize, usize)],
    universe: &LabelUniverse,
    exclude_from_report: &[String],
) -> Result<BTreeMap<String, RecallEntry>> {
    if predictions.is_empty() {
        return Err(Error::Data("no predictions to score".into()));
    }
    let m = universe.len();
    let mut correct = vec![0usize; m];
    let mut total = vec![0usize; m];
    for &(truth, predicted) in predictions {
        if truth >= m {
            return Err(Error::Data(format!("true label {truth} out of range")));
        }
        total[truth] += 1;
        if predicted == truth {
            correct[truth] += 1;
        }
    }
    let mut out = BTreeMap::new();
    for l in 0..m {
        let name = universe.label(l).to_string();
        out.insert(
            name.clone(),
            RecallEntry {
                correct: correct[l],
                total: total[l],
                recall: (total[l] > 0).then(|| correct[l] as f64 / total[l] as f64),
                excluded_from_report: exclude_from_report.contains(&name),
            },
        );
    }
    Ok(out)
}

/// Confusion counts (true label, predicted label) -> count.
pub fn confusion_counts(
    predictions: &[(usize, usize)],
    m: usize,
) -> Vec<Vec<usize>> {
    let mut matrix = vec![vec![0usize; m]; m];
    for &(truth, predicted) in predictions {
        matrix[truth][predicted] += 1;
    }
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_flagged_undefined() {
        let a = [0.8, 0.7, 0.9];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!(r.t, None);
        assert_eq!(r.significant_at_005, None);
    }

    #[test]
    fn constant_difference_flagged_undefined() {
        let a = [0.8, 0.7, 0.9, 0.75, 0.85];
        let b = [0.6, 0.5, 0.7, 0.55, 0.65];
        let r = paired_t_test(&a, &b).unwrap();
        assert!((r.mean_diff - 0.2).abs() < 1e-12);
        assert_eq!(r.t, None, "zero-variance differences stay undefined");
    }

    #[test]
    fn t_statistic_matches_hand_calculation() {
        let a = [0.8, 0.7, 0.9];
        let b = [0.6, 0.65, 0.7];
        let r = paired_t_test(&a, &b).unwrap();
        // differences: 0.2, 0.05, 0.2 -> mean 0.15, sample sd sqrt(0.0075)
        let expected = 0.15 / (0.0075f64.sqrt() / 3f64.sqrt());
        assert!((r.t.unwrap() - expected).abs() < 1e-10);
        assert!(r.p.unwrap() > 0.0 && r.p.unwrap() < 1.0);
    }

    #[test]
    fn length_mismatch_errors() {
        assert!(paired_t_test(&[0.1, 0.2], &[0.1]).is_err());
    }

    #[test]
    fn all_correct_gives_unit_recall() {
        let u = LabelUniverse::new(vec!["a".into(), "b".into()]).unwrap();
        let preds = [(0, 0), (1, 1), (0, 0)];
        let recalls = per_emotion_recall(&preds, &u, &[]).unwrap();
        for entry in recalls.values() {
            assert_eq!(entry.recall, Some(1.0));
        }
    }

    #[test]
    fn absent_label_is_undefined_not_zero() {
        let u = LabelUniverse::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let preds = [(0, 0), (1, 0)];
        let recalls = per_emotion_recall(&preds, &u, &[]).unwrap();
        assert_eq!(recalls["c"].recall, None);
        assert_eq!(recalls["b"].recall, Some(0.0));
    }

    #[test]
    fn excluded_label_computed_but_flagged() {
        let u = LabelUniverse::new(vec!["a".into(), "disgust".into()]).unwrap();
        let preds = [(0, 0), (1, 1), (1, 0)];
        let recalls = per_emotion_recall(&preds, &u, &["disgust".to_string()]).unwrap();
        assert!(recalls["disgust"].excluded_from_report);
        assert_eq!(recalls["disgust"].recall, Some(0.5));
        assert!(!recalls["a"].excluded_from_report);
    }

    #[test]
    fn recalls_match_confusion_matrix() {
        let u = LabelUniverse::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let preds = [(0, 0), (0, 1), (1, 1), (2, 0), (2, 2), (2, 2)];
        let recalls = per_emotion_recall(&preds, &u, &[]).unwrap();
        let matrix = confusion_counts(&preds, 3);
        for l in 0..3 {
            let total: usize = matrix[l].iter().sum();
            let from_matrix = matrix[l][l] as f64 / total as f64;
            assert!((recalls[u.label(l)].recall.unwrap() - from_matrix).abs() < 1e-12);
        }
    }
}
