use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{ImageRecord, Source};
use crate::ensemble::Decision;
use crate::error::{Error, Result};
use crate::score::Gender;

/// `100 * correct / total`.
pub fn percent(correct: usize, total: usize) -> f64 {
    100.0 * correct as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEval {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl SourceEval {
    fn new(correct: usize, total: usize) -> Self {
        SourceEval {
            correct,
            total,
            accuracy: percent(correct, total),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub correct: usize,
    pub total: usize,
    /// Percentage in [0, 100].
    pub accuracy: f64,
    pub per_source: BTreeMap<Source, SourceEval>,
}

impl EvalReport {
    /// Accuracy formatted to one decimal place, e.g. `"90.8"`.
    pub fn accuracy_one_decimal(&self) -> String {
        format!("{:.1}", self.accuracy)
    }
}

/// Scores decisions against the labels of their records.
pub fn evaluate(predictions: &[(ImageRecord, Decision)]) -> Result<EvalReport> {
    let labels: Vec<(ImageRecord, Gender)> = predictions.iter().map(|(r, d)| (r.clone(), d.label)).collect();
    evaluate_labels(&labels)
}

pub fn evaluate_labels(predictions: &[(ImageRecord, Gender)]) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(Error::Validation(vec!["no predictions to evaluate".into()]));
    }
    let mut per_source: BTreeMap<Source, (usize, usize)> = BTreeMap::new();
    for (record, predicted) in predictions {
        let entry = per_source.entry(record.source).or_default();
        entry.1 += 1;
        if record.label == *predicted {
            entry.0 += 1;
        }
    }
    let correct = per_source.values().map(|c| c.0).sum();
    let total = predictions.len();
    Ok(EvalReport {
        correct,
        total,
        accuracy: percent(correct, total),
        per_source: per_source
            .into_iter()
            .map(|(s, (c, t))| (s, SourceEval::new(c, t)))
            .collect(),
    })
}

/// One line of a predictions file: an image path and the predicted label.
/// The full decision may ride along but only `label` is scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub path: PathBuf,
    pub label: Gender,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
}

impl PredictionRecord {
    /// Pairs predictions with manifest records by path. A prediction for a
    /// path absent from the manifest is an error; manifest records without a
    /// prediction are left out and counted in the second return value.
    pub fn join(
        manifest: &[ImageRecord],
        predictions: &[PredictionRecord],
    ) -> Result<(Vec<(ImageRecord, Gender)>, usize)> {
        let by_path: HashMap<&PathBuf, &ImageRecord> = manifest.iter().map(|r| (&r.path, r)).collect();
        let mut unknown = Vec::new();
        let mut pairs = Vec::with_capacity(predictions.len());
        for p in predictions {
            match by_path.get(&p.path) {
                Some(r) => pairs.push(((*r).clone(), p.label)),
                None => unknown.push(format!("prediction for {} has no manifest record", p.path.display())),
            }
        }
        if !unknown.is_empty() {
            return Err(Error::Validation(unknown));
        }
        let unmatched = manifest.len().saturating_sub(pairs.len());
        Ok((pairs, unmatched))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preds(correct: usize, total: usize, source: Source) -> Vec<(ImageRecord, Gender)> {
        (0..total)
            .map(|i| {
                let r = ImageRecord::new(format!("{i}.jpg"), format!("s{i}"), Gender::Man, source);
                let p = if i < correct { Gender::Man } else { Gender::Woman };
                (r, p)
            })
            .collect()
    }

    #[test]
    fn reported_accuracies() {
        let adience = evaluate_labels(&preds(8447, 9303, Source::Adience)).unwrap();
        assert_eq!(adience.accuracy_one_decimal(), "90.8");
        let lfw = evaluate_labels(&preds(4414, 4632, Source::Lfw)).unwrap();
        assert_eq!(lfw.accuracy_one_decimal(), "95.3");
    }

    #[test]
    fn zero_correct() {
        let r = evaluate_labels(&preds(0, 12, Source::Other)).unwrap();
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.accuracy_one_decimal(), "0.0");
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(evaluate_labels(&[]), Err(Error::Validation(_))));
    }

    #[test]
    fn per_source_breakdown() {
        let mut all = preds(3, 4, Source::Adience);
        all.extend(preds(1, 2, Source::Lfw).into_iter().map(|(mut r, g)| {
            r.path = format!("lfw/{}", r.path.display()).into();
            (r, g)
        }));
        let r = evaluate_labels(&all).unwrap();
        assert_eq!((r.correct, r.total), (4, 6));
        assert_eq!(r.per_source[&Source::Adience].correct, 3);
        assert_eq!(r.per_source[&Source::Lfw].accuracy, 50.0);
    }

    #[test]
    fn join_rejects_unknown_paths() {
        let manifest = vec![ImageRecord::new("a.jpg", "s", Gender::Man, Source::Other)];
        let preds = vec![PredictionRecord { path: "b.jpg".into(), label: Gender::Man, decision: None }];
        assert!(PredictionRecord::join(&manifest, &preds).is_err());
    }
}
