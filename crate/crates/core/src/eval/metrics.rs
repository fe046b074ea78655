use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(predictions: &[u8], targets: &[u8]) -> Result<Self> {
        if predictions.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                context: "predictions vs targets",
                expected: targets.len(),
                actual: predictions.len(),
            });
        }
        let mut c = Confusion::default();
        for (&p, &t) in predictions.iter().zip(targets) {
            match (p == 1, t == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Accuracy, precision and recall. A ratio with an empty denominator is
/// reported as 1.0 and flagged as degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                (1.0, true)
            } else {
                (num as f64 / den as f64, false)
            }
        };
        let (precision, precision_degenerate) = ratio(c.tp, c.tp + c.fp);
        let (recall, recall_degenerate) = ratio(c.tp, c.tp + c.fn_);
        Metrics {
            accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
            precision,
            recall,
            precision_degenerate,
            recall_degenerate,
        }
    }
}

pub fn metrics(predictions: &[u8], targets: &[u8]) -> Result<(Metrics, Confusion)> {
    let c = Confusion::tally(predictions, targets)?;
    if c.total() == 0 {
        return Err(Error::Config("metrics need at least one prediction".into()));
    }
    Ok((Metrics::from_confusion(&c), c))
}

/// Constant predictor of the majority class seen in training (ties to 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DummyClassifier {
    pub label: u8,
}

impl DummyClassifier {
    pub fn fit(train_targets: &[u8]) -> Result<Self> {
        if train_targets.is_empty() {
            return Err(Error::Config("dummy classifier needs training targets".into()));
        }
        let positives = train_targets.iter().filter(|&&t| t == 1).count();
        let negatives = train_targets.len() - positives;
        Ok(DummyClassifier {
            label: u8::from(positives > negatives),
        })
    }

    pub fn predict(&self, n: usize) -> Vec<u8> {
        vec![self.label; n]
    }
}

pub fn dummy_classifier(train_targets: &[u8]) -> Result<DummyClassifier> {
    DummyClassifier::fit(train_targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn perfect_predictor() {
        let y = [1, 0, 0, 1, 1];
        let (m, _) = metrics(&y, &y).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall), (1.0, 1.0, 1.0));
        assert!(!m.precision_degenerate && !m.recall_degenerate);
    }

    #[test]
    fn all_negative_predictions() {
        let (m, c) = metrics(&[0, 0, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.precision, 1.0);
        assert!(m.precision_degenerate);
        assert_eq!(c, Confusion { tp: 0, fp: 0, tn: 2, fn_: 2 });
    }

    #[test]
    fn length_mismatch() {
        assert!(metrics(&[0, 1], &[0]).is_err());
        assert!(metrics(&[], &[]).is_err());
    }

    #[test]
    fn random_case_matches_hand_tally() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let p: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
        let t: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
        let (mut tp, mut fp, mut tn, mut fn_) = (0u32, 0u32, 0u32, 0u32);
        for i in 0..200 {
            if p[i] == 1 && t[i] == 1 {
                tp += 1;
            }
            if p[i] == 1 && t[i] == 0 {
                fp += 1;
            }
            if p[i] == 0 && t[i] == 0 {
                tn += 1;
            }
            if p[i] == 0 && t[i] == 1 {
                fn_ += 1;
            }
        }
        let (m, c) = metrics(&p, &t).unwrap();
        assert_eq!(c, Confusion { tp: tp as usize, fp: fp as usize, tn: tn as usize, fn_: fn_ as usize });
        assert_eq!(m.accuracy, f64::from(tp + tn) / 200.0);
        assert_eq!(m.precision, f64::from(tp) / f64::from(tp + fp));
        assert_eq!(m.recall, f64::from(tp) / f64::from(tp + fn_));
    }

    #[test]
    fn dummy_majority() {
        let train: Vec<u8> = (0..10).map(|i| u8::from(i < 3)).collect();
        let d = dummy_classifier(&train).unwrap();
        assert_eq!(d.label, 0);
        let test = [0, 0, 1, 0, 1];
        let (m, _) = metrics(&d.predict(test.len()), &test).unwrap();
        assert_eq!(m.accuracy, 3.0 / 5.0);
        assert_eq!(dummy_classifier(&[1, 0]).unwrap().label, 0);
        assert_eq!(dummy_classifier(&[1, 1, 0]).unwrap().label, 1);
        assert!(dummy_classifier(&[]).is_err());
    }
}
