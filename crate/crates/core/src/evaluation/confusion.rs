use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Characterization;

/// Counts indexed `(true, predicted)` over a fixed class list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_list: Vec<Characterization>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Precision or recall had a zero denominator and was set to 0.
    pub degenerate: bool,
}

impl ConfusionMatrix {
    /// Empty matrix over the distinct classes of `classes`, in index order.
    pub fn new(classes: &[Characterization]) -> Self {
        let mut class_list = classes.to_vec();
        class_list.sort_unstable();
        class_list.dedup();
        let k = class_list.len();
        ConfusionMatrix {
            class_list,
            counts: vec![vec![0; k]; k],
        }
    }

    /// Matrix over every label appearing in either sequence.
    pub fn from_pairs(
        truth: &[Characterization],
        predicted: &[Characterization],
    ) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        let all: Vec<Characterization> = truth.iter().chain(predicted).copied().collect();
        let mut m = ConfusionMatrix::new(&all);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.record(t, p)?;
        }
        Ok(m)
    }

    fn position(&self, c: Characterization) -> Result<usize, EvalError> {
        self.class_list
            .binary_search(&c)
            .map_err(|_| EvalError::UnknownClass(c))
    }

    pub fn record(
        &mut self,
        truth: Characterization,
        predicted: Characterization,
    ) -> Result<(), EvalError> {
        let (t, p) = (self.position(truth)?, self.position(predicted)?);
        self.counts[t][p] += 1;
        Ok(())
    }

    pub fn get(&self, truth: Characterization, predicted: Characterization) -> u64 {
        match (
            self.class_list.binary_search(&truth),
            self.class_list.binary_search(&predicted),
        ) {
            (Ok(t), Ok(p)) => self.counts[t][p],
            _ => 0,
        }
    }

    /// Adds `other` cell by cell; both must share a class list.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), EvalError> {
        if self.class_list != other.class_list {
            return Err(EvalError::ClassListMismatch);
        }
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.class_list.len()).map(|i| self.counts[i][i]).sum()
    }

    fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }
}

/// One-vs-rest counts for `class`; all zero except TN when it is absent.
pub fn class_counts(m: &ConfusionMatrix, class: Characterization) -> ClassCounts {
    let total = m.total();
    let Ok(i) = m.class_list.binary_search(&class) else {
        return ClassCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: total,
        };
    };
    let tp = m.counts[i][i];
    let fp = m.col_sum(i) - tp;
    let fn_ = m.row_sum(i) - tp;
    ClassCounts {
        tp,
        fp,
        fn_,
        tn: total - tp - fp - fn_,
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn metrics_from_counts(c: ClassCounts) -> ClassMetrics {
    let (precision, dp) = ratio(c.tp, c.tp + c.fp);
    let (recall, dr) = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        degenerate: dp || dr,
    }
}

pub fn per_class_metrics(m: &ConfusionMatrix) -> BTreeMap<Characterization, ClassMetrics> {
    m.class_list
        .iter()
        .map(|&c| (c, metrics_from_counts(class_counts(m, c))))
        .collect()
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = m.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(m.trace() as f64 / total as f64)
}

/// Cohen's kappa with chance agreement from the row and column marginals.
/// Zero when chance agreement is 1.
pub fn kappa(m: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = m.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let n = total as f64;
    let p_o = m.trace() as f64 / n;
    let p_e: f64 = (0..m.class_list.len())
        .map(|i| m.row_sum(i) as f64 * m.col_sum(i) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e >= 1.0 {
        return Ok(0.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
