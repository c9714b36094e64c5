use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{accuracy, kappa, per_class_metrics, ClassMetrics, ConfusionMatrix, EvalError};
use crate::corpus::Characterization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    pub num_examples: u64,
    pub accuracy: f64,
    pub kappa: f64,
    pub per_class: BTreeMap<Characterization, ClassMetrics>,
    /// Classes whose precision or recall had a zero denominator.
    pub degenerate: Vec<Characterization>,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn from_confusion(
        algorithm: &str,
        k: usize,
        seed: u64,
        confusion: ConfusionMatrix,
    ) -> Result<Self, EvalError> {
        let per_class = per_class_metrics(&confusion);
        let degenerate = per_class
            .iter()
            .filter(|(_, m)| m.degenerate)
            .map(|(c, _)| *c)
            .collect();
        Ok(EvalReport {
            algorithm: algorithm.to_string(),
            k,
            seed,
            num_examples: confusion.total(),
            accuracy: accuracy(&confusion)?,
            kappa: kappa(&confusion)?,
            per_class,
            degenerate,
            confusion,
        })
    }

    pub fn f1(&self, class: Characterization) -> Option<f64> {
        self.per_class.get(&class).map(|m| m.f1)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "## {} ({}-fold cross-validation, seed {})\n",
            self.algorithm, self.k, self.seed
        );
        let _ = writeln!(s, "| Characteristic | Precision | Recall | F-Measure |");
        let _ = writeln!(s, "|---|---|---|---|");
        let mut rows: Vec<_> = self.per_class.iter().collect();
        rows.sort_by_key(|(c, _)| c.display_name());
        for (c, m) in rows {
            let flag = if m.degenerate { " *" } else { "" };
            let _ = writeln!(
                s,
                "| {}{} | {:.2} | {:.2} | {:.2} |",
                c.display_name(),
                flag,
                m.precision,
                m.recall,
                m.f1
            );
        }
        let _ = writeln!(s, "\nAccuracy: {:.4}  ", self.accuracy);
        let _ = writeln!(s, "Kappa: {:.4}  ", self.kappa);
        let _ = writeln!(s, "Examples: {}", self.num_examples);
        if !self.degenerate.is_empty() {
            let _ = writeln!(
                s,
                "\n\\* precision or recall undefined (zero denominator), reported as 0"
            );
        }
        let _ = writeln!(
            s,
            "\n### Confusion matrix (rows: true, columns: predicted)\n"
        );
        let names: Vec<&str> = self.confusion.class_list.iter().map(|c| c.name()).collect();
        let _ = writeln!(s, "| | {} |", names.join(" | "));
        let _ = writeln!(s, "|---|{}", "---|".repeat(names.len()));
        for (name, row) in names.iter().zip(&self.confusion.counts) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "| {} | {} |", name, cells.join(" | "));
        }
        s
    }
}
