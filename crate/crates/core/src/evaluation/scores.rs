use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// F-measures with one row per class and one column per classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub classifier_names: Vec<String>,
    pub class_names: Vec<String>,
    /// `values[class][classifier]`.
    pub values: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(
        classifier_names: Vec<String>,
        class_names: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, EvalError> {
        let bad = |msg: String| Err(EvalError::ScoreMatrix(msg));
        if classifier_names.is_empty() || class_names.is_empty() {
            return bad("needs at least one class and one classifier".into());
        }
        if values.len() != class_names.len() {
            return bad(format!(
                "{} rows for {} classes",
                values.len(),
                class_names.len()
            ));
        }
        for (row, class) in values.iter().zip(&class_names) {
            if row.len() != classifier_names.len() {
                return bad(format!(
                    "row `{class}` has {} values, expected {}",
                    row.len(),
                    classifier_names.len()
                ));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return bad(format!("row `{class}` holds {v}, outside [0, 1]"));
            }
        }
        Ok(ScoreMatrix {
            classifier_names,
            class_names,
            values,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn num_classifiers(&self) -> usize {
        self.classifier_names.len()
    }

    pub fn classifier_index(&self, name: &str) -> Option<usize> {
        self.classifier_names.iter().position(|n| n == name)
    }

    /// Header `characteristic,<classifier>...`, then one row per class.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| EvalError::ScoreMatrix(e.to_string()))?
            .clone();
        let classifier_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut class_names = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| EvalError::ScoreMatrix(e.to_string()))?;
            let mut fields = record.iter();
            class_names.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        EvalError::ScoreMatrix(format!(
                            "data row {}: `{f}` is not a number",
                            line + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        ScoreMatrix::new(classifier_names, class_names, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| EvalError::Io(e.to_string()))?;
        ScoreMatrix::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| EvalError::Io(e.to_string());
        let mut header = vec!["characteristic".to_string()];
        header.extend(self.classifier_names.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (class, row) in self.class_names.iter().zip(&self.values) {
            let mut rec = vec![class.clone()];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| EvalError::Io(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbpResult {
    pub classifier_names: Vec<String>,
    pub wins: Vec<usize>,
    pub num_classes: usize,
    pub ratio: Vec<f64>,
}

/// Ratio of best performance: the share of classes on which each
/// classifier attains the row maximum. Ties credit every tied classifier;
/// values are compared exactly as stored.
pub fn rbp(scores: &ScoreMatrix) -> RbpResult {
    let mut wins = vec![0usize; scores.num_classifiers()];
    for row in &scores.values {
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (j, &v) in row.iter().enumerate() {
            if v == best {
                wins[j] += 1;
            }
        }
    }
    let n = scores.num_classes();
    let ratio = wins.iter().map(|&w| w as f64 / n as f64).collect();
    RbpResult {
        classifier_names: scores.classifier_names.clone(),
        wins,
        num_classes: n,
        ratio,
    }
}
