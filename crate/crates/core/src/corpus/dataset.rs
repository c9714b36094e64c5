use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::taxonomy::Characterization;

/// Class count below which stratified cross-validation cannot place an
/// example of the class on both the training and the test side.
pub const DEFAULT_MIN_CLASS_COUNT: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown characterization label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: description is empty")]
    EmptyDescription { line: usize },
    #[error("line {line}: malformed CVE id `{id}`")]
    MalformedId { line: usize, id: String },
    #[error("corpus is empty")]
    Empty,
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Parse { line, .. }
            | CorpusError::UnknownLabel { line, .. }
            | CorpusError::EmptyDescription { line }
            | CorpusError::MalformedId { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// True when `id` has the shape `CVE-YYYY-NNNN` (four or more trailing digits).
pub fn is_valid_cve_id(id: &str) -> bool {
    let Some(rest) = id.strip_prefix("CVE-") else {
        return false;
    };
    let Some((year, seq)) = rest.split_once('-') else {
        return false;
    };
    year.len() == 4
        && year.bytes().all(|b| b.is_ascii_digit())
        && seq.len() >= 4
        && seq.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CveRecord {
    pub cve_id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledExample {
    pub cve_id: String,
    pub description: String,
    pub label: Characterization,
}

/// Raw line shape; the label stays a string so unknown labels can be
/// reported by name.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    cve_id: String,
    description: String,
    label: String,
}

impl LabeledExample {
    fn from_line(line_no: usize, line: &str) -> Result<Self, CorpusError> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if !is_valid_cve_id(&raw.cve_id) {
            return Err(CorpusError::MalformedId {
                line: line_no,
                id: raw.cve_id,
            });
        }
        if raw.description.trim().is_empty() {
            return Err(CorpusError::EmptyDescription { line: line_no });
        }
        let label =
            raw.label
                .parse::<Characterization>()
                .map_err(|_| CorpusError::UnknownLabel {
                    line: line_no,
                    label: raw.label.clone(),
                })?;
        Ok(LabeledExample {
            cve_id: raw.cve_id,
            description: raw.description,
            label,
        })
    }
}

/// An ordered, immutable set of labeled descriptions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    examples: Vec<LabeledExample>,
    class_counts: BTreeMap<Characterization, usize>,
}

impl Corpus {
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        let mut class_counts = BTreeMap::new();
        for ex in &examples {
            *class_counts.entry(ex.label).or_insert(0) += 1;
        }
        Corpus {
            examples,
            class_counts,
        }
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn class_counts(&self) -> &BTreeMap<Characterization, usize> {
        &self.class_counts
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<Characterization> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn descriptions(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.description.as_str())
    }

    /// Serializes as JSON Lines, one example per line, in corpus order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for ex in &self.examples {
            serde_json::to_writer(&mut out, ex)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        fs::write(path, buf)
    }
}

/// Loads a JSON Lines dataset, failing on the first bad line.
///
/// Blank lines are skipped; every other line must be an object with exactly
/// the keys `cve_id`, `description` and `label`.
pub fn load_labeled(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let file = fs::File::open(path)?;
    read_labeled(BufReader::new(file))
}

pub fn read_labeled<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut examples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        examples.push(LabeledExample::from_line(i + 1, &line)?);
    }
    Ok(Corpus::new(examples))
}

/// Like [`load_labeled`] but collects bad lines instead of stopping at the
/// first one. Only I/O failures are returned as `Err`.
pub fn load_labeled_lenient(path: impl AsRef<Path>) -> io::Result<(Corpus, Vec<CorpusError>)> {
    let file = fs::File::open(path)?;
    let mut examples = Vec::new();
    let mut issues = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match LabeledExample::from_line(i + 1, &line) {
            Ok(ex) => examples.push(ex),
            Err(e) => issues.push(e),
        }
    }
    Ok((Corpus::new(examples), issues))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateFinding {
    pub cve_id: String,
    pub label: Characterization,
    /// Zero-based positions of every occurrence in the corpus.
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassBelowMinimum {
    pub label: Characterization,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub total: usize,
    pub min_class_count: usize,
    pub class_counts: BTreeMap<Characterization, usize>,
    pub duplicates: Vec<DuplicateFinding>,
    /// Warnings: classes present with fewer than `min_class_count` examples.
    pub below_minimum: Vec<ClassBelowMinimum>,
    /// Lines that failed to parse (only populated by file validation).
    pub line_errors: Vec<String>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        !self.duplicates.is_empty() || !self.line_errors.is_empty()
    }

    pub fn has_warnings(&self) -> bool {
        !self.below_minimum.is_empty()
    }

    /// Ready for stratified cross-validation: no errors and no class below
    /// the minimum.
    pub fn is_cv_ready(&self) -> bool {
        !self.has_errors() && !self.has_warnings() && self.total > 0
    }
}

pub fn validate(corpus: &Corpus, min_class_count: usize) -> ValidationReport {
    let mut seen: HashMap<(&str, Characterization), Vec<usize>> = HashMap::new();
    for (pos, ex) in corpus.examples().iter().enumerate() {
        seen.entry((ex.cve_id.as_str(), ex.label))
            .or_default()
            .push(pos);
    }
    let mut duplicates: Vec<DuplicateFinding> = seen
        .into_iter()
        .filter(|(_, positions)| positions.len() > 1)
        .map(|((id, label), positions)| DuplicateFinding {
            cve_id: id.to_string(),
            label,
            positions,
        })
        .collect();
    duplicates.sort_by_key(|d| d.positions[0]);

    let below_minimum = corpus
        .class_counts()
        .iter()
        .filter(|(_, &count)| count < min_class_count)
        .map(|(&label, &count)| ClassBelowMinimum { label, count })
        .collect();

    ValidationReport {
        total: corpus.len(),
        min_class_count,
        class_counts: corpus.class_counts().clone(),
        duplicates,
        below_minimum,
        line_errors: Vec::new(),
    }
}

/// Validates a dataset file, turning bad lines into findings.
pub fn validate_file(
    path: impl AsRef<Path>,
    min_class_count: usize,
) -> io::Result<ValidationReport> {
    let (corpus, issues) = load_labeled_lenient(path)?;
    let mut report = validate(&corpus, min_class_count);
    report.line_errors = issues.iter().map(|e| e.to_string()).collect();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub classes: usize,
    pub min: usize,
    pub max: usize,
    pub median: f64,
    pub total: usize,
}

pub fn summarize(corpus: &Corpus) -> Result<DistributionSummary, CorpusError> {
    let mut counts: Vec<usize> = corpus.class_counts().values().copied().collect();
    if counts.is_empty() {
        return Err(CorpusError::Empty);
    }
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    Ok(DistributionSummary {
        classes: n,
        min: counts[0],
        max: counts[n - 1],
        median,
        total: counts.iter().sum(),
    })
}
