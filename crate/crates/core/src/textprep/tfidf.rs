use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize};

use crate::corpus::Characterization;

/// Sparse row: `(column, value)` pairs sorted by column, no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseVec {
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec::default()
    }

    /// Builds from unordered pairs; zero values are dropped and duplicate
    /// columns summed.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(c, _)| c);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (c, v) in pairs {
            match entries.last_mut() {
                Some((last, acc)) if *last == c => *acc += v,
                _ => entries.push((c, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        SparseVec { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(c, &v)| (c, v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, column: usize) -> f64 {
        self.entries
            .binary_search_by_key(&column, |&(c, _)| c)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn max_column(&self) -> Option<usize> {
        self.entries.last().map(|&(c, _)| c)
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(c, v) in &self.entries {
            out[c] = v;
        }
        out
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(c, v)| v * dense[c]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vocabulary {
    /// Terms in column order.
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    num_documents: usize,
    #[serde(skip)]
    term_index: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    num_documents: usize,
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = VocabularyRepr::deserialize(deserializer)?;
        if repr.terms.len() != repr.doc_frequency.len() {
            return Err(serde::de::Error::custom(
                "terms and doc_frequency lengths differ",
            ));
        }
        let term_index: HashMap<String, usize> = repr
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if term_index.len() != repr.terms.len() {
            return Err(serde::de::Error::custom("duplicate vocabulary term"));
        }
        if repr
            .doc_frequency
            .iter()
            .any(|&df| df == 0 || df > repr.num_documents)
        {
            return Err(serde::de::Error::custom("document frequency out of range"));
        }
        Ok(Vocabulary {
            terms: repr.terms,
            doc_frequency: repr.doc_frequency,
            num_documents: repr.num_documents,
            term_index,
        })
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_documents(&self) -> usize {
        self.num_documents
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn doc_frequency(&self, term: &str) -> Option<usize> {
        self.column(term).map(|c| self.doc_frequency[c])
    }

    pub fn doc_frequency_at(&self, column: usize) -> usize {
        self.doc_frequency[column]
    }

    pub fn idf_at(&self, column: usize) -> f64 {
        (self.num_documents as f64 / self.doc_frequency[column] as f64).ln()
    }
}

/// Assigns columns in first-occurrence order and counts, per term, the
/// number of documents containing it.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>]) -> Vocabulary {
    let mut terms = Vec::new();
    let mut term_index: HashMap<String, usize> = HashMap::new();
    let mut doc_frequency: Vec<usize> = Vec::new();
    let mut last_seen_in: Vec<usize> = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        for token in doc {
            let token = token.as_ref();
            let col = match term_index.get(token) {
                Some(&c) => c,
                None => {
                    let c = terms.len();
                    terms.push(token.to_string());
                    term_index.insert(token.to_string(), c);
                    doc_frequency.push(0);
                    last_seen_in.push(usize::MAX);
                    c
                }
            };
            if last_seen_in[col] != d {
                last_seen_in[col] = d;
                doc_frequency[col] += 1;
            }
        }
    }
    Vocabulary {
        terms,
        doc_frequency,
        num_documents: docs.len(),
        term_index,
    }
}

/// `ln(1 + tf) * ln(n / df)`.
pub fn tfidf_weight(tf: usize, df: usize, num_documents: usize) -> f64 {
    (1.0 + tf as f64).ln() * (num_documents as f64 / df as f64).ln()
}

fn term_counts<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> Vec<(usize, usize)> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for token in doc {
        if let Some(c) = vocab.column(token.as_ref()) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let mut counts: Vec<(usize, usize)> = counts.into_iter().collect();
    counts.sort_unstable();
    counts
}

/// TF-IDF rows. Unknown tokens are dropped; terms present in every
/// vocabulary document weigh zero and are left out of the row.
pub fn tfidf_transform<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> FeatureMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let pairs = term_counts(doc, vocab)
                .into_iter()
                .map(|(c, tf)| {
                    (
                        c,
                        tfidf_weight(tf, vocab.doc_frequency[c], vocab.num_documents),
                    )
                })
                .collect();
            SparseVec::from_pairs(pairs)
        })
        .collect();
    FeatureMatrix {
        rows,
        num_columns: vocab.len(),
        row_labels: None,
    }
}

/// Raw term-count rows over the same columns as [`tfidf_transform`].
pub fn count_transform<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> FeatureMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let pairs = term_counts(doc, vocab)
                .into_iter()
                .map(|(c, tf)| (c, tf as f64))
                .collect();
            SparseVec::from_pairs(pairs)
        })
        .collect();
    FeatureMatrix {
        rows,
        num_columns: vocab.len(),
        row_labels: None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixDumpError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<SparseVec>,
    pub num_columns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<Characterization>>,
}

impl FeatureMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVec::nnz).sum()
    }

    pub fn with_labels(mut self, labels: Vec<Characterization>) -> Self {
        self.row_labels = Some(labels);
        self
    }

    /// Writes `rows cols nnz` then one `row col weight` line per stored
    /// entry, weights with 10 significant digits.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "{} {} {}",
            self.num_rows(),
            self.num_columns,
            self.nnz()
        )?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row.iter() {
                writeln!(out, "{r} {c} {v:.9e}")?;
            }
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(reader: R) -> Result<FeatureMatrix, MatrixDumpError> {
        let bad = |line: usize, message: &str| MatrixDumpError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| bad(1, "missing header"))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| bad(1, "header must be `rows cols nnz`"))
            })
            .collect::<Result<_, _>>()?;
        let [n_rows, n_cols, nnz] = dims[..] else {
            return Err(bad(1, "header must be `rows cols nnz`"));
        };
        let mut pairs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line_no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [r, c, w] = parts[..] else {
                return Err(bad(line_no, "expected `row col weight`"));
            };
            let r: usize = r.parse().map_err(|_| bad(line_no, "bad row"))?;
            let c: usize = c.parse().map_err(|_| bad(line_no, "bad column"))?;
            let w: f64 = w.parse().map_err(|_| bad(line_no, "bad weight"))?;
            if r >= n_rows || c >= n_cols {
                return Err(bad(line_no, "index out of range"));
            }
            pairs[r].push((c, w));
            seen += 1;
        }
        if seen != nnz {
            return Err(bad(1, "nnz does not match the number of entries"));
        }
        Ok(FeatureMatrix {
            rows: pairs.into_iter().map(SparseVec::from_pairs).collect(),
            num_columns: n_cols,
            row_labels: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn vocabulary_counts_documents() {
        let v = build_vocabulary(&docs(&[&["a", "b", "a"], &["b"]]));
        assert_eq!(v.len(), 2);
        assert_eq!(v.column("a"), Some(0));
        assert_eq!(v.column("b"), Some(1));
        assert_eq!(v.doc_frequency("a"), Some(1));
        assert_eq!(v.doc_frequency("b"), Some(2));

        let v = build_vocabulary(&docs(&[&["x"]]));
        assert_eq!((v.doc_frequency("x"), v.num_documents()), (Some(1), 1));

        let v = build_vocabulary(&docs(&[&[], &[]]));
        assert!(v.is_empty());
        assert_eq!(v.num_documents(), 2);
    }

    #[test]
    fn apple_banana() {
        let d = docs(&[&["apple", "apple", "banana"], &["banana"]]);
        let v = build_vocabulary(&d);
        let m = tfidf_transform(&d, &v);
        let expected = 3f64.ln() * 2f64.ln();
        assert!((m.rows[0].get(0) - expected).abs() < 1e-12);
        assert!((expected - 0.761_500_010_418_809_4).abs() < 1e-12);
        // banana has df = N: structural zero everywhere
        assert_eq!(m.rows[0].nnz(), 1);
        assert!(m.rows[1].is_empty());
    }

    #[test]
    fn single_document_is_all_zero() {
        let d = docs(&[&["x", "y", "y"]]);
        let v = build_vocabulary(&d);
        assert_eq!(tfidf_transform(&d, &v).nnz(), 0);
        assert_eq!(
            count_transform(&d, &v).rows[0].entries(),
            &[(0, 1.0), (1, 2.0)]
        );
    }

    #[test]
    fn unseen_terms_are_dropped() {
        let d = docs(&[&["a"], &["b"]]);
        let v = build_vocabulary(&d);
        let m = tfidf_transform(&docs(&[&["zzz", "a"]]), &v);
        assert_eq!(m.rows[0].nnz(), 1);
        assert_eq!(m.rows[0].max_column(), Some(0));
    }

    #[test]
    fn dump_roundtrip_and_format() {
        let d = docs(&[
            &["apple", "apple", "banana"],
            &["banana", "cherry"],
            &["date"],
        ]);
        let v = build_vocabulary(&d);
        let m = tfidf_transform(&d, &v);
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 4 5\n"), "{text}");
        assert!(text.contains("0 0 1.206948961e0"), "{text}");
        let back = FeatureMatrix::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back.num_columns, 4);
        for (a, b) in m.rows.iter().zip(&back.rows) {
            for ((ca, va), (cb, vb)) in a.iter().zip(b.iter()) {
                assert_eq!(ca, cb);
                assert!((va - vb).abs() <= 1e-9 * va.abs());
            }
        }
        assert!(FeatureMatrix::read_dump("2 2 1\n5 0 1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn vocabulary_serde_rebuilds_index() {
        let v = build_vocabulary(&docs(&[&["a", "b"], &["b", "c"]]));
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.column("c"), Some(2));
    }
}
