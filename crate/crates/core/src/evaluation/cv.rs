use rayon::prelude::*;

use super::{stratified_folds, ConfusionMatrix, EvalError, EvalReport, FoldAssignment};
use crate::classifiers::{train, AlgorithmSpec, ClassifierError, Dataset, Instance, Predictor};
use crate::corpus::{Characterization, Corpus};
use crate::pipeline::{fit_features, transform};
use crate::textprep::{preprocess, TokenList, Vocabulary};

/// Something that can be fitted on a fold's training data.
pub trait Learner: Sync {
    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>, ClassifierError>;
}

impl Learner for AlgorithmSpec {
    fn fit(&self, data: &Dataset) -> Result<Box<dyn Predictor>, ClassifierError> {
        Ok(Box::new(train(self, data)?))
    }
}

#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub predictions: Vec<Characterization>,
    /// Vocabulary fitted on this fold's training documents.
    pub vocabulary: Vocabulary,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub assignment: FoldAssignment,
    pub folds: Vec<FoldResult>,
    /// Held-out prediction for every example, in corpus order.
    pub predictions: Vec<Characterization>,
    /// All held-out predictions pooled.
    pub confusion: ConfusionMatrix,
}

/// Stratified k-fold cross-validation of `spec`, metrics from the pooled
/// confusion matrix.
pub fn cross_validate(
    spec: &AlgorithmSpec,
    corpus: &Corpus,
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let outcome = cross_validate_with(spec, corpus, k, seed)?;
    EvalReport::from_confusion(spec.kind().name(), k, seed, outcome.confusion)
}

/// Cross-validation with any learner. Each fold fits vocabulary, IDF and
/// model on its training documents only.
pub fn cross_validate_with(
    learner: &dyn Learner,
    corpus: &Corpus,
    k: usize,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    let labels = corpus.labels();
    let assignment = stratified_folds(&labels, k, seed)?;
    let docs: Vec<TokenList> = corpus.descriptions().map(preprocess).collect();

    let folds = (0..k)
        .into_par_iter()
        .filter_map(|fold| {
            let test = assignment.test_indices(fold);
            if test.is_empty() {
                return None;
            }
            Some(run_fold(learner, &docs, &labels, &assignment, fold, test))
        })
        .collect::<Result<Vec<FoldResult>, EvalError>>()?;

    let mut confusion = ConfusionMatrix::new(&labels);
    let mut predictions = vec![labels[0]; labels.len()];
    for f in &folds {
        for (&i, &p) in f.test_indices.iter().zip(&f.predictions) {
            confusion.record(labels[i], p)?;
            predictions[i] = p;
        }
    }
    Ok(CvOutcome {
        assignment,
        folds,
        predictions,
        confusion,
    })
}

fn run_fold(
    learner: &dyn Learner,
    docs: &[TokenList],
    labels: &[Characterization],
    assignment: &FoldAssignment,
    fold: usize,
    test: Vec<usize>,
) -> Result<FoldResult, EvalError> {
    let annotate = |source: ClassifierError| EvalError::Fold { fold, source };
    let train_idx = assignment.train_indices(fold);
    let train_docs: Vec<TokenList> = train_idx.iter().map(|&i| docs[i].clone()).collect();
    let train_labels = train_idx.iter().map(|&i| labels[i]).collect();
    let (vocabulary, data) = fit_features(&train_docs, train_labels).map_err(annotate)?;
    let model = learner.fit(&data).map_err(annotate)?;

    let test_docs: Vec<TokenList> = test.iter().map(|&i| docs[i].clone()).collect();
    let (tfidf, counts) = transform(&test_docs, &vocabulary);
    let predictions = tfidf
        .rows
        .iter()
        .zip(&counts.rows)
        .map(|(t, c)| {
            model.predict(Instance {
                tfidf: t,
                counts: c,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(annotate)?;
    Ok(FoldResult {
        fold,
        test_indices: test,
        predictions,
        vocabulary,
    })
}
