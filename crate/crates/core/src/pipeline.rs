//! Text to prediction: preprocessing, vocabulary fitting and model training
//! glued together the same way for cross-validation folds and saved models.

use serde::Serialize;

use crate::classifiers::persist::ModelDocument;
use crate::classifiers::{train, AlgorithmSpec, ClassifierError, Dataset, Instance};
use crate::corpus::{Characterization, Corpus};
use crate::textprep::{
    build_vocabulary, count_transform, preprocess, tfidf_transform, FeatureMatrix, TokenList,
    Vocabulary,
};

/// TF-IDF and count matrices of `docs` over `vocab`.
pub fn transform(docs: &[TokenList], vocab: &Vocabulary) -> (FeatureMatrix, FeatureMatrix) {
    (tfidf_transform(docs, vocab), count_transform(docs, vocab))
}

/// Fits a vocabulary on `docs` and builds the training dataset.
pub fn fit_features(
    docs: &[TokenList],
    labels: Vec<Characterization>,
) -> Result<(Vocabulary, Dataset), ClassifierError> {
    let vocab = build_vocabulary(docs);
    let (tfidf, counts) = transform(docs, &vocab);
    let data = Dataset::new(tfidf, counts, labels)?;
    Ok((vocab, data))
}

/// Trains `spec` on the whole corpus and bundles it with its vocabulary.
pub fn train_model(
    spec: &AlgorithmSpec,
    corpus: &Corpus,
) -> Result<ModelDocument, ClassifierError> {
    let docs: Vec<TokenList> = corpus.descriptions().map(preprocess).collect();
    let (vocab, data) = fit_features(&docs, corpus.labels())?;
    let model = train(spec, &data)?;
    Ok(ModelDocument::new(spec.clone(), vocab, model))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub label: Characterization,
    /// Per-class scores when the model kind exposes them.
    pub scores: Option<Vec<(Characterization, f64)>>,
    pub tokens: TokenList,
}

pub fn predict_text(doc: &ModelDocument, text: &str) -> Result<Prediction, ClassifierError> {
    let tokens = preprocess(text);
    let (tfidf, counts) = transform(std::slice::from_ref(&tokens), &doc.vocabulary);
    let x = Instance {
        tfidf: &tfidf.rows[0],
        counts: &counts.rows[0],
    };
    let label = doc.model.predict(x)?;
    let scores = doc.model.scores(x)?;
    Ok(Prediction {
        label,
        scores,
        tokens,
    })
}
