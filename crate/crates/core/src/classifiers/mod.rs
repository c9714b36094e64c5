//! The six classifiers behind one train/predict contract.
//!
//! Every model is trained from a [`Dataset`] (TF-IDF rows, raw term-count
//! rows, labels) and predicts one label from the classes it saw in training.
//! Unless a kind documents otherwise, ties go to the label with the lowest
//! [`Characterization::index`].

mod boost;
mod forest;
mod naive_bayes;
mod params;
pub mod persist;
mod svm;
mod tree;
mod vote;

use serde::{Deserialize, Serialize};

use crate::corpus::Characterization;
use crate::textprep::{FeatureMatrix, SparseVec};

pub use boost::{boost_round, BoostMember, BoostModel, BoostRound};
pub use forest::ForestModel;
pub use naive_bayes::{nb_posterior, NaiveBayesModel};
pub use params::{
    AlgorithmKind, AlgorithmSpec, BoostParams, ForestParams, NaiveBayesParams, NbInput, Params,
    SvmParams, TreeParams, VoteParams, DEFAULT_SEED,
};
pub use svm::{
    kkt_max_violation, pairwise_predict, smo_solve, BinaryMachine, MinMaxScaler, SmoSolution,
    SvmModel,
};
pub use tree::{gain_ratio, DecisionTree, SplitScore};
pub use vote::{majority_combine, VoteModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("training data holds a single class ({0}); at least two are required")]
    SingleClass(Characterization),
    #[error("training data is empty")]
    Empty,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("column {column} out of range for a model trained on {num_columns} columns")]
    ColumnOutOfRange { column: usize, num_columns: usize },
    #[error("SMO did not converge after {pair_updates} pair updates (max KKT violation {max_violation:.3e})")]
    NonConvergence {
        pair_updates: usize,
        max_violation: f64,
    },
    #[error("no binary machine for classes {0} and {1}")]
    MissingMachine(Characterization, Characterization),
    #[error("sample weights are not a probability distribution (sum {0})")]
    InvalidWeights(f64),
}

/// One example seen through both feature views.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub tfidf: &'a SparseVec,
    pub counts: &'a SparseVec,
}

impl<'a> Instance<'a> {
    /// Same vector for both views; handy when only one representation exists.
    pub fn uniform(x: &'a SparseVec) -> Self {
        Instance {
            tfidf: x,
            counts: x,
        }
    }
}

/// Training input: TF-IDF rows, raw count rows over the same columns, labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    tfidf: FeatureMatrix,
    counts: FeatureMatrix,
    labels: Vec<Characterization>,
}

impl Dataset {
    pub fn new(
        tfidf: FeatureMatrix,
        counts: FeatureMatrix,
        labels: Vec<Characterization>,
    ) -> Result<Self, ClassifierError> {
        if tfidf.num_rows() != labels.len() || counts.num_rows() != labels.len() {
            return Err(ClassifierError::DimensionMismatch(format!(
                "{} tfidf rows, {} count rows, {} labels",
                tfidf.num_rows(),
                counts.num_rows(),
                labels.len()
            )));
        }
        if tfidf.num_columns != counts.num_columns {
            return Err(ClassifierError::DimensionMismatch(format!(
                "tfidf has {} columns, counts {}",
                tfidf.num_columns, counts.num_columns
            )));
        }
        for m in [&tfidf, &counts] {
            if let Some(c) = m.rows.iter().filter_map(SparseVec::max_column).max() {
                if c >= m.num_columns {
                    return Err(ClassifierError::ColumnOutOfRange {
                        column: c,
                        num_columns: m.num_columns,
                    });
                }
            }
        }
        Ok(Dataset {
            tfidf,
            counts,
            labels,
        })
    }

    /// Uses one matrix for both views.
    pub fn from_matrix(
        x: FeatureMatrix,
        labels: Vec<Characterization>,
    ) -> Result<Self, ClassifierError> {
        Dataset::new(x.clone(), x, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.tfidf.num_columns
    }

    pub fn labels(&self) -> &[Characterization] {
        &self.labels
    }

    pub fn tfidf(&self) -> &FeatureMatrix {
        &self.tfidf
    }

    pub fn counts(&self) -> &FeatureMatrix {
        &self.counts
    }

    pub fn instance(&self, i: usize) -> Instance<'_> {
        Instance {
            tfidf: &self.tfidf.rows[i],
            counts: &self.counts.rows[i],
        }
    }

    /// Distinct labels sorted by index.
    pub fn class_list(&self) -> Vec<Characterization> {
        sorted_classes(&self.labels)
    }

    /// Rows at `indices`, repeats allowed.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let pick = |m: &FeatureMatrix| FeatureMatrix {
            rows: indices.iter().map(|&i| m.rows[i].clone()).collect(),
            num_columns: m.num_columns,
            row_labels: None,
        };
        Dataset {
            tfidf: pick(&self.tfidf),
            counts: pick(&self.counts),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

pub(crate) fn sorted_classes(labels: &[Characterization]) -> Vec<Characterization> {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// Index of the largest score; the first one wins ties.
pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Anything that maps an instance to a label.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: Instance<'_>) -> Result<Characterization, ClassifierError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelState {
    NaiveBayes(NaiveBayesModel),
    DecisionTree(DecisionTree),
    Svm(SvmModel),
    RandomForest(ForestModel),
    AdaboostSvm(BoostModel),
    MajorityVote(VoteModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub class_list: Vec<Characterization>,
    pub num_columns: usize,
    pub state: ModelState,
}

impl TrainedModel {
    pub fn kind(&self) -> AlgorithmKind {
        match &self.state {
            ModelState::NaiveBayes(_) => AlgorithmKind::NaiveBayes,
            ModelState::DecisionTree(_) => AlgorithmKind::DecisionTree,
            ModelState::Svm(_) => AlgorithmKind::Svm,
            ModelState::RandomForest(_) => AlgorithmKind::RandomForest,
            ModelState::AdaboostSvm(_) => AlgorithmKind::AdaboostSvm,
            ModelState::MajorityVote(_) => AlgorithmKind::MajorityVote,
        }
    }

    fn check_columns(&self, x: Instance<'_>) -> Result<(), ClassifierError> {
        for v in [x.tfidf, x.counts] {
            if let Some(c) = v.max_column() {
                if c >= self.num_columns {
                    return Err(ClassifierError::ColumnOutOfRange {
                        column: c,
                        num_columns: self.num_columns,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn predict(&self, x: Instance<'_>) -> Result<Characterization, ClassifierError> {
        self.check_columns(x)?;
        self.predict_unchecked(x)
    }

    fn predict_unchecked(&self, x: Instance<'_>) -> Result<Characterization, ClassifierError> {
        Ok(match &self.state {
            ModelState::NaiveBayes(m) => m.predict(x),
            ModelState::DecisionTree(m) => m.predict(x.tfidf),
            ModelState::Svm(m) => m.predict(x.tfidf)?,
            ModelState::RandomForest(m) => m.predict(x.tfidf),
            ModelState::AdaboostSvm(m) => m.predict(x.tfidf)?,
            ModelState::MajorityVote(m) => m.predict(x)?,
        })
    }

    /// Per-class scores behind the prediction: log posteriors for naive
    /// Bayes, vote tallies (weighted for boosting) for the voting kinds, and
    /// `None` for a single tree.
    pub fn scores(
        &self,
        x: Instance<'_>,
    ) -> Result<Option<Vec<(Characterization, f64)>>, ClassifierError> {
        self.check_columns(x)?;
        let zip = |values: Vec<f64>| Some(self.class_list.iter().copied().zip(values).collect());
        Ok(match &self.state {
            ModelState::NaiveBayes(m) => zip(m.posterior(x)),
            ModelState::DecisionTree(_) => None,
            ModelState::Svm(m) => zip(m.votes(x.tfidf, &self.class_list)?),
            ModelState::RandomForest(m) => zip(m.votes(x.tfidf, &self.class_list)),
            ModelState::AdaboostSvm(m) => zip(m.weighted_votes(x.tfidf, &self.class_list)?),
            ModelState::MajorityVote(m) => zip(m.votes(x, &self.class_list)?),
        })
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, x: Instance<'_>) -> Result<Characterization, ClassifierError> {
        TrainedModel::predict(self, x)
    }
}

/// Trains `spec` on `data`. Deterministic in `(spec, data)`, independent of
/// the rayon thread count.
pub fn train(spec: &AlgorithmSpec, data: &Dataset) -> Result<TrainedModel, ClassifierError> {
    spec.validate()?;
    if data.len() < 2 {
        return Err(ClassifierError::Empty);
    }
    let class_list = data.class_list();
    if class_list.len() < 2 {
        return Err(ClassifierError::SingleClass(class_list[0]));
    }
    let state = match &spec.params {
        Params::NaiveBayes(p) => ModelState::NaiveBayes(NaiveBayesModel::fit(p, data)),
        Params::DecisionTree(p) => {
            ModelState::DecisionTree(DecisionTree::fit_c45(p, data.tfidf(), data.labels()))
        }
        Params::Svm(p) => {
            ModelState::Svm(SvmModel::fit(p, data.tfidf(), data.labels(), spec.seed)?)
        }
        Params::RandomForest(p) => {
            ModelState::RandomForest(ForestModel::fit(p, data.tfidf(), data.labels(), spec.seed))
        }
        Params::AdaboostSvm(p) => {
            ModelState::AdaboostSvm(BoostModel::fit(p, data.tfidf(), data.labels(), spec.seed)?)
        }
        Params::MajorityVote(p) => ModelState::MajorityVote(VoteModel::fit(p, data)?),
    };
    Ok(TrainedModel {
        class_list,
        num_columns: data.num_columns(),
        state,
    })
}
