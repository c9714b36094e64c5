use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClassifierError;

pub const DEFAULT_SEED: u64 = 123;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    NaiveBayes,
    DecisionTree,
    Svm,
    RandomForest,
    AdaboostSvm,
    MajorityVote,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::NaiveBayes,
        AlgorithmKind::DecisionTree,
        AlgorithmKind::Svm,
        AlgorithmKind::RandomForest,
        AlgorithmKind::AdaboostSvm,
        AlgorithmKind::MajorityVote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::NaiveBayes => "naive_bayes",
            AlgorithmKind::DecisionTree => "decision_tree",
            AlgorithmKind::Svm => "svm",
            AlgorithmKind::RandomForest => "random_forest",
            AlgorithmKind::AdaboostSvm => "adaboost_svm",
            AlgorithmKind::MajorityVote => "majority_vote",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmKind::NaiveBayes => "Naive Bayes",
            AlgorithmKind::DecisionTree => "Decision Tree",
            AlgorithmKind::Svm => "SVM",
            AlgorithmKind::RandomForest => "Random Forest",
            AlgorithmKind::AdaboostSvm => "AdaBoost-SVM",
            AlgorithmKind::MajorityVote => "Majority Vote",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbInput {
    #[default]
    Counts,
    Tfidf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaiveBayesParams {
    /// Which feature view feeds the likelihoods.
    pub input: NbInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// Pruning confidence; `None` grows the full tree.
    pub confidence: Option<f64>,
    /// Minimum instances per leaf. Zero is treated as one.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            confidence: Some(0.4),
            min_leaf: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub tolerance: f64,
    pub epsilon: f64,
    pub max_pair_updates: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 0.5,
            tolerance: 1e-3,
            epsilon: 1e-12,
            max_pair_updates: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub num_trees: usize,
    pub features_per_split: usize,
    pub min_leaf: usize,
    pub bag_fraction: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            num_trees: 320,
            features_per_split: 1,
            min_leaf: 1,
            bag_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub iterations: usize,
    pub resample_fraction: f64,
    pub base: SvmParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            iterations: 100,
            resample_fraction: 1.0,
            base: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteParams {
    pub members: Vec<AlgorithmSpec>,
}

impl Default for VoteParams {
    fn default() -> Self {
        let members = [
            AlgorithmKind::NaiveBayes,
            AlgorithmKind::Svm,
            AlgorithmKind::DecisionTree,
            AlgorithmKind::RandomForest,
            AlgorithmKind::AdaboostSvm,
        ];
        VoteParams {
            members: members
                .into_iter()
                .map(AlgorithmSpec::default_for)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    NaiveBayes(NaiveBayesParams),
    DecisionTree(TreeParams),
    Svm(SvmParams),
    RandomForest(ForestParams),
    AdaboostSvm(BoostParams),
    MajorityVote(VoteParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub params: Params,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl AlgorithmSpec {
    /// The hyper-parameter scheme for `kind`, seed 123.
    pub fn default_for(kind: AlgorithmKind) -> Self {
        let params = match kind {
            AlgorithmKind::NaiveBayes => Params::NaiveBayes(NaiveBayesParams::default()),
            AlgorithmKind::DecisionTree => Params::DecisionTree(TreeParams::default()),
            AlgorithmKind::Svm => Params::Svm(SvmParams::default()),
            AlgorithmKind::RandomForest => Params::RandomForest(ForestParams::default()),
            AlgorithmKind::AdaboostSvm => Params::AdaboostSvm(BoostParams::default()),
            AlgorithmKind::MajorityVote => Params::MajorityVote(VoteParams::default()),
        };
        AlgorithmSpec {
            params,
            seed: DEFAULT_SEED,
        }
    }

    pub fn kind(&self) -> AlgorithmKind {
        match self.params {
            Params::NaiveBayes(_) => AlgorithmKind::NaiveBayes,
            Params::DecisionTree(_) => AlgorithmKind::DecisionTree,
            Params::Svm(_) => AlgorithmKind::Svm,
            Params::RandomForest(_) => AlgorithmKind::RandomForest,
            Params::AdaboostSvm(_) => AlgorithmKind::AdaboostSvm,
            Params::MajorityVote(_) => AlgorithmKind::MajorityVote,
        }
    }

    /// Sets the seed here and in every vote member.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Params::MajorityVote(v) = &mut self.params {
            v.members = std::mem::take(&mut v.members)
                .into_iter()
                .map(|m| m.with_seed(seed))
                .collect();
        }
        self
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |msg: String| Err(ClassifierError::InvalidParams(msg));
        match &self.params {
            Params::NaiveBayes(_) => Ok(()),
            Params::DecisionTree(p) => match p.confidence {
                Some(cf) if !(cf > 0.0 && cf <= 0.5) => {
                    bad(format!("tree confidence {cf} outside (0, 0.5]"))
                }
                _ => Ok(()),
            },
            Params::Svm(p) => validate_svm(p),
            Params::RandomForest(p) => {
                if p.num_trees == 0 {
                    return bad("random_forest.num_trees must be at least 1".into());
                }
                if p.features_per_split == 0 {
                    return bad("random_forest.features_per_split must be at least 1".into());
                }
                if !(p.bag_fraction > 0.0 && p.bag_fraction.is_finite()) {
                    return bad(format!(
                        "random_forest.bag_fraction {} must be positive",
                        p.bag_fraction
                    ));
                }
                Ok(())
            }
            Params::AdaboostSvm(p) => {
                if p.iterations == 0 {
                    return bad("adaboost_svm.iterations must be at least 1".into());
                }
                if !(p.resample_fraction > 0.0 && p.resample_fraction.is_finite()) {
                    return bad(format!(
                        "adaboost_svm.resample_fraction {} must be positive",
                        p.resample_fraction
                    ));
                }
                validate_svm(&p.base)
            }
            Params::MajorityVote(p) => {
                if p.members.is_empty() {
                    return bad("majority_vote needs at least one member".into());
                }
                for m in &p.members {
                    if m.kind() == AlgorithmKind::MajorityVote {
                        return bad("majority_vote members cannot be votes themselves".into());
                    }
                    m.validate()?;
                }
                Ok(())
            }
        }
    }
}

fn validate_svm(p: &SvmParams) -> Result<(), ClassifierError> {
    let bad = |msg: String| Err(ClassifierError::InvalidParams(msg));
    if !(p.c > 0.0 && p.c.is_finite()) {
        return bad(format!("svm.c {} must be positive", p.c));
    }
    if !(p.tolerance > 0.0 && p.tolerance.is_finite()) {
        return bad(format!("svm.tolerance {} must be positive", p.tolerance));
    }
    if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
        return bad(format!("svm.epsilon {} must be positive", p.epsilon));
    }
    if p.max_pair_updates == 0 {
        return bad("svm.max_pair_updates must be at least 1".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_scheme() {
        let s = AlgorithmSpec::default_for(AlgorithmKind::Svm);
        assert_eq!(s.seed, 123);
        assert_eq!(
            s.params,
            Params::Svm(SvmParams {
                c: 0.5,
                tolerance: 0.001,
                epsilon: 1e-12,
                max_pair_updates: 1_000_000
            })
        );
        let Params::RandomForest(f) =
            AlgorithmSpec::default_for(AlgorithmKind::RandomForest).params
        else {
            unreachable!()
        };
        assert_eq!(
            (
                f.num_trees,
                f.features_per_split,
                f.min_leaf,
                f.bag_fraction
            ),
            (320, 1, 1, 1.0)
        );
        let Params::MajorityVote(v) =
            AlgorithmSpec::default_for(AlgorithmKind::MajorityVote).params
        else {
            unreachable!()
        };
        let kinds: Vec<_> = v.members.iter().map(AlgorithmSpec::kind).collect();
        assert_eq!(
            kinds,
            [
                AlgorithmKind::NaiveBayes,
                AlgorithmKind::Svm,
                AlgorithmKind::DecisionTree,
                AlgorithmKind::RandomForest,
                AlgorithmKind::AdaboostSvm
            ]
        );
        for k in AlgorithmKind::ALL {
            AlgorithmSpec::default_for(k).validate().unwrap();
            assert_eq!(k.name().parse::<AlgorithmKind>().unwrap(), k);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut s = AlgorithmSpec::default_for(AlgorithmKind::Svm);
        s.params = Params::Svm(SvmParams {
            c: 0.0,
            ..SvmParams::default()
        });
        assert!(s.validate().is_err());
        s.params = Params::RandomForest(ForestParams {
            num_trees: 0,
            ..ForestParams::default()
        });
        assert!(s.validate().is_err());
        s.params = Params::MajorityVote(VoteParams { members: vec![] });
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = AlgorithmSpec::default_for(AlgorithmKind::MajorityVote).with_seed(7);
        let text = serde_json::to_string(&s).unwrap();
        let back: AlgorithmSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let Params::MajorityVote(v) = &back.params else {
            unreachable!()
        };
        assert!(v.members.iter().all(|m| m.seed == 7));
    }
}
