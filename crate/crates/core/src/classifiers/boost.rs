//! AdaBoost.M1 over the SVM, by weighted resampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{argmax_first, BoostParams, ClassifierError, SvmModel, SvmParams};
use crate::corpus::Characterization;
use crate::rng::{derive_seed, stream, Purpose};
use crate::textprep::{FeatureMatrix, SparseVec};

/// Stand-in for `ln(1/0)` when a member makes no weighted error.
pub const PERFECT_BETA: f64 = f64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostMember {
    pub model: SvmModel,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub members: Vec<BoostMember>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostRound {
    pub member: SvmModel,
    /// Weighted error of the member on the full training set.
    pub error: f64,
    /// `ln((1 − e) / e)`; [`PERFECT_BETA`] when `e = 0`.
    pub beta: f64,
    /// Weights for the next round; unchanged when `e` is 0 or at least 0.5.
    pub next_weights: Vec<f64>,
}

/// One boosting round: resample by `weights`, train, score, reweight.
pub fn boost_round(
    weights: &[f64],
    x: &FeatureMatrix,
    labels: &[Characterization],
    base: &SvmParams,
    resample_fraction: f64,
    seed: u64,
    round: usize,
) -> Result<BoostRound, ClassifierError> {
    let n = labels.len();
    if weights.len() != n || x.num_rows() != n {
        return Err(ClassifierError::DimensionMismatch(format!(
            "{} weights, {} rows, {} labels",
            weights.len(),
            x.num_rows(),
            n
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(ClassifierError::InvalidWeights(sum));
    }

    let size = ((resample_fraction * n as f64).round() as usize).max(1);
    let dist = WeightedIndex::new(weights).map_err(|_| ClassifierError::InvalidWeights(sum))?;
    let mut rng = stream(seed, Purpose::BoostResample, round as u64);
    let picks: Vec<usize> = (0..size).map(|_| dist.sample(&mut rng)).collect();
    let sample = FeatureMatrix {
        rows: picks.iter().map(|&i| x.rows[i].clone()).collect(),
        num_columns: x.num_columns,
        row_labels: None,
    };
    let sample_labels: Vec<Characterization> = picks.iter().map(|&i| labels[i]).collect();
    let member_seed = derive_seed(seed, Purpose::BoostResample, round as u64);
    let member = SvmModel::fit(base, &sample, &sample_labels, member_seed)?;

    let mut wrong = vec![false; n];
    let mut error = 0.0;
    for i in 0..n {
        if member.predict(&x.rows[i])? != labels[i] {
            wrong[i] = true;
            error += weights[i];
        }
    }
    let error = error.clamp(0.0, 1.0);
    let beta = if error == 0.0 {
        PERFECT_BETA
    } else {
        ((1.0 - error) / error).ln()
    };
    let next_weights = if error > 0.0 && error < 0.5 {
        let factor = (1.0 - error) / error;
        let raw: Vec<f64> = weights
            .iter()
            .zip(&wrong)
            .map(|(w, &bad)| if bad { w * factor } else { *w })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    } else {
        weights.to_vec()
    };
    Ok(BoostRound {
        member,
        error,
        beta,
        next_weights,
    })
}

impl BoostModel {
    pub fn fit(
        params: &BoostParams,
        x: &FeatureMatrix,
        labels: &[Characterization],
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        let n = labels.len();
        let mut weights = vec![1.0 / n as f64; n];
        let mut members = Vec::new();
        for round in 0..params.iterations {
            let r = boost_round(
                &weights,
                x,
                labels,
                &params.base,
                params.resample_fraction,
                seed,
                round,
            )?;
            if r.error >= 0.5 {
                // a first member is kept even when weak, as the only voter
                if members.is_empty() {
                    members.push(BoostMember {
                        model: r.member,
                        beta: 1.0,
                    });
                }
                break;
            }
            if r.error == 0.0 {
                members.push(BoostMember {
                    model: r.member,
                    beta: r.beta,
                });
                break;
            }
            members.push(BoostMember {
                model: r.member,
                beta: r.beta,
            });
            weights = r.next_weights;
        }
        Ok(BoostModel { members })
    }

    /// `Σ_t β_t · [member_t predicts c]` for each class in `class_list`.
    pub fn weighted_votes(
        &self,
        x: &SparseVec,
        class_list: &[Characterization],
    ) -> Result<Vec<f64>, ClassifierError> {
        let mut votes = vec![0.0; class_list.len()];
        for m in &self.members {
            if let Ok(i) = class_list.binary_search(&m.model.predict(x)?) {
                votes[i] += m.beta;
            }
        }
        Ok(votes)
    }

    pub fn predict(&self, x: &SparseVec) -> Result<Characterization, ClassifierError> {
        let mut classes: Vec<Characterization> = self
            .members
            .iter()
            .flat_map(|m| m.model.classes.clone())
            .collect();
        classes.sort_unstable();
        classes.dedup();
        let votes = self.weighted_votes(x, &classes)?;
        Ok(classes[argmax_first(&votes)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Characterization::{Read, Write};

    #[test]
    fn beta_formula() {
        assert!((((1.0f64 - 0.25) / 0.25).ln() - 1.0986122886681098).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_distribution() {
        let x = FeatureMatrix {
            rows: vec![SparseVec::new(); 2],
            num_columns: 1,
            row_labels: None,
        };
        let err = boost_round(
            &[0.7, 0.7],
            &x,
            &[Read, Write],
            &SvmParams::default(),
            1.0,
            1,
            0,
        );
        assert!(matches!(err, Err(ClassifierError::InvalidWeights(_))));
    }

    #[test]
    fn separable_data_stops_after_one_perfect_round() {
        let rows = (0..8)
            .map(|i| SparseVec::from_dense(&[if i < 4 { 1.0 } else { 0.0 }, 0.5]))
            .collect();
        let x = FeatureMatrix {
            rows,
            num_columns: 2,
            row_labels: None,
        };
        let y: Vec<_> = (0..8).map(|i| if i < 4 { Read } else { Write }).collect();
        let params = BoostParams {
            base: SvmParams {
                c: 10.0,
                ..SvmParams::default()
            },
            ..BoostParams::default()
        };
        let m = BoostModel::fit(&params, &x, &y, 123).unwrap();
        assert_eq!(m.members.len(), 1);
        assert_eq!(m.members[0].beta, PERFECT_BETA);
    }
}
