//! Plurality vote over independently trained member models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, ClassifierError, Dataset, Instance, TrainedModel, VoteParams};
use crate::corpus::Characterization;

/// Most frequent label; lowest index on ties.
pub fn majority_combine(predictions: &[Characterization]) -> Characterization {
    assert!(
        !predictions.is_empty(),
        "majority_combine needs at least one prediction"
    );
    let mut counts = [0usize; Characterization::COUNT];
    for p in predictions {
        counts[p.index()] += 1;
    }
    let top = counts.iter().max().copied().unwrap_or(0);
    Characterization::ALL
        .into_iter()
        .find(|c| counts[c.index()] == top)
        .expect("a label reaches the max")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteModel {
    pub members: Vec<TrainedModel>,
}

impl VoteModel {
    pub fn fit(params: &VoteParams, data: &Dataset) -> Result<Self, ClassifierError> {
        let members = params
            .members
            .par_iter()
            .map(|spec| train(spec, data))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VoteModel { members })
    }

    fn member_predictions(
        &self,
        x: Instance<'_>,
    ) -> Result<Vec<Characterization>, ClassifierError> {
        self.members.iter().map(|m| m.predict(x)).collect()
    }

    pub fn votes(
        &self,
        x: Instance<'_>,
        class_list: &[Characterization],
    ) -> Result<Vec<f64>, ClassifierError> {
        let mut votes = vec![0.0; class_list.len()];
        for p in self.member_predictions(x)? {
            if let Ok(i) = class_list.binary_search(&p) {
                votes[i] += 1.0;
            }
        }
        Ok(votes)
    }

    pub fn predict(&self, x: Instance<'_>) -> Result<Characterization, ClassifierError> {
        Ok(majority_combine(&self.member_predictions(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Characterization::{Memory, Read, Write};

    #[test]
    fn plurality_and_ties() {
        assert_eq!(majority_combine(&[Read, Read, Write, Read, Memory]), Read);
        assert_eq!(majority_combine(&[Read, Write, Read, Write, Memory]), Write);
        assert_eq!(majority_combine(&[Memory; 5]), Memory);
    }
}
