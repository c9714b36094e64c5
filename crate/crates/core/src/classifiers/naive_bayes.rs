//! Multinomial naive Bayes with add-one smoothing, in log space.

use serde::{Deserialize, Serialize};

use super::{argmax_first, Dataset, Instance, NaiveBayesParams, NbInput};
use crate::corpus::Characterization;
use crate::textprep::SparseVec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub input: NbInput,
    pub classes: Vec<Characterization>,
    pub log_prior: Vec<f64>,
    /// `log_likelihood[c][t] = ln((count(t, c) + 1) / (total(c) + V))`.
    pub log_likelihood: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    pub fn fit(params: &NaiveBayesParams, data: &Dataset) -> Self {
        let classes = data.class_list();
        let v = data.num_columns();
        let rows = match params.input {
            NbInput::Counts => data.counts(),
            NbInput::Tfidf => data.tfidf(),
        };
        let mut docs = vec![0usize; classes.len()];
        let mut term_mass = vec![vec![0.0f64; v]; classes.len()];
        for (row, label) in rows.rows.iter().zip(data.labels()) {
            let c = classes.binary_search(label).expect("label from class list");
            docs[c] += 1;
            for (t, x) in row.iter() {
                term_mass[c][t] += x;
            }
        }
        let n = data.len() as f64;
        let log_prior = docs.iter().map(|&d| (d as f64 / n).ln()).collect();
        let log_likelihood = term_mass
            .into_iter()
            .map(|mass| {
                let total: f64 = mass.iter().sum();
                let denom = (total + v as f64).ln();
                mass.into_iter().map(|m| (m + 1.0).ln() - denom).collect()
            })
            .collect();
        NaiveBayesModel {
            input: params.input,
            classes,
            log_prior,
            log_likelihood,
        }
    }

    /// Log-space class scores in `classes` order.
    pub fn posterior(&self, x: Instance<'_>) -> Vec<f64> {
        let row = match self.input {
            NbInput::Counts => x.counts,
            NbInput::Tfidf => x.tfidf,
        };
        nb_posterior(self, row)
    }

    pub fn predict(&self, x: Instance<'_>) -> Characterization {
        self.classes[argmax_first(&self.posterior(x))]
    }
}

/// `ln P(c) + Σ_t x_t · ln P(t | c)` for every class.
pub fn nb_posterior(model: &NaiveBayesModel, x: &SparseVec) -> Vec<f64> {
    model
        .log_prior
        .iter()
        .zip(&model.log_likelihood)
        .map(|(prior, lik)| prior + x.iter().map(|(t, v)| v * lik[t]).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::FeatureMatrix;
    use Characterization::{Read, Write};

    // columns: read, data, write
    fn toy() -> Dataset {
        let counts = FeatureMatrix {
            rows: vec![
                SparseVec::from_dense(&[1.0, 1.0, 0.0]),
                SparseVec::from_dense(&[0.0, 1.0, 1.0]),
            ],
            num_columns: 3,
            row_labels: None,
        };
        Dataset::from_matrix(counts, vec![Read, Write]).unwrap()
    }

    #[test]
    fn hand_computed_posterior() {
        let m = NaiveBayesModel::fit(&NaiveBayesParams::default(), &toy());
        let x = SparseVec::from_dense(&[1.0, 0.0, 0.0]);
        let s = nb_posterior(&m, &x);
        // classes are kept in index order: Write before Read
        assert_eq!(m.classes, [Write, Read]);
        assert!((s[1] - (0.5f64 * 0.4).ln()).abs() < 1e-12);
        assert!((s[0] - (0.5f64 * 0.2).ln()).abs() < 1e-12);
        assert_eq!(m.predict(Instance::uniform(&x)), Read);
    }

    #[test]
    fn symmetric_model_ties_to_lowest_index() {
        let m = NaiveBayesModel::fit(&NaiveBayesParams::default(), &toy());
        let x = SparseVec::from_dense(&[0.0, 3.0, 0.0]);
        let s = nb_posterior(&m, &x);
        assert_eq!(s[0], s[1]);
        assert_eq!(m.predict(Instance::uniform(&x)), Write.min(Read));
        assert_eq!(m.predict(Instance::uniform(&SparseVec::new())), Write);
    }

    #[test]
    fn unseen_column_shifts_scores_equally() {
        // a fourth column never observed in training, equal class totals
        let mut data = toy();
        data = Dataset::from_matrix(
            FeatureMatrix {
                rows: data.counts().rows.clone(),
                num_columns: 4,
                row_labels: None,
            },
            data.labels().to_vec(),
        )
        .unwrap();
        let m = NaiveBayesModel::fit(&NaiveBayesParams::default(), &data);
        let base = nb_posterior(&m, &SparseVec::from_dense(&[1.0, 0.0, 0.0, 0.0]));
        let shifted = nb_posterior(&m, &SparseVec::from_dense(&[1.0, 0.0, 0.0, 2.0]));
        let d0 = shifted[0] - base[0];
        let d1 = shifted[1] - base[1];
        assert!((d0 - d1).abs() < 1e-12);
        assert!((d0 - 2.0 * (1.0f64 / 6.0).ln()).abs() < 1e-12);
        assert_eq!(argmax_first(&base), argmax_first(&shifted));
    }
}
