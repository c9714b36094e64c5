//! Bagged random trees with a plurality vote.

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::ColumnIndex;
use super::{DecisionTree, ForestParams};
use crate::corpus::Characterization;
use crate::rng::{derive_seed, stream, Purpose};
use crate::textprep::{FeatureMatrix, SparseVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub seed: u64,
    /// Seed each tree's bootstrap and feature draws came from.
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<DecisionTree>,
}

impl ForestModel {
    pub fn fit(
        params: &ForestParams,
        x: &FeatureMatrix,
        labels: &[Characterization],
        seed: u64,
    ) -> Self {
        let columns = ColumnIndex::new(x);
        let n = labels.len();
        let bag = ((params.bag_fraction * n as f64).round() as usize).max(1);
        let trees: Vec<DecisionTree> = (0..params.num_trees)
            .into_par_iter()
            .map(|t| {
                let mut boot = stream(seed, Purpose::ForestBootstrap, t as u64);
                let sample: Vec<usize> = (0..bag).map(|_| boot.random_range(0..n)).collect();
                let rng = stream(seed, Purpose::ForestFeatures, t as u64);
                DecisionTree::fit_random(
                    &columns,
                    x,
                    labels,
                    &sample,
                    params.features_per_split,
                    params.min_leaf,
                    rng,
                )
            })
            .collect();
        let tree_seeds = (0..params.num_trees)
            .map(|t| derive_seed(seed, Purpose::ForestBootstrap, t as u64))
            .collect();
        ForestModel {
            seed,
            tree_seeds,
            trees,
        }
    }

    /// Tree votes per class in `class_list` order.
    pub fn votes(&self, x: &SparseVec, class_list: &[Characterization]) -> Vec<f64> {
        let mut votes = vec![0.0; class_list.len()];
        for tree in &self.trees {
            if let Ok(i) = class_list.binary_search(&tree.predict(x)) {
                votes[i] += 1.0;
            }
        }
        votes
    }

    /// Plurality of tree votes. Ties are broken at random, with the draw
    /// seeded from the forest seed and the instance itself so that
    /// prediction stays a pure function.
    pub fn predict(&self, x: &SparseVec) -> Characterization {
        let mut tally: Vec<(Characterization, usize)> = Vec::new();
        for tree in &self.trees {
            let label = tree.predict(x);
            match tally.iter_mut().find(|(c, _)| *c == label) {
                Some(entry) => entry.1 += 1,
                None => tally.push((label, 1)),
            }
        }
        let top = tally.iter().map(|e| e.1).max().unwrap_or(0);
        let mut tied: Vec<Characterization> =
            tally.iter().filter(|e| e.1 == top).map(|e| e.0).collect();
        tied.sort_unstable();
        if tied.len() == 1 {
            return tied[0];
        }
        let mut rng = stream(self.seed, Purpose::ForestTieBreak, instance_hash(x));
        *tied.choose(&mut rng).expect("at least one tree")
    }
}

fn instance_hash(x: &SparseVec) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for (j, v) in x.iter() {
        for word in [j as u64, v.to_bits()] {
            h ^= word;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
