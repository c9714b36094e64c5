//! Binary-threshold decision trees: C4.5 style (gain ratio, pessimistic
//! pruning) and the randomized variant grown inside the forest.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_first, sorted_classes, TreeParams};
use crate::corpus::Characterization;
use crate::stats::special::normal_quantile;
use crate::textprep::{FeatureMatrix, SparseVec};

const GAIN_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScore {
    pub gain: f64,
    pub split_info: f64,
    pub ratio: f64,
}

fn entropy(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn score_split(parent: &[f64], left: &[f64]) -> SplitScore {
    let n: f64 = parent.iter().sum();
    let right: Vec<f64> = parent.iter().zip(left).map(|(p, l)| p - l).collect();
    let n_left: f64 = left.iter().sum();
    let n_right = n - n_left;
    let gain = entropy(parent, n)
        - (n_left / n) * entropy(left, n_left)
        - (n_right / n) * entropy(&right, n_right);
    let gain = gain.max(0.0);
    let split_info = entropy(&[n_left, n_right], n);
    let ratio = if split_info > 0.0 {
        gain / split_info
    } else {
        0.0
    };
    SplitScore {
        gain,
        split_info,
        ratio,
    }
}

/// Information gain, split information and their ratio (all in bits) for
/// sending `values <= threshold` left. `None` when a side is empty.
pub fn gain_ratio(values: &[f64], threshold: f64, y: &[Characterization]) -> Option<SplitScore> {
    assert_eq!(values.len(), y.len(), "one label per value");
    let classes = sorted_classes(y);
    let mut parent = vec![0.0; classes.len()];
    let mut left = vec![0.0; classes.len()];
    for (&v, label) in values.iter().zip(y) {
        let c = classes.binary_search(label).unwrap();
        parent[c] += 1.0;
        if v <= threshold {
            left[c] += 1.0;
        }
    }
    let n_left: f64 = left.iter().sum();
    if n_left == 0.0 || n_left == values.len() as f64 {
        return None;
    }
    Some(score_split(&parent, &left))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Characterization,
    },
    /// `x[feature] <= threshold` goes to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root is `nodes[0]`.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Grows a gain-ratio tree over every feature, pruned at
    /// `params.confidence` when set.
    pub fn fit_c45(params: &TreeParams, x: &FeatureMatrix, labels: &[Characterization]) -> Self {
        let columns = ColumnIndex::new(x);
        let sample: Vec<usize> = (0..labels.len()).collect();
        let mut grower = Grower::new(
            &columns,
            x,
            labels,
            params.min_leaf.max(1),
            FeatureChoice::All,
        );
        let mut root = grower.grow(&sample);
        if let Some(cf) = params.confidence {
            prune(&mut root, cf);
        }
        DecisionTree::flatten(root, &grower.classes)
    }

    /// Unpruned tree over a bootstrap `sample` that looks at `k` randomly
    /// drawn features per node (more if none of them has positive gain).
    pub(crate) fn fit_random(
        columns: &ColumnIndex,
        x: &FeatureMatrix,
        labels: &[Characterization],
        sample: &[usize],
        k: usize,
        min_leaf: usize,
        rng: ChaCha8Rng,
    ) -> Self {
        let perm: Vec<usize> = (0..x.num_columns).collect();
        let choice = FeatureChoice::Random { k, rng, perm };
        let mut grower = Grower::new(columns, x, labels, min_leaf.max(1), choice);
        let root = grower.grow(sample);
        DecisionTree::flatten(root, &grower.classes)
    }

    fn flatten(root: GrowNode, classes: &[Characterization]) -> Self {
        fn walk(node: GrowNode, classes: &[Characterization], out: &mut Vec<Node>) -> usize {
            let id = out.len();
            match node {
                GrowNode::Leaf { dist } => out.push(Node::Leaf {
                    label: classes[argmax_first(&dist)],
                }),
                GrowNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    out.push(Node::Leaf { label: classes[0] });
                    let l = walk(*left, classes, out);
                    let r = walk(*right, classes, out);
                    out[id] = Node::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    };
                }
            }
            id
        }
        let mut nodes = Vec::new();
        walk(root, classes, &mut nodes);
        DecisionTree { nodes }
    }

    pub fn predict(&self, x: &SparseVec) -> Characterization {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature) <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn d(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(nodes, *left).max(d(nodes, *right)),
            }
        }
        d(&self.nodes, 0)
    }
}

/// Column-major view of a feature matrix: nonzeros of each feature by row.
pub(crate) struct ColumnIndex {
    columns: Vec<Vec<(usize, f64)>>,
}

impl ColumnIndex {
    pub(crate) fn new(x: &FeatureMatrix) -> Self {
        let mut columns = vec![Vec::new(); x.num_columns];
        for (r, row) in x.rows.iter().enumerate() {
            for (c, v) in row.iter() {
                if v != 0.0 {
                    columns[c].push((r, v));
                }
            }
        }
        ColumnIndex { columns }
    }
}

enum GrowNode {
    Leaf {
        dist: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        dist: Vec<f64>,
        left: Box<GrowNode>,
        right: Box<GrowNode>,
    },
}

enum FeatureChoice {
    All,
    Random {
        k: usize,
        rng: ChaCha8Rng,
        perm: Vec<usize>,
    },
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: SplitScore,
}

struct Grower<'a> {
    columns: &'a ColumnIndex,
    x: &'a FeatureMatrix,
    classes: Vec<Characterization>,
    class_of: Vec<usize>,
    min_leaf: usize,
    choice: FeatureChoice,
    /// Multiplicity of each row in the node being split.
    mult: Vec<f64>,
    /// Stamp per feature: set when some node row has it nonzero.
    present: Vec<u64>,
    stamp: u64,
}

impl<'a> Grower<'a> {
    fn new(
        columns: &'a ColumnIndex,
        x: &'a FeatureMatrix,
        labels: &[Characterization],
        min_leaf: usize,
        choice: FeatureChoice,
    ) -> Self {
        let classes = sorted_classes(labels);
        let class_of = labels
            .iter()
            .map(|l| classes.binary_search(l).unwrap())
            .collect();
        Grower {
            columns,
            x,
            classes,
            class_of,
            min_leaf,
            choice,
            mult: vec![0.0; labels.len()],
            present: vec![0; x.num_columns],
            stamp: 0,
        }
    }

    fn distribution(&self, sample: &[usize]) -> Vec<f64> {
        let mut dist = vec![0.0; self.classes.len()];
        for &r in sample {
            dist[self.class_of[r]] += 1.0;
        }
        dist
    }

    fn grow(&mut self, sample: &[usize]) -> GrowNode {
        let dist = self.distribution(sample);
        let n = sample.len() as f64;
        let pure = dist.iter().filter(|&&c| c > 0.0).count() <= 1;
        if pure || n < 2.0 * self.min_leaf as f64 {
            return GrowNode::Leaf { dist };
        }
        let Some(best) = self.choose_split(sample, &dist) else {
            return GrowNode::Leaf { dist };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = sample
            .iter()
            .partition(|&&r| self.x.rows[r].get(best.feature) <= best.threshold);
        let left = self.grow(&left);
        let right = self.grow(&right);
        GrowNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            dist,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn choose_split(&mut self, sample: &[usize], dist: &[f64]) -> Option<Candidate> {
        for &r in sample {
            self.mult[r] += 1.0;
        }
        self.stamp += 1;
        for &r in sample {
            for (c, v) in self.x.rows[r].iter() {
                if v != 0.0 {
                    self.present[c] = self.stamp;
                }
            }
        }
        let best = match &mut self.choice {
            FeatureChoice::All => {
                let features: Vec<usize> = (0..self.present.len())
                    .filter(|&f| self.present[f] == self.stamp)
                    .collect();
                let candidates: Vec<Candidate> = features
                    .into_iter()
                    .filter_map(|f| {
                        best_threshold(
                            self.columns,
                            &self.mult,
                            &self.class_of,
                            dist,
                            f,
                            self.min_leaf,
                        )
                    })
                    .collect();
                select_c45(candidates)
            }
            FeatureChoice::Random { k, rng, perm } => {
                let mut drawn: Vec<Candidate> = Vec::new();
                let mut window = perm.len();
                let mut budget = *k;
                let mut gain_found = false;
                while window > 0 && (budget > 0 || !gain_found) {
                    budget = budget.saturating_sub(1);
                    let pick = rng.random_range(0..window);
                    window -= 1;
                    perm.swap(pick, window);
                    let f = perm[window];
                    // a feature that is zero across the node cannot split it
                    if self.present[f] != self.stamp {
                        continue;
                    }
                    if let Some(c) = best_threshold(
                        self.columns,
                        &self.mult,
                        &self.class_of,
                        dist,
                        f,
                        self.min_leaf,
                    ) {
                        gain_found |= c.score.gain > GAIN_EPS;
                        drawn.push(c);
                    }
                }
                select_c45(drawn)
            }
        };
        for &r in sample {
            self.mult[r] = 0.0;
        }
        best
    }
}

/// Best midpoint threshold of one feature by information gain.
fn best_threshold(
    columns: &ColumnIndex,
    mult: &[f64],
    class_of: &[usize],
    dist: &[f64],
    feature: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let k = dist.len();
    let n: f64 = dist.iter().sum();
    let mut items: Vec<(f64, usize, f64)> = Vec::new();
    let mut zero = dist.to_vec();
    for &(r, v) in &columns.columns[feature] {
        let m = mult[r];
        if m > 0.0 {
            items.push((v, class_of[r], m));
            zero[class_of[r]] -= m;
        }
    }
    for (c, &w) in zero.iter().enumerate() {
        if w > 0.5 {
            items.push((0.0, c, w));
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let min_leaf = min_leaf as f64;
    let mut left = vec![0.0; k];
    let mut n_left = 0.0;
    let mut best: Option<(f64, SplitScore)> = None;
    for i in 0..items.len() - 1 {
        let (v, c, w) = items[i];
        left[c] += w;
        n_left += w;
        let next = items[i + 1].0;
        if next <= v {
            continue;
        }
        if n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let score = score_split(dist, &left);
        if best.as_ref().is_none_or(|(_, b)| score.gain > b.gain) {
            let mut threshold = v + (next - v) / 2.0;
            if threshold >= next {
                threshold = v;
            }
            best = Some((threshold, score));
        }
    }
    best.map(|(threshold, score)| Candidate {
        feature,
        threshold,
        score,
    })
}

/// Gain ratio among candidates whose gain is at least the average gain.
/// Falls back to a zero-gain split only when nothing gains.
fn select_c45(mut candidates: Vec<Candidate>) -> Option<Candidate> {
    candidates.sort_by_key(|c| c.feature);
    let gaining: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| c.score.gain > GAIN_EPS)
        .collect();
    if gaining.is_empty() {
        return select_max_ratio(candidates);
    }
    let average = gaining.iter().map(|c| c.score.gain).sum::<f64>() / gaining.len() as f64;
    let mut best: Option<&Candidate> = None;
    for c in gaining {
        if c.score.gain + GAIN_EPS < average {
            continue;
        }
        if best.is_none_or(|b| c.score.ratio > b.score.ratio) {
            best = Some(c);
        }
    }
    let feature = best.map(|b| b.feature);
    candidates.into_iter().find(|c| Some(c.feature) == feature)
}

/// Highest gain ratio, lowest feature index on ties.
fn select_max_ratio(mut candidates: Vec<Candidate>) -> Option<Candidate> {
    candidates.sort_by_key(|c| c.feature);
    let mut best: Option<Candidate> = None;
    for c in candidates {
        let better = match &best {
            None => true,
            Some(b) => {
                (c.score.gain > GAIN_EPS, c.score.ratio) > (b.score.gain > GAIN_EPS, b.score.ratio)
            }
        };
        if better {
            best = Some(c);
        }
    }
    best
}

/// Upper-confidence-bound error count added to `e` observed errors out of
/// `n`, as used by C4.5 pessimistic pruning.
pub(crate) fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = normal_quantile(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn leaf_estimate(dist: &[f64], cf: f64) -> f64 {
    let n: f64 = dist.iter().sum();
    let e = n - dist.iter().cloned().fold(0.0, f64::max);
    e + added_errors(n, e, cf)
}

/// Bottom-up subtree replacement; returns the estimated errors of `node`.
fn prune(node: &mut GrowNode, cf: f64) -> f64 {
    let (subtree, dist) = match node {
        GrowNode::Leaf { dist } => return leaf_estimate(dist, cf),
        GrowNode::Split {
            left, right, dist, ..
        } => (prune(left, cf) + prune(right, cf), dist.clone()),
    };
    let as_leaf = leaf_estimate(&dist, cf);
    if as_leaf <= subtree + 0.1 {
        *node = GrowNode::Leaf { dist };
        as_leaf
    } else {
        subtree
    }
}
