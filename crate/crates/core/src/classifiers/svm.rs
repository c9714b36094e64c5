//! Linear SVM trained by sequential minimal optimization, one binary machine
//! per class pair.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_first, sorted_classes, ClassifierError, SvmParams};
use crate::corpus::Characterization;
use crate::rng::{stream, Purpose};
use crate::textprep::{FeatureMatrix, SparseVec};

/// Alphas this close to a bound are snapped onto it.
const BOUND_SNAP: f64 = 1e-8;

fn sparse_dot(a: &SparseVec, b: &SparseVec) -> f64 {
    let (a, b) = (a.entries(), b.entries());
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// Per-column min-max scaling to [0, 1] with ranges taken from training
/// rows; values outside the range are clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalerRepr", into = "ScalerRepr")]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
    /// Columns where an absent (zero) value does not scale to zero.
    offset_columns: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ScalerRepr {
    num_columns: usize,
    /// `(column, min, max)` for every column whose range is not `[0, 0]`.
    ranges: Vec<(usize, f64, f64)>,
}

impl From<MinMaxScaler> for ScalerRepr {
    fn from(s: MinMaxScaler) -> Self {
        let ranges = (0..s.min.len())
            .filter(|&j| s.min[j] != 0.0 || s.max[j] != 0.0)
            .map(|j| (j, s.min[j], s.max[j]))
            .collect();
        ScalerRepr {
            num_columns: s.min.len(),
            ranges,
        }
    }
}

impl TryFrom<ScalerRepr> for MinMaxScaler {
    type Error = String;

    fn try_from(r: ScalerRepr) -> Result<Self, Self::Error> {
        let mut min = vec![0.0; r.num_columns];
        let mut max = vec![0.0; r.num_columns];
        for (j, lo, hi) in r.ranges {
            if j >= r.num_columns || !(lo <= hi) {
                return Err(format!("bad scaler range for column {j}"));
            }
            min[j] = lo;
            max[j] = hi;
        }
        Ok(MinMaxScaler::from_ranges(min, max))
    }
}

impl MinMaxScaler {
    fn from_ranges(min: Vec<f64>, max: Vec<f64>) -> Self {
        let mut s = MinMaxScaler {
            min,
            max,
            offset_columns: Vec::new(),
        };
        s.offset_columns = (0..s.min.len())
            .filter(|&j| s.scale(j, 0.0) != 0.0)
            .collect();
        s
    }

    pub fn fit(x: &FeatureMatrix) -> Self {
        let n = x.num_columns;
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        let mut seen = vec![0usize; n];
        for row in &x.rows {
            for (j, v) in row.iter() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
                seen[j] += 1;
            }
        }
        for j in 0..n {
            // rows without the column hold an implicit zero
            if seen[j] < x.rows.len() {
                min[j] = min[j].min(0.0);
                max[j] = max[j].max(0.0);
            }
        }
        MinMaxScaler::from_ranges(min, max)
    }

    pub fn num_columns(&self) -> usize {
        self.min.len()
    }

    fn scale(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range > 0.0 {
            ((v - self.min[j]) / range).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn transform(&self, x: &SparseVec) -> SparseVec {
        let mut pairs: Vec<(usize, f64)> = x.iter().map(|(j, v)| (j, self.scale(j, v))).collect();
        for &j in &self.offset_columns {
            if x.get(j) == 0.0 && x.entries().binary_search_by_key(&j, |e| e.0).is_err() {
                pairs.push((j, self.scale(j, 0.0)));
            }
        }
        SparseVec::from_pairs(pairs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    /// Offset in `f(x) = w·x + bias`.
    pub bias: f64,
    /// Dual objective `Σα − ½ΣΣ αᵢαⱼyᵢyⱼ⟨xᵢ,xⱼ⟩` at the solution.
    pub objective: f64,
    pub pair_updates: usize,
}

impl SmoSolution {
    /// `w = Σ αᵢ yᵢ xᵢ` over `num_columns` columns.
    pub fn weights(&self, x: &[SparseVec], y: &[f64], num_columns: usize) -> SparseVec {
        let mut w = vec![0.0; num_columns];
        for ((row, &yi), &a) in x.iter().zip(y).zip(&self.alphas) {
            if a != 0.0 {
                for (j, v) in row.iter() {
                    w[j] += a * yi * v;
                }
            }
        }
        SparseVec::from_dense(&w)
    }
}

fn gram(x: &[SparseVec]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = sparse_dot(&x[i], &x[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

fn dual_objective(k: &[Vec<f64>], y: &[f64], alphas: &[f64]) -> f64 {
    let mut quad = 0.0;
    for i in 0..alphas.len() {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..alphas.len() {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * k[i][j];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

fn max_violation(k: &[Vec<f64>], y: &[f64], alphas: &[f64], bias: f64, c: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..alphas.len() {
        let f: f64 = bias
            + (0..alphas.len())
                .map(|j| alphas[j] * y[j] * k[i][j])
                .sum::<f64>();
        let r = y[i] * f - 1.0;
        let v = if alphas[i] <= BOUND_SNAP {
            (-r).max(0.0)
        } else if alphas[i] >= c - BOUND_SNAP {
            r.max(0.0)
        } else {
            r.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Largest violation of the soft-margin KKT conditions by `(alphas, bias)`.
pub fn kkt_max_violation(x: &[SparseVec], y: &[f64], alphas: &[f64], bias: f64, c: f64) -> f64 {
    max_violation(&gram(x), y, alphas, bias, c)
}

struct Smo<'a> {
    k: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
    tol: f64,
    eps: f64,
    alphas: Vec<f64>,
    /// Threshold in the `u = Σαyk − b` convention.
    b: f64,
    /// `u_i − y_i` for every example.
    errors: Vec<f64>,
    rng: ChaCha8Rng,
    updates: usize,
}

impl Smo<'_> {
    fn non_bound(&self, i: usize) -> bool {
        self.alphas[i] > 0.0 && self.alphas[i] < self.c
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (alph1, alph2) = (self.alphas[i1], self.alphas[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let c = self.c;
        let (lo, hi) = if y1 != y2 {
            ((alph2 - alph1).max(0.0), (c + alph2 - alph1).min(c))
        } else {
            ((alph1 + alph2 - c).max(0.0), (alph1 + alph2).min(c))
        };
        if lo >= hi {
            return false;
        }
        let (k11, k12, k22) = (self.k[i1][i1], self.k[i1][i2], self.k[i2][i2]);
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // objective at both ends of the segment
            let f1 = y1 * (e1 + self.b) - alph1 * k11 - s * alph2 * k12;
            let f2 = y2 * (e2 + self.b) - s * alph1 * k12 - alph2 * k22;
            let l1 = alph1 + s * (alph2 - lo);
            let h1 = alph1 + s * (alph2 - hi);
            let lobj =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            let hobj =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if lobj < hobj - self.eps {
                lo
            } else if lobj > hobj + self.eps {
                hi
            } else {
                alph2
            }
        };
        if a2 < BOUND_SNAP {
            a2 = 0.0;
        } else if a2 > c - BOUND_SNAP {
            a2 = c;
        }
        if (a2 - alph2).abs() < self.eps * (a2 + alph2 + self.eps) {
            return false;
        }
        let mut a1 = alph1 + s * (alph2 - a2);
        if a1 < BOUND_SNAP {
            a1 = 0.0;
        } else if a1 > c - BOUND_SNAP {
            a1 = c;
        }

        let t1 = y1 * (a1 - alph1);
        let t2 = y2 * (a2 - alph2);
        let b1 = e1 + t1 * k11 + t2 * k12 + self.b;
        let b2 = e2 + t1 * k12 + t2 * k22 + self.b;
        let b_new = if a1 > 0.0 && a1 < c {
            b1
        } else if a2 > 0.0 && a2 < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.b;
        for i in 0..self.errors.len() {
            self.errors[i] += t1 * self.k[i1][i] + t2 * self.k[i2][i] - db;
        }
        self.b = b_new;
        self.alphas[i1] = a1;
        self.alphas[i2] = a2;
        self.updates += 1;
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        let n = self.alphas.len();
        let alph2 = self.alphas[i2];
        let r2 = self.errors[i2] * self.y[i2];
        if !((r2 < -self.tol && alph2 < self.c) || (r2 > self.tol && alph2 > 0.0)) {
            return false;
        }
        let non_bound: Vec<usize> = (0..n).filter(|&i| self.non_bound(i)).collect();
        if non_bound.len() > 1 {
            let e2 = self.errors[i2];
            let mut i1 = non_bound[0];
            for &i in &non_bound[1..] {
                if (self.errors[i] - e2).abs() > (self.errors[i1] - e2).abs() {
                    i1 = i;
                }
            }
            if self.take_step(i1, i2) {
                return true;
            }
        }
        if !non_bound.is_empty() {
            let start = self.rng.random_range(0..non_bound.len());
            for off in 0..non_bound.len() {
                if self.take_step(non_bound[(start + off) % non_bound.len()], i2) {
                    return true;
                }
            }
        }
        let start = self.rng.random_range(0..n);
        for off in 0..n {
            if self.take_step((start + off) % n, i2) {
                return true;
            }
        }
        false
    }

    /// Once the heuristic loop stalls, checks the two-threshold optimality
    /// condition `b_low <= b_up + 2 tol` on `F = u − y + b`. Returns the
    /// maximal violating pair, or settles `b` midway and returns `None`.
    fn worst_pair(&mut self) -> Option<(usize, usize)> {
        let (mut b_up, mut i_up) = (f64::INFINITY, usize::MAX);
        let (mut b_low, mut i_low) = (f64::NEG_INFINITY, usize::MAX);
        for i in 0..self.alphas.len() {
            let f = self.errors[i] + self.b;
            let (a, pos) = (self.alphas[i], self.y[i] > 0.0);
            let up = (pos && a < self.c) || (!pos && a > 0.0);
            let low = (pos && a > 0.0) || (!pos && a < self.c);
            if up && f < b_up {
                (b_up, i_up) = (f, i);
            }
            if low && f > b_low {
                (b_low, i_low) = (f, i);
            }
        }
        if i_up == usize::MAX || i_low == usize::MAX {
            return None;
        }
        if b_low > b_up + 2.0 * self.tol {
            return Some((i_low, i_up));
        }
        let b = 0.5 * (b_low + b_up);
        let db = b - self.b;
        for e in &mut self.errors {
            *e -= db;
        }
        self.b = b;
        None
    }

    fn run(&mut self, max_updates: usize) -> Result<(), ClassifierError> {
        let n = self.alphas.len();
        let mut examine_all = true;
        loop {
            let mut changed = 0;
            for i in 0..n {
                if examine_all || self.non_bound(i) {
                    changed += usize::from(self.examine(i));
                    if self.updates > max_updates {
                        return Err(ClassifierError::NonConvergence {
                            pair_updates: self.updates,
                            max_violation: max_violation(
                                self.k,
                                self.y,
                                &self.alphas,
                                -self.b,
                                self.c,
                            ),
                        });
                    }
                }
            }
            if examine_all {
                if changed == 0 {
                    match self.worst_pair() {
                        Some((i_low, i_up)) if self.take_step(i_low, i_up) => continue,
                        _ => return Ok(()),
                    }
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
    }
}

fn solve_gram(
    k: &[Vec<f64>],
    y: &[f64],
    params: &SvmParams,
    rng: ChaCha8Rng,
) -> Result<SmoSolution, ClassifierError> {
    let mut smo = Smo {
        k,
        y,
        c: params.c,
        tol: params.tolerance,
        eps: params.epsilon,
        alphas: vec![0.0; y.len()],
        b: 0.0,
        errors: y.iter().map(|&yi| -yi).collect(),
        rng,
        updates: 0,
    };
    smo.run(params.max_pair_updates)?;
    let objective = dual_objective(k, y, &smo.alphas);
    Ok(SmoSolution {
        alphas: smo.alphas,
        bias: -smo.b,
        objective,
        pair_updates: smo.updates,
    })
}

/// Solves the soft-margin dual for rows `x` with labels `y` in {−1, +1}
/// under a linear kernel. Rows are used as given (no scaling).
pub fn smo_solve(
    x: &[SparseVec],
    y: &[f64],
    params: &SvmParams,
    seed: u64,
) -> Result<SmoSolution, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::DimensionMismatch(format!(
            "{} rows, {} labels",
            x.len(),
            y.len()
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(ClassifierError::InvalidParams(
            "SMO labels must be -1 or +1".into(),
        ));
    }
    solve_gram(&gram(x), y, params, stream(seed, Purpose::SmoScan, 0))
}

/// Separates `positive` (f ≥ 0) from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub positive: Characterization,
    pub negative: Characterization,
    pub weights: SparseVec,
    pub bias: f64,
}

impl BinaryMachine {
    /// `w·x + b` for an already scaled `x`.
    pub fn decision(&self, x: &SparseVec) -> f64 {
        sparse_dot(&self.weights, x) + self.bias
    }

    pub fn vote(&self, x: &SparseVec) -> Characterization {
        if self.decision(x) >= 0.0 {
            self.positive
        } else {
            self.negative
        }
    }
}

fn tally(
    machines: &[BinaryMachine],
    classes: &[Characterization],
    x: &SparseVec,
) -> Result<Vec<f64>, ClassifierError> {
    let k = classes.len();
    let mut seen = vec![vec![false; k]; k];
    let mut votes = vec![0.0; k];
    for m in machines {
        let (Ok(a), Ok(b)) = (
            classes.binary_search(&m.positive),
            classes.binary_search(&m.negative),
        ) else {
            continue;
        };
        seen[a][b] = true;
        seen[b][a] = true;
        let winner = if m.vote(x) == m.positive { a } else { b };
        votes[winner] += 1.0;
    }
    for a in 0..k {
        for b in a + 1..k {
            if !seen[a][b] {
                return Err(ClassifierError::MissingMachine(classes[a], classes[b]));
            }
        }
    }
    Ok(votes)
}

/// One vote per machine; most votes wins, lowest index on ties.
pub fn pairwise_predict(
    machines: &[BinaryMachine],
    classes: &[Characterization],
    x: &SparseVec,
) -> Result<Characterization, ClassifierError> {
    let mut classes = classes.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let votes = tally(machines, &classes, x)?;
    Ok(classes[argmax_first(&votes)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<Characterization>,
    pub scaler: MinMaxScaler,
    pub machines: Vec<BinaryMachine>,
}

impl SvmModel {
    /// Scales `x` and trains one machine per class pair. A single-class
    /// input gives a model without machines that always predicts it.
    pub fn fit(
        params: &SvmParams,
        x: &FeatureMatrix,
        labels: &[Characterization],
        seed: u64,
    ) -> Result<Self, ClassifierError> {
        let classes = sorted_classes(labels);
        let scaler = MinMaxScaler::fit(x);
        let rows: Vec<SparseVec> = x.rows.iter().map(|r| scaler.transform(r)).collect();
        let mut pairs = Vec::new();
        for a in 0..classes.len() {
            for b in a + 1..classes.len() {
                pairs.push((classes[a], classes[b]));
            }
        }
        let machines = pairs
            .par_iter()
            .enumerate()
            .map(|(m, &(pos, neg))| {
                let idx: Vec<usize> = (0..labels.len())
                    .filter(|&i| labels[i] == pos || labels[i] == neg)
                    .collect();
                let sub: Vec<SparseVec> = idx.iter().map(|&i| rows[i].clone()).collect();
                let y: Vec<f64> = idx
                    .iter()
                    .map(|&i| if labels[i] == pos { 1.0 } else { -1.0 })
                    .collect();
                let sol = solve_gram(
                    &gram(&sub),
                    &y,
                    params,
                    stream(seed, Purpose::SmoScan, m as u64),
                )?;
                let weights = sol.weights(&sub, &y, x.num_columns);
                Ok(BinaryMachine {
                    positive: pos,
                    negative: neg,
                    weights,
                    bias: sol.bias,
                })
            })
            .collect::<Result<Vec<_>, ClassifierError>>()?;
        Ok(SvmModel {
            classes,
            scaler,
            machines,
        })
    }

    pub fn votes(
        &self,
        x: &SparseVec,
        class_list: &[Characterization],
    ) -> Result<Vec<f64>, ClassifierError> {
        let scaled = self.scaler.transform(x);
        let own = tally(&self.machines, &self.classes, &scaled)?;
        Ok(class_list
            .iter()
            .map(|c| self.classes.binary_search(c).map_or(0.0, |i| own[i]))
            .collect())
    }

    pub fn predict(&self, x: &SparseVec) -> Result<Characterization, ClassifierError> {
        let scaled = self.scaler.transform(x);
        let votes = tally(&self.machines, &self.classes, &scaled)?;
        Ok(self.classes[argmax_first(&votes)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Characterization::{Memory, Read, Write};

    fn rows(v: &[&[f64]]) -> Vec<SparseVec> {
        v.iter().map(|r| SparseVec::from_dense(r)).collect()
    }

    #[test]
    fn two_point_analytic_solution() {
        let x = rows(&[&[0.0], &[2.0]]);
        let y = [-1.0, 1.0];
        let sol = smo_solve(&x, &y, &SvmParams::default(), 123).unwrap();
        assert!((sol.alphas[0] - 0.5).abs() < 1e-12 && (sol.alphas[1] - 0.5).abs() < 1e-12);
        let w = sol.weights(&x, &y, 1);
        assert!((w.get(0) - 1.0).abs() < 1e-12);
        assert!((sol.bias + 1.0).abs() < 1e-12);
        let m = BinaryMachine {
            positive: Read,
            negative: Write,
            weights: w,
            bias: sol.bias,
        };
        assert!(m.decision(&SparseVec::from_dense(&[1.0])).abs() < 1e-12);
        assert_eq!(m.vote(&SparseVec::from_dense(&[3.0])), Read);
        assert!(kkt_max_violation(&x, &y, &sol.alphas, sol.bias, 0.5) < 1e-9);
    }

    fn machine(pos: Characterization, neg: Characterization, bias: f64) -> BinaryMachine {
        BinaryMachine {
            positive: pos,
            negative: neg,
            weights: SparseVec::new(),
            bias,
        }
    }

    #[test]
    fn pairwise_votes_and_ties() {
        let x = SparseVec::new();
        // Write(9) < Read(10) < Memory(14) by index
        let clear = [
            machine(Write, Read, 1.0),
            machine(Write, Memory, 1.0),
            machine(Read, Memory, 1.0),
        ];
        assert_eq!(
            pairwise_predict(&clear, &[Write, Read, Memory], &x).unwrap(),
            Write
        );
        let cycle = [
            machine(Write, Read, 1.0),
            machine(Read, Memory, 1.0),
            machine(Write, Memory, -1.0),
        ];
        assert_eq!(
            pairwise_predict(&cycle, &[Memory, Read, Write], &x).unwrap(),
            Write
        );
        assert_eq!(
            pairwise_predict(&[machine(Write, Read, -1.0)], &[Write, Read], &x).unwrap(),
            Read
        );
        assert!(matches!(
            pairwise_predict(&clear[..2], &[Write, Read, Memory], &x),
            Err(ClassifierError::MissingMachine(Read, Memory))
        ));
    }

    #[test]
    fn scaler_clamps_and_roundtrips() {
        let m = FeatureMatrix {
            rows: rows(&[&[1.0, 0.0, -1.0], &[3.0, 0.0, 1.0]]),
            num_columns: 3,
            row_labels: None,
        };
        let s = MinMaxScaler::fit(&m);
        let t = s.transform(&SparseVec::from_dense(&[2.0, 5.0, 0.0]));
        assert_eq!(t.get(0), 0.5);
        assert_eq!(t.get(1), 0.0);
        assert_eq!(t.get(2), 0.5);
        assert_eq!(
            s.transform(&SparseVec::from_dense(&[9.0, 0.0, -9.0]))
                .get(0),
            1.0
        );
        let back: MinMaxScaler = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn model_separates_three_classes() {
        let x = FeatureMatrix {
            rows: rows(&[
                &[1.0, 0.0],
                &[0.9, 0.1],
                &[0.0, 1.0],
                &[0.1, 0.8],
                &[0.0, 0.0],
                &[0.05, 0.05],
            ]),
            num_columns: 2,
            row_labels: None,
        };
        let y = [Read, Read, Write, Write, Memory, Memory];
        let params = SvmParams {
            c: 100.0,
            ..SvmParams::default()
        };
        let model = SvmModel::fit(&params, &x, &y, 123).unwrap();
        assert_eq!(model.machines.len(), 3);
        for (row, label) in x.rows.iter().zip(&y) {
            assert_eq!(model.predict(row).unwrap(), *label);
        }
    }
}
