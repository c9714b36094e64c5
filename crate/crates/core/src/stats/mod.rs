//! Friedman rank test and Conover post-hoc comparisons over a score matrix
//! (classes as blocks, classifiers as treatments).

pub mod special;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::evaluation::ScoreMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} {what}, got {got}")]
    TooSmall {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDf(f64),
    #[error("statistic is not finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", content = "df", rename_all = "snake_case")]
pub enum Distribution {
    ChiSquared(f64),
    StudentT(f64),
}

/// Upper tail for chi-squared, two-sided tail for Student's t.
pub fn tail_probability(statistic: f64, distribution: Distribution) -> Result<f64, StatsError> {
    if !statistic.is_finite() {
        return Err(StatsError::NonFinite);
    }
    match distribution {
        Distribution::ChiSquared(df) | Distribution::StudentT(df)
            if !(df > 0.0 && df.is_finite()) =>
        {
            Err(StatsError::InvalidDf(df))
        }
        Distribution::ChiSquared(df) => Ok(special::chi_square_sf(statistic, df)),
        Distribution::StudentT(df) => Ok(special::student_t_two_sided(statistic, df)),
    }
}

/// Ranks 1..n with larger values ranked higher; ties share their average.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub classifier_names: Vec<String>,
    pub num_blocks: usize,
    pub chi_squared: f64,
    pub df: usize,
    pub p_value: f64,
    pub rank_sums: Vec<f64>,
    /// `1 − Σ(t³ − t) / (n·k·(k² − 1))` over all tie groups.
    pub tie_correction: f64,
}

struct RankTable {
    n: usize,
    k: usize,
    rank_sums: Vec<f64>,
    /// Sum of squared ranks over the whole table.
    a1: f64,
    /// `n·k·(k + 1)² / 4`.
    c1: f64,
    tie_term: f64,
}

fn rank_table(scores: &ScoreMatrix) -> Result<RankTable, StatsError> {
    let n = scores.num_classes();
    let k = scores.num_classifiers();
    if n < 2 {
        return Err(StatsError::TooSmall {
            what: "blocks (classes)",
            needed: 2,
            got: n,
        });
    }
    if k < 2 {
        return Err(StatsError::TooSmall {
            what: "classifiers",
            needed: 2,
            got: k,
        });
    }
    let mut rank_sums = vec![0.0; k];
    let mut a1 = 0.0;
    let mut tie_term = 0.0;
    for row in &scores.values {
        let r = average_ranks(row);
        for (j, v) in r.iter().enumerate() {
            rank_sums[j] += v;
            a1 += v * v;
        }
        let mut sorted = row.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let c1 = nf * kf * (kf + 1.0).powi(2) / 4.0;
    Ok(RankTable {
        n,
        k,
        rank_sums,
        a1,
        c1,
        tie_term,
    })
}

/// Tie-corrected Friedman statistic `(k − 1)(ΣR² − n·C1) / (A1 − C1)`.
pub fn friedman(scores: &ScoreMatrix) -> Result<FriedmanResult, StatsError> {
    let t = rank_table(scores)?;
    let (nf, kf) = (t.n as f64, t.k as f64);
    let sum_r2: f64 = t.rank_sums.iter().map(|r| r * r).sum();
    let denom = t.a1 - t.c1;
    let chi_squared = if denom <= 1e-12 {
        0.0
    } else {
        ((kf - 1.0) * (sum_r2 - nf * t.c1) / denom).max(0.0)
    };
    let df = t.k - 1;
    let p_value = tail_probability(chi_squared, Distribution::ChiSquared(df as f64))?;
    Ok(FriedmanResult {
        classifier_names: scores.classifier_names.clone(),
        num_blocks: t.n,
        chi_squared,
        df,
        p_value,
        rank_sums: t.rank_sums,
        tie_correction: 1.0 - t.tie_term / (nf * kf * (kf * kf - 1.0)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjustment {
    #[default]
    None,
    Holm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwisePValues {
    pub classifier_names: Vec<String>,
    /// Symmetric, 1 on the diagonal.
    pub p: Vec<Vec<f64>>,
    pub method: String,
    pub adjustment: Adjustment,
    pub df: usize,
}

impl PairwisePValues {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.classifier_names.iter().position(|n| n == a)?;
        let j = self.classifier_names.iter().position(|n| n == b)?;
        Some(self.p[i][j])
    }
}

/// Conover's pairwise test on Friedman rank sums:
/// `t = |R_i − R_j| / sqrt(2(n·A1 − ΣR²) / ((n − 1)(k − 1)))`, two-sided,
/// with `(n − 1)(k − 1)` degrees of freedom.
pub fn conover(
    scores: &ScoreMatrix,
    adjustment: Adjustment,
) -> Result<PairwisePValues, StatsError> {
    let t = rank_table(scores)?;
    let (nf, kf) = (t.n as f64, t.k as f64);
    let sum_r2: f64 = t.rank_sums.iter().map(|r| r * r).sum();
    let df = (t.n - 1) * (t.k - 1);
    let se = (2.0 * (nf * t.a1 - sum_r2).max(0.0) / ((nf - 1.0) * (kf - 1.0))).sqrt();
    let mut p = vec![vec![1.0; t.k]; t.k];
    for i in 0..t.k {
        for j in i + 1..t.k {
            let diff = (t.rank_sums[i] - t.rank_sums[j]).abs();
            let value = if diff == 0.0 {
                1.0
            } else if se == 0.0 {
                0.0
            } else {
                tail_probability(diff / se, Distribution::StudentT(df as f64))?
            };
            p[i][j] = value.min(1.0);
            p[j][i] = p[i][j];
        }
    }
    if adjustment == Adjustment::Holm {
        holm(&mut p);
    }
    Ok(PairwisePValues {
        classifier_names: scores.classifier_names.clone(),
        p,
        method: "conover-friedman".to_string(),
        adjustment,
        df,
    })
}

fn holm(p: &mut [Vec<f64>]) {
    let k = p.len();
    let mut pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    pairs.sort_by(|a, b| p[a.0][a.1].total_cmp(&p[b.0][b.1]).then(a.cmp(b)));
    let m = pairs.len();
    let mut running: f64 = 0.0;
    for (rank, &(i, j)) in pairs.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i][j]).min(1.0));
        p[i][j] = running;
        p[j][i] = running;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub friedman: FriedmanResult,
    pub conover: PairwisePValues,
}

impl StatsReport {
    pub fn compute(scores: &ScoreMatrix, adjustment: Adjustment) -> Result<Self, StatsError> {
        Ok(StatsReport {
            friedman: friedman(scores)?,
            conover: conover(scores, adjustment)?,
        })
    }

    pub fn to_markdown(&self) -> String {
        let f = &self.friedman;
        let mut s = String::new();
        let _ = writeln!(s, "## Friedman test\n");
        let _ = writeln!(s, "| Friedman's Chi-Squared | df | p-value |");
        let _ = writeln!(s, "|---|---|---|");
        let _ = writeln!(
            s,
            "| {:.5} | {} | {:.5} |\n",
            f.chi_squared, f.df, f.p_value
        );
        let _ = writeln!(s, "| Classifier | Rank sum |");
        let _ = writeln!(s, "|---|---|");
        for (name, r) in f.classifier_names.iter().zip(&f.rank_sums) {
            let _ = writeln!(s, "| {name} | {r} |");
        }
        let c = &self.conover;
        let adj = match c.adjustment {
            Adjustment::None => "unadjusted",
            Adjustment::Holm => "Holm-adjusted",
        };
        let _ = writeln!(s, "\n## Conover post-hoc p-values ({adj}, df {})\n", c.df);
        let _ = writeln!(
            s,
            "| | {} |",
            c.classifier_names[..c.classifier_names.len() - 1].join(" | ")
        );
        let _ = writeln!(s, "|---|{}", "---|".repeat(c.classifier_names.len() - 1));
        for i in 1..c.classifier_names.len() {
            let cells: Vec<String> = (0..c.classifier_names.len() - 1)
                .map(|j| {
                    if j < i {
                        format!("{:.6}", c.p[i][j])
                    } else {
                        "-".to_string()
                    }
                })
                .collect();
            let _ = writeln!(s, "| {} | {} |", c.classifier_names[i], cells.join(" | "));
        }
        s
    }
}
