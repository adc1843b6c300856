//! Classification and clustering scores.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::graph::nearest_neighbors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Clustering,
    Embedding,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::Clustering => "clustering",
            Task::Embedding => "embedding",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub n_samples: usize,
    /// Absent for pure embedding diagnostics, which have no labels to score.
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub knn_preservation: Option<f64>,
    /// Extra provenance, echoed verbatim (e.g. tolerance overrides).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl EvalReport {
    pub fn new(task: Task, n_samples: usize) -> Self {
        EvalReport {
            task,
            n_samples,
            acc: None,
            nmi: None,
            knn_preservation: None,
            provenance: BTreeMap::new(),
        }
    }

    /// One-line `key=value` record.
    pub fn to_line(&self) -> String {
        let mut parts = vec![format!("task={}", self.task), format!("n_samples={}", self.n_samples)];
        for (key, value) in [
            ("acc", self.acc),
            ("nmi", self.nmi),
            ("knn_preservation", self.knn_preservation),
        ] {
            if let Some(v) = value {
                parts.push(format!("{key}={v:.6}"));
            }
        }
        for (k, v) in &self.provenance {
            parts.push(format!("{k}={v}"));
        }
        parts.join(" ")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Parameter("cannot score an empty labelling".into()));
    }
    Ok(())
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Dense contingency table `counts[pred][truth]` over relabelled ids.
fn contingency(predicted: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let index = |labels: &[usize]| -> BTreeMap<usize, usize> {
        let mut ids = BTreeMap::new();
        for &l in labels {
            let next = ids.len();
            ids.entry(l).or_insert(next);
        }
        ids
    };
    let pred_ids = index(predicted);
    let truth_ids = index(truth);
    let mut table = vec![vec![0usize; truth_ids.len()]; pred_ids.len()];
    for (p, t) in predicted.iter().zip(truth) {
        table[pred_ids[p]][truth_ids[t]] += 1;
    }
    table
}

/// Accuracy under the best one-to-one matching of cluster ids to labels.
pub fn clustering_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let table = contingency(predicted, truth);
    let size = table.len().max(table[0].len());
    // Maximizing matched counts is minimizing (max_count − count).
    let max_count = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    let mut cost = vec![vec![max_count; size]; size];
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            cost[i][j] = max_count - c as i64;
        }
    }
    let assignment = min_cost_assignment(&cost);
    let matched: usize = assignment
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < table.len() && j < table[0].len())
        .map(|(i, &j)| table[i][j])
        .sum();
    Ok(matched as f64 / truth.len() as f64)
}

/// Hungarian method (shortest augmenting paths with potentials) on a square
/// cost matrix. Returns the column assigned to each row.
pub(crate) fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual root of each augmenting path.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col = 0usize;
        let mut min_to = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col] = true;
            let r = owner[col];
            let mut delta = i64::MAX;
            let mut next = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost[r - 1][c - 1] - u[r] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    way[c] = col;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col = next;
            if owner[col] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col];
            owner[col] = owner[prev];
            col = prev;
            if col == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for c in 1..=n {
        if owner[c] > 0 {
            assignment[owner[c] - 1] = c - 1;
        }
    }
    assignment
}

/// Normalized mutual information `2·I(P;T) / (H(P) + H(T))`, natural logs.
/// Two single-cluster partitions score 1.
pub fn nmi(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let table = contingency(predicted, truth);
    let n = truth.len() as f64;
    let row: Vec<f64> = table.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let col: Vec<f64> = (0..table[0].len())
        .map(|j| table.iter().map(|r| r[j]).sum::<usize>() as f64)
        .collect();
    let entropy = |margin: &[f64]| -> f64 {
        margin
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let q = c / n;
                -q * q.ln()
            })
            .sum()
    };
    let h_pred = entropy(&row);
    let h_truth = entropy(&col);
    if h_pred + h_truth == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (row[i] * col[j])).ln();
            }
        }
    }
    Ok((2.0 * mi / (h_pred + h_truth)).clamp(0.0, 1.0))
}

/// Mean overlap `|kNN_before(i) ∩ kNN_after(i)| / k`, neighbours by embedding
/// distance with ties resolved by index.
pub fn knn_preservation(original: &[GrassmannPoint], reduced: &[GrassmannPoint], k: usize) -> Result<f64> {
    if original.len() != reduced.len() {
        return Err(Error::LengthMismatch {
            left: original.len(),
            right: reduced.len(),
        });
    }
    let n = original.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("k must satisfy 1 <= k < N = {n}, got {k}")));
    }
    let before = grassmann::pairwise_distances(original)?;
    let after = grassmann::pairwise_distances(reduced)?;
    let mut total = 0.0;
    for i in 0..n {
        let a = nearest_neighbors(&before, i, k);
        let b = nearest_neighbors(&after, i, k);
        let shared = a.iter().filter(|j| b.contains(j)).count();
        total += shared as f64 / k as f64;
    }
    Ok(total / n as f64)
}
