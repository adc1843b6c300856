//! Heat-kernel affinity graphs over Grassmann points or plain vectors.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};

/// Symmetric similarity matrix `W` with its degrees `dᵢ = Σⱼ wᵢⱼ` and
/// Laplacian `L = diag(d) − W`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
    laplacian: DMatrix<f64>,
}

impl AffinityGraph {
    /// Builds a graph from a symmetric nonnegative weight matrix.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::Dimension(format!(
                "weight matrix must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::Parameter(format!("weight ({i}, {j}) = {w} is not a finite nonnegative value")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::Parameter(format!("weights not symmetric at ({i}, {j})")));
                }
            }
        }
        let degrees = DVector::from_iterator(n, weights.row_iter().map(|r| r.iter().sum()));
        let mut laplacian = -weights.clone();
        for i in 0..n {
            laplacian[(i, i)] += degrees[i];
        }
        Ok(AffinityGraph {
            weights,
            degrees,
            laplacian,
        })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The same graph with the diagonal of `W` cleared. The Laplacian is
    /// unchanged; the degrees drop by the removed self-weights.
    pub fn without_self_loops(mut self) -> Self {
        for i in 0..self.len() {
            self.weights[(i, i)] = 0.0;
        }
        AffinityGraph::from_weights(self.weights).expect("still symmetric and nonnegative")
    }
}

/// Dense heat-kernel graph `wᵢⱼ = exp(−dist²(Xᵢ, Xⱼ) / heat)` using the
/// embedding distance, optionally sparsified to the k-nearest-neighbour
/// union (an edge survives if either endpoint selects the other).
pub fn build_grassmann_graph(
    points: &[GrassmannPoint],
    heat: f64,
    knn: Option<usize>,
) -> Result<AffinityGraph> {
    let n = points.len();
    check_common(n, heat, knn)?;
    grassmann::common_dims(points)?;
    let dist = grassmann::pairwise_distances(points)?;
    heat_kernel(&dist, heat, knn)
}

/// Heat-kernel graph over the columns of `data` (`D×N`, one sample per
/// column) restricted to the k-nearest-neighbour union.
pub fn build_vector_graph(data: &DMatrix<f64>, heat: f64, knn: usize) -> Result<AffinityGraph> {
    let n = data.ncols();
    check_common(n, heat, Some(knn))?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("data has non-finite entries".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| (data.column(i) - data.column(j)).norm_squared())
                .collect()
        })
        .collect();
    let dist = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    heat_kernel(&dist, heat, Some(knn))
}

fn check_common(n: usize, heat: f64, knn: Option<usize>) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!("a graph needs at least 2 points, got {n}")));
    }
    if !(heat > 0.0 && heat.is_finite()) {
        return Err(Error::Parameter(format!("heat must be positive, got {heat}")));
    }
    if let Some(k) = knn {
        if k == 0 || k >= n {
            return Err(Error::Parameter(format!(
                "knn must satisfy 1 <= k < N = {n}, got {k}"
            )));
        }
    }
    Ok(())
}

fn heat_kernel(dist: &DMatrix<f64>, heat: f64, knn: Option<usize>) -> Result<AffinityGraph> {
    let n = dist.nrows();
    let mut weights = dist.map(|d| (-d / heat).exp());
    if let Some(k) = knn {
        let mut keep = DMatrix::from_element(n, n, false);
        for i in 0..n {
            keep[(i, i)] = true;
            for j in nearest_neighbors(dist, i, k) {
                keep[(i, j)] = true;
                keep[(j, i)] = true;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !keep[(i, j)] {
                    weights[(i, j)] = 0.0;
                }
            }
        }
    }
    // The distance matrix is symmetric already; enforce it bitwise.
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weights[(i, j)].max(weights[(j, i)]);
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    AffinityGraph::from_weights(weights)
}

/// Indices of the `k` points closest to `i` (excluding `i`), ties broken by
/// lower index.
pub(crate) fn nearest_neighbors(dist: &DMatrix<f64>, i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..dist.nrows()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
    others.truncate(k);
    others
}
