//! Per-iteration quantities of the GLPP objective: QR normalization of the
//! training points, the pairwise difference matrices `G_ij`, the constraint
//! matrix `H`, the surrogate matrix `J`, and the objective itself.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::graph::AffinityGraph;
use crate::linalg;
use crate::tolerance::Tolerances;

/// Rows of the pair loop handled by one task when assembling `J`.
const J_ROW_BLOCK: usize = 16;

/// One training point after QR normalization against a projection `A`.
#[derive(Debug, Clone)]
pub struct NormalizedPoint {
    /// `X̃ = X R⁻¹`, generally not orthonormal.
    pub normalized: DMatrix<f64>,
    /// `Q` from `AᵀX = QR`, a point of `G(p, d)`.
    pub reduced: GrassmannPoint,
    /// The upper-triangular factor `R` (positive diagonal).
    pub triangular: DMatrix<f64>,
}

/// Factors `AᵀXᵢ = QᵢRᵢ` for every point and returns `(X̃ᵢ, Qᵢ, Rᵢ)`.
pub fn normalize_points(
    points: &[GrassmannPoint],
    projection: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<Vec<NormalizedPoint>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| normalize_point(x, projection, tol, i))
        .collect()
}

pub(crate) fn normalize_point(
    x: &GrassmannPoint,
    projection: &DMatrix<f64>,
    tol: &Tolerances,
    index: usize,
) -> Result<NormalizedPoint> {
    let (d_amb, p) = (x.ambient_dim(), x.subspace_dim());
    if projection.nrows() != d_amb {
        return Err(Error::Dimension(format!(
            "projection has {} rows but point {index} lives in R^{d_amb}",
            projection.nrows()
        )));
    }
    if projection.ncols() < p {
        return Err(Error::Dimension(format!(
            "target dimension {} is smaller than subspace dimension {p}",
            projection.ncols()
        )));
    }
    let projected = projection.tr_mul(x.basis());
    let (q, r) = linalg::thin_qr(&projected);
    let condition = linalg::condition_number(&r);
    if !(condition <= tol.max_condition) {
        return Err(Error::NormalizationDegenerate { index, condition });
    }
    // X̃ R = X  ⇔  Rᵀ X̃ᵀ = Xᵀ
    let normalized = r
        .transpose()
        .solve_lower_triangular(&x.basis().transpose())
        .ok_or(Error::NormalizationDegenerate { index, condition })?
        .transpose();
    let reduced = GrassmannPoint::with_tolerances(q, tol)?;
    Ok(NormalizedPoint {
        normalized,
        reduced,
        triangular: r,
    })
}

/// `G_ij = X̃ᵢX̃ᵢᵀ − X̃ⱼX̃ⱼᵀ`.
pub fn assemble_g(xt_i: &DMatrix<f64>, xt_j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if xt_i.shape() != xt_j.shape() {
        return Err(Error::Dimension(format!(
            "normalized points have shapes {:?} and {:?}",
            xt_i.shape(),
            xt_j.shape()
        )));
    }
    Ok(xt_i * xt_i.transpose() - xt_j * xt_j.transpose())
}

/// `H = Σᵢ dᵢ X̃ᵢX̃ᵢᵀ`.
pub fn assemble_h(normalized: &[DMatrix<f64>], degrees: &DVector<f64>) -> Result<DMatrix<f64>> {
    if normalized.len() != degrees.len() {
        return Err(Error::LengthMismatch {
            left: normalized.len(),
            right: degrees.len(),
        });
    }
    let dim = normalized.first().map_or(0, |x| x.nrows());
    let mut h = DMatrix::zeros(dim, dim);
    for (x, &deg) in normalized.iter().zip(degrees.iter()) {
        if deg != 0.0 {
            h.gemm(deg, x, &x.transpose(), 1.0);
        }
    }
    Ok(linalg::symmetrize(&h))
}

/// `J = Σᵢⱼ wᵢⱼ G_ij A Aᵀ G_ij` for the previous iterate `A`.
///
/// Each term equals `MᵢⱼMᵢⱼᵀ` with `Mᵢⱼ = G_ij A = Bᵢ − Bⱼ` and
/// `Bᵢ = X̃ᵢ(X̃ᵢᵀA)`, so only `D×d` blocks are formed. Rows of the pair loop
/// are split into fixed blocks and the block sums combined by tree reduction.
pub fn assemble_j(
    normalized: &[DMatrix<f64>],
    graph: &AffinityGraph,
    previous: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = normalized.len();
    if graph.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: graph.len(),
        });
    }
    let dim = previous.nrows();
    if let Some(x) = normalized.iter().find(|x| x.nrows() != dim) {
        return Err(Error::Dimension(format!(
            "normalized point has {} rows, projection has {dim}",
            x.nrows()
        )));
    }
    let target = previous.ncols();
    let blocks: Vec<DMatrix<f64>> = normalized
        .par_iter()
        .map(|x| x * x.tr_mul(previous))
        .collect();
    let w = graph.weights();
    let starts: Vec<usize> = (0..n).step_by(J_ROW_BLOCK).collect();
    let partial: Vec<DMatrix<f64>> = starts
        .par_iter()
        .map(|&start| {
            let mut acc = DMatrix::zeros(dim, dim);
            for i in start..(start + J_ROW_BLOCK).min(n) {
                let pairs: Vec<usize> = ((i + 1)..n).filter(|&j| w[(i, j)] != 0.0).collect();
                if pairs.is_empty() {
                    continue;
                }
                let mut stacked = DMatrix::zeros(dim, pairs.len() * target);
                for (slot, &j) in pairs.iter().enumerate() {
                    // Both (i, j) and (j, i) contribute the same term.
                    let scale = (2.0 * w[(i, j)]).sqrt();
                    let diff = (&blocks[i] - &blocks[j]) * scale;
                    stacked
                        .columns_mut(slot * target, target)
                        .copy_from(&diff);
                }
                acc.gemm(1.0, &stacked, &stacked.transpose(), 1.0);
            }
            acc
        })
        .collect();
    Ok(linalg::symmetrize(&linalg::tree_sum(partial, dim, dim)))
}

/// `f(A) = Σᵢⱼ wᵢⱼ ‖Aᵀ G_ij A‖²_F` with `G_ij` built from the given
/// normalization.
///
/// `AᵀG_ijA = YᵢYᵢᵀ − YⱼYⱼᵀ` with `Yᵢ = AᵀX̃ᵢ`, so the sum runs over `d×d`
/// matrices only.
pub fn objective(
    normalized: &[DMatrix<f64>],
    graph: &AffinityGraph,
    projection: &DMatrix<f64>,
) -> Result<f64> {
    let n = normalized.len();
    if graph.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: graph.len(),
        });
    }
    let grams: Vec<DMatrix<f64>> = normalized
        .iter()
        .map(|x| {
            let y = projection.tr_mul(x);
            &y * y.transpose()
        })
        .collect();
    let w = graph.weights();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| w[(i, j)] != 0.0)
                .map(|j| w[(i, j)] * (&grams[i] - &grams[j]).norm_squared())
                .sum::<f64>()
        })
        .collect();
    Ok(2.0 * rows.iter().sum::<f64>())
}

pub(crate) fn normalized_matrices(points: &[NormalizedPoint]) -> Vec<DMatrix<f64>> {
    points.iter().map(|p| p.normalized.clone()).collect()
}
