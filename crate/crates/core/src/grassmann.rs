//! Points on the Grassmann manifold `G(p, D)` represented by column-orthonormal
//! `D×p` bases, the projector embedding `X ↦ XXᵀ`, and the embedding distance
//! `½‖XXᵀ − YYᵀ‖²_F`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerance::Tolerances;

/// A `p`-dimensional subspace of `R^D`, stored as one orthonormal representative.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    basis: DMatrix<f64>,
}

/// The orthogonal projector `XXᵀ` of a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricProjector {
    matrix: DMatrix<f64>,
}

impl SymmetricProjector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

impl GrassmannPoint {
    /// Wraps an existing basis after checking shape, finiteness and
    /// orthonormality against the default tolerances.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(basis, &Tolerances::default())
    }

    pub fn with_tolerances(basis: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let (d, p) = basis.shape();
        if p == 0 || p > d {
            return Err(Error::Dimension(format!(
                "basis of shape {d}x{p} does not satisfy 1 <= p <= D"
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("basis has non-finite entries".into()));
        }
        let err = linalg::orthonormality_error(&basis);
        if !(err <= tol.orthonormality) {
            return Err(Error::Parameter(format!(
                "basis is not column-orthonormal (max |XᵀX - I| = {err:e})"
            )));
        }
        Ok(GrassmannPoint { basis })
    }

    /// Subspace spanned by the `p` leading left singular vectors of `data`.
    pub fn from_raw_matrix(data: &DMatrix<f64>, p: usize) -> Result<Self> {
        Self::from_raw_matrix_with(data, p, &Tolerances::default())
    }

    pub fn from_raw_matrix_with(data: &DMatrix<f64>, p: usize, tol: &Tolerances) -> Result<Self> {
        let (d, m) = data.shape();
        if p == 0 {
            return Err(Error::Parameter("subspace dimension must be at least 1".into()));
        }
        if m < p || d < p {
            return Err(Error::Dimension(format!(
                "cannot extract a {p}-dimensional subspace from a {d}x{m} matrix"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("data has non-finite entries".into()));
        }
        let svd = data.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
        let top = sv[order[0]];
        let pth = sv[order[p - 1]];
        if !(top > 0.0) || pth / top < tol.rank_cutoff {
            return Err(Error::RankDeficient(format!(
                "singular value ratio sigma_{p}/sigma_1 = {:e} below {:e}",
                if top > 0.0 { pth / top } else { 0.0 },
                tol.rank_cutoff
            )));
        }
        let mut basis = u.select_columns(&order[..p]);
        linalg::canonicalize_column_signs(&mut basis);
        Self::with_tolerances(basis, tol)
    }

    /// Orthonormal basis for the column space of a full-rank `D×p` matrix.
    pub fn reorthonormalize(m: &DMatrix<f64>) -> Result<Self> {
        Self::reorthonormalize_with(m, &Tolerances::default())
    }

    pub fn reorthonormalize_with(m: &DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let (d, p) = m.shape();
        if p == 0 || p > d {
            return Err(Error::Dimension(format!(
                "matrix of shape {d}x{p} cannot be reorthonormalized"
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix has non-finite entries".into()));
        }
        let (mut q, r) = linalg::thin_qr(m);
        let diag = r.diagonal();
        let largest = diag.amax();
        let smallest = diag.amin();
        if !(largest > 0.0) || smallest < tol.rank_cutoff * largest {
            return Err(Error::RankDeficient(format!(
                "triangular factor diagonal ratio {:e} below {:e}",
                if largest > 0.0 { smallest / largest } else { 0.0 },
                tol.rank_cutoff
            )));
        }
        linalg::canonicalize_column_signs(&mut q);
        Self::with_tolerances(q, tol)
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn into_basis(self) -> DMatrix<f64> {
        self.basis
    }

    /// `D`, the dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `p`, the dimension of the subspace.
    pub fn subspace_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn to_projector(&self) -> SymmetricProjector {
        let matrix = &self.basis * self.basis.transpose();
        SymmetricProjector {
            matrix: linalg::symmetrize(&matrix),
        }
    }

    /// `½‖XXᵀ − YYᵀ‖²_F`, evaluated as `p − ‖XᵀY‖²_F` (both points have
    /// orthonormal bases), clamped at zero.
    ///
    /// The cross term is formed with the two arguments in a canonical order,
    /// so the result is bitwise symmetric.
    pub fn embedding_distance_sq(&self, other: &GrassmannPoint) -> Result<f64> {
        check_compatible(self, other)?;
        Ok(self.distance_unchecked(other))
    }

    pub(crate) fn distance_unchecked(&self, other: &GrassmannPoint) -> f64 {
        let (a, b) = if self.basis.as_slice() <= other.basis.as_slice() {
            (self, other)
        } else {
            (other, self)
        };
        let cross = a.basis.tr_mul(&b.basis).norm_squared();
        // Diagonal contributions of the two projectors, p each when exactly
        // orthonormal; using the actual norms keeps the x == y case at zero.
        let self_a = a.basis.tr_mul(&a.basis).norm_squared();
        let self_b = b.basis.tr_mul(&b.basis).norm_squared();
        (0.5 * (self_a + self_b) - cross).max(0.0)
    }
}

pub(crate) fn check_compatible(a: &GrassmannPoint, b: &GrassmannPoint) -> Result<()> {
    if a.basis.shape() != b.basis.shape() {
        return Err(Error::Dimension(format!(
            "points live in G({}, {}) and G({}, {})",
            a.subspace_dim(),
            a.ambient_dim(),
            b.subspace_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

/// Checks that every point shares the shape of the first and returns `(D, p)`.
pub fn common_dims(points: &[GrassmannPoint]) -> Result<(usize, usize)> {
    let first = points
        .first()
        .ok_or_else(|| Error::Parameter("empty point set".into()))?;
    for (i, x) in points.iter().enumerate().skip(1) {
        check_compatible(first, x).map_err(|e| match e {
            Error::Dimension(msg) => Error::Dimension(format!("point {i}: {msg}")),
            other => other,
        })?;
    }
    Ok((first.ambient_dim(), first.subspace_dim()))
}

/// Symmetric `N×N` matrix of embedding distances with a zero diagonal.
/// Rows are computed in parallel and written to fixed slots.
pub fn pairwise_distances(points: &[GrassmannPoint]) -> Result<DMatrix<f64>> {
    let n = points.len();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    common_dims(points)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| points[i].distance_unchecked(&points[j]))
                .collect()
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}
