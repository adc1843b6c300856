//! Classic locality preserving projections on vector data.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::AffinityGraph;
use crate::linalg;
use crate::tolerance::Tolerances;
use crate::trainer::solve_generalized;

#[derive(Debug, Clone)]
pub struct LppProjection {
    /// `D×d`, one projection direction per column.
    pub projection: DMatrix<f64>,
    /// Ascending generalized eigenvalues.
    pub eigenvalues: DVector<f64>,
}

/// Solves `XLXᵀa = λ XDXᵀa` for the `d` smallest eigenvalues, with columns
/// scaled to `aᵀ(XDXᵀ + ridge·I)a = 1/d` and canonical signs.
///
/// `data` holds one sample per column. The problem is posed on the column
/// space of `data`; directions the data never reaches have `XDXᵀa = 0` and
/// carry no information, so they are excluded rather than regularized. The
/// relative `ridge` is scaled by `tr(XDXᵀ)/r` on the `r`-dimensional range.
pub fn lpp_fit_vectors(
    data: &DMatrix<f64>,
    d: usize,
    graph: &AffinityGraph,
    ridge: f64,
) -> Result<LppProjection> {
    let (ambient, n) = data.shape();
    if graph.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: graph.len(),
        });
    }
    if d == 0 || d >= ambient {
        return Err(Error::Parameter(format!(
            "target dimension must satisfy 1 <= d < D = {ambient}, got {d}"
        )));
    }
    let tol = Tolerances::default();
    let scatter = data * data.transpose();
    let (values, vectors) = linalg::sym_eigen_descending(&scatter);
    let top = values[0];
    let rank = values.iter().take_while(|&&v| top > 0.0 && v > tol.rank_cutoff * top).count();
    if rank < d {
        return Err(Error::Parameter(format!(
            "data spans {rank} dimensions, cannot extract {d} directions"
        )));
    }
    let range = vectors.columns(0, rank).into_owned();
    let reduced = range.tr_mul(data);
    let degrees = DMatrix::from_diagonal(graph.degrees());
    let j = &reduced * graph.laplacian() * reduced.transpose();
    let h = &reduced * degrees * reduced.transpose();
    let shift = ridge * h.trace() / rank as f64;
    let sol = solve_generalized(&j, &h, d, shift)?;
    let mut projection = range * sol.vectors;
    linalg::canonicalize_column_signs(&mut projection);
    Ok(LppProjection {
        projection,
        eigenvalues: sol.values,
    })
}
