use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// The `d` smallest eigenpairs of `J a = λ (H + ridge·I) a`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending eigenvalues.
    pub values: DVector<f64>,
    /// One eigenvector per column, scaled so `aᵀ(H + ridge·I)a = 1/d`.
    pub vectors: DMatrix<f64>,
}

/// Solves the trace-constrained projection problem for a target dimension
/// `d < D`.
///
/// `H + ridge·I` is factored as `LLᵀ` and the problem reduced to the standard
/// symmetric problem `L⁻¹JL⁻ᵀ y = λ y`, with `a = L⁻ᵀ y`.
pub fn solve_projection(
    j: &DMatrix<f64>,
    h: &DMatrix<f64>,
    d: usize,
    ridge: f64,
) -> Result<GeneralizedEigen> {
    if d >= j.nrows() {
        return Err(Error::Parameter(format!(
            "target dimension {d} must be smaller than ambient dimension {}",
            j.nrows()
        )));
    }
    solve_generalized(j, h, d, ridge)
}

pub(crate) fn solve_generalized(
    j: &DMatrix<f64>,
    h: &DMatrix<f64>,
    d: usize,
    ridge: f64,
) -> Result<GeneralizedEigen> {
    let n = j.nrows();
    if j.ncols() != n || h.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "expected square matrices of equal size, got {:?} and {:?}",
            j.shape(),
            h.shape()
        )));
    }
    if d == 0 || d > n {
        return Err(Error::Parameter(format!("cannot extract {d} eigenvectors from a {n}x{n} problem")));
    }
    if j.iter().chain(h.iter()).any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure {
            min_eigenvalue: f64::NAN,
        });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Parameter(format!("ridge must be nonnegative, got {ridge}")));
    }
    let j = linalg::symmetrize(j);
    let mut constraint = linalg::symmetrize(h);
    for k in 0..n {
        constraint[(k, k)] += ridge;
    }
    let chol = Cholesky::new(constraint.clone()).ok_or_else(|| Error::SolverFailure {
        min_eigenvalue: linalg::sym_eigen_ascending(&constraint).0[0],
    })?;
    let l = chol.l();
    if l.diagonal().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::SolverFailure {
            min_eigenvalue: linalg::sym_eigen_ascending(&constraint).0[0],
        });
    }
    let half = l
        .solve_lower_triangular(&j)
        .expect("nonzero diagonal checked above");
    let reduced = l
        .solve_lower_triangular(&half.transpose())
        .expect("nonzero diagonal checked above");
    let (values, vectors) = linalg::sym_eigen_ascending(&reduced);
    let y = vectors.columns(0, d).into_owned();
    let mut a = l
        .tr_solve_lower_triangular(&y)
        .expect("nonzero diagonal checked above");
    let per_column = 1.0 / d as f64;
    for mut col in a.column_iter_mut() {
        let mass = col.dot(&(&constraint * &col));
        col *= (per_column / mass).sqrt();
    }
    linalg::canonicalize_column_signs(&mut a);
    Ok(GeneralizedEigen {
        values: values.rows(0, d).into_owned(),
        vectors: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_problem() {
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let h = DMatrix::identity(3, 3);
        let sol = solve_projection(&j, &h, 2, 0.0).unwrap();
        assert!((sol.values[0] - 1.0).abs() < 1e-14);
        assert!((sol.values[1] - 2.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DMatrix::from_row_slice(3, 2, &[s, 0.0, 0.0, s, 0.0, 0.0]);
        assert!((&sol.vectors - expected).amax() < 1e-14);
    }

    #[test]
    fn zero_objective_gives_zero_eigenvalue() {
        let sol = solve_projection(&DMatrix::zeros(3, 3), &DMatrix::identity(3, 3), 1, 0.0).unwrap();
        assert_eq!(sol.values[0], 0.0);
        assert!((sol.vectors.norm_squared() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_constraint_fails() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5, 2.0]));
        match solve_projection(&DMatrix::identity(3, 3), &h, 1, 0.0) {
            Err(Error::SolverFailure { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // A singular H is rescued by the ridge.
        let singular = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 2.0]));
        assert!(solve_projection(&DMatrix::identity(3, 3), &singular, 1, 0.0).is_err());
        assert!(solve_projection(&DMatrix::identity(3, 3), &singular, 1, 1e-8).is_ok());
    }

    #[test]
    fn rejects_bad_dimensions() {
        let m = DMatrix::identity(3, 3);
        assert!(matches!(solve_projection(&m, &m, 3, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(
            solve_projection(&m, &DMatrix::identity(2, 2), 1, 0.0),
            Err(Error::Dimension(_))
        ));
    }
}
