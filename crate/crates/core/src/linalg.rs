//! Dense helpers layered on nalgebra: canonical signs, positive-diagonal
//! thin QR, and sorted symmetric eigendecompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Flips every column whose largest-magnitude entry is negative. Ties on
/// magnitude resolve to the lowest row index.
pub fn canonicalize_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut pivot = 0.0_f64;
        for &v in col.iter() {
            if v.abs() > pivot.abs() {
                pivot = v;
            }
        }
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

/// Economy QR of a tall `n×k` matrix with the diagonal of `R` made
/// nonnegative, which makes the factorization unique for full-rank input.
pub fn thin_qr(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    debug_assert!(m.nrows() >= m.ncols());
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows() {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
            r.row_mut(k).neg_mut();
        }
    }
    (q, r)
}

/// Eigendecomposition of a symmetric matrix with eigenvalues in ascending
/// order and canonical column signs.
pub fn sym_eigen_ascending(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    sorted_eigen(m, false)
}

/// Same as [`sym_eigen_ascending`] but in descending order.
pub fn sym_eigen_descending(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    sorted_eigen(m, true)
}

fn sorted_eigen(m: &DMatrix<f64>, descending: bool) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ord = eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]);
        let ord = if descending { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = eig.eigenvectors.select_columns(&order);
    canonicalize_column_signs(&mut vectors);
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of `MᵀM − I`.
pub fn orthonormality_error(m: &DMatrix<f64>) -> f64 {
    let mut gram = m.tr_mul(m);
    for k in 0..gram.nrows() {
        gram[(k, k)] -= 1.0;
    }
    gram.amax()
}

/// Ratio of extreme singular values of a square matrix; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Sum of a sequence of matrices by pairwise tree reduction over a fixed
/// index order, so the rounding pattern does not depend on thread count.
pub fn tree_sum(mut terms: Vec<DMatrix<f64>>, nrows: usize, ncols: usize) -> DMatrix<f64> {
    if terms.is_empty() {
        return DMatrix::zeros(nrows, ncols);
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}
