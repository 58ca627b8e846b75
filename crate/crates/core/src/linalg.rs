//! Dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symplectic form Ω = [[0, I], [-I, 0]] for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        om[(i, n_modes + i)] = 1.0;
        om[(n_modes + i, i)] = -1.0;
    }
    om
}

/// Ω·M without forming Ω: the top half of the result is the bottom half of
/// M, the bottom half is the negated top half.
pub fn apply_symplectic_form(m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = m.nrows();
    let n = dim / 2;
    let mut out = DMatrix::zeros(dim, m.ncols());
    out.rows_mut(0, n).copy_from(&m.rows(n, n));
    let mut bottom = out.rows_mut(n, n);
    bottom.copy_from(&m.rows(0, n));
    bottom.neg_mut();
    out
}

/// Relative Frobenius asymmetry ‖M - Mᵀ‖ / ‖M‖ (zero for the zero matrix).
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).norm() / norm
}

/// (M + Mᵀ)/2 in place.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted
/// ascending and the eigenvector columns permuted to match.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a symmetric matrix, ascending, without eigenvectors.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Complex spectrum of a general real matrix as (re, im) pairs.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let n = m.nrows();
    let fm = faer::Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let ev = fm
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let ev: Vec<faer::c64> = ev;
    Ok(ev.into_iter().map(|c| (c.re, c.im)).collect())
}
