//! Dense factorizations. The matrices live in nalgebra; the decompositions
//! themselves are delegated to faer.

use faer::{Mat, MatRef, Side};
use nalgebra::DMatrix;

use crate::random::CMat;
use crate::C64;

fn to_faer(a: &CMat) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: MatRef<'_, C64>) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD `(U, sigma, V)` with `sigma` descending. `None` if the
/// iteration fails to converge.
pub(crate) fn thin_svd(a: &CMat) -> Option<(CMat, Vec<f64>, CMat)> {
    if a.nrows() == 0 || a.ncols() == 0 {
        let k = 0;
        return Some((CMat::zeros(a.nrows(), k), Vec::new(), CMat::zeros(a.ncols(), k)));
    }
    let s = to_faer(a).thin_svd().ok()?;
    let d = s.S().column_vector();
    let sigma = (0..d.nrows()).map(|i| d[i].re).collect();
    Some((from_faer(s.U()), sigma, from_faer(s.V())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(a: &CMat) -> Option<(Vec<f64>, CMat)> {
    let e = to_faer(a).self_adjoint_eigen(Side::Lower).ok()?;
    let d = e.S().column_vector();
    Some(((0..d.nrows()).map(|i| d[i].re).collect(), from_faer(e.U())))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub(crate) fn symmetric_eigen(a: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let m = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let e = m.self_adjoint_eigen(Side::Lower).ok()?;
    let d = e.S().column_vector();
    let u = e.U();
    Some(((0..d.nrows()).map(|i| d[i]).collect(), DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)])))
}

/// Thin Q factor of a Householder QR.
pub(crate) fn thin_q(a: &CMat) -> CMat {
    from_faer(to_faer(a).qr().compute_thin_Q().as_ref())
}

/// First `k` columns of the Q factor of a real matrix, optionally with
/// column pivoting (a rank-`k` truncated QR).
pub(crate) fn leading_q_real(a: &DMatrix<f64>, k: usize, pivoted: bool) -> DMatrix<f64> {
    let m = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let q = if pivoted { m.col_piv_qr().compute_thin_Q() } else { m.qr().compute_thin_Q() };
    let k = k.min(q.ncols());
    DMatrix::from_fn(q.nrows(), k, |i, j| q[(i, j)])
}
