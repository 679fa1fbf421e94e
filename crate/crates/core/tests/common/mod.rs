#![allow(dead_code)]

use nalgebra::DMatrix;
use pinv_minres::random::CMat;
use pinv_minres::{SolveOptions, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn cvec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x)).collect()
}

pub fn real(rows: usize, cols: usize, v: &[f64]) -> CMat {
    DMatrix::from_row_slice(rows, cols, v).map(c)
}

pub fn diag(v: &[f64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_vec(cvec(v)))
}

pub fn reorth(d: usize) -> SolveOptions {
    SolveOptions::default().with_reorthogonalization(true).with_max_iterations(4 * d + 10)
}

pub fn assert_close(x: &[C64], y: &[C64], tol: f64) {
    let e = pinv_minres::vector::rel_err(x, y);
    assert!(e <= tol, "relative error {e:.3e} > {tol:.1e}\n  x = {x:?}\n  y = {y:?}");
}
