//! Preconditioned MINRES with a PSD preconditioner, on a 2x2 example with a
//! closed-form answer and on a singular preconditioner whose range matches
//! range(A).

use nalgebra::DMatrix;
use pinv_minres::oracle::{matvec, pinv};
use pinv_minres::random::{self, hermitian_with_rank};
use pinv_minres::vector::{rel_err, sub};
use pinv_minres::{plift, psolve_h, DenseOperator, LinearOperator, Preconditioner, SolveOptions, C64};

fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, v).map(|x| C64::new(x, 0.0))
}

fn main() -> pinv_minres::Result<()> {
    // A = diag(1, 0), M = S S^H with S = [[2, 1], [1, 1]], b = [1, 1].
    let a = DenseOperator::hermitian(real(2, 2, &[1.0, 0.0, 0.0, 0.0]))?;
    let m = Preconditioner::from_dense_factor(real(2, 2, &[2.0, 1.0, 1.0, 1.0]));
    let b = [C64::new(1.0, 0.0); 2];
    let rep = psolve_h(&a, &m, &b, &SolveOptions::default())?;
    let r = sub(&b, &a.apply(&rep.x)?);
    let xl = plift(&rep)?;
    println!("final iterate x = [{:.4}, {:.4}], r = [{:.4}, {:.4}]", rep.x[0].re, rep.x[1].re, r[0].re, r[1].re);
    println!("lifted        x = [{:.4}, {:.4}]", xl[0].re, xl[1].re);

    // M = U U^H with U spanning range(A): the iterate is already A† b.
    let (d, rank) = (20, 15);
    let a = hermitian_with_rank(&mut random::rng(1), d, rank);
    let dec = pinv_minres::oracle::hermitian_eigen(&a)?;
    let m = Preconditioner::from_economy(dec.u.clone(), vec![1.0; rank])?;
    let b = vec![C64::new(1.0, 0.0); d];
    let x_dagger = matvec(&pinv(&a), &b);
    let rep = psolve_h(&DenseOperator::hermitian(a)?, &m, &b, &SolveOptions::default().with_reorthogonalization(true))?;
    println!(
        "range-matched M: {} iterations ({}), error {:.3e}, lifted error {:.3e}",
        rep.iterations,
        rep.termination.name(),
        rel_err(&rep.x, &x_dagger),
        rel_err(&plift(&rep)?, &x_dagger)
    );
    Ok(())
}
