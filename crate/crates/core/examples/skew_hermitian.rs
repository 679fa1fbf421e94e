//! Skew-Hermitian systems are solved as the Hermitian system (iA) x = i b.

use pinv_minres::oracle::{matvec, pinv};
use pinv_minres::random::{self, skew_hermitian_with_rank};
use pinv_minres::vector::rel_err;
use pinv_minres::{solve_skew, DenseOperator, SolveOptions, C64};

fn main() -> pinv_minres::Result<()> {
    // The 2x2 rotation generator: invertible, A† = A^-1.
    let rot = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]).map(|v| C64::new(v, 0.0));
    let b = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let rep = solve_skew(&DenseOperator::skew_hermitian(rot)?, &b, &SolveOptions::default())?;
    println!("[[0,1],[-1,0]] x = [1,0]  ->  x = [{:.3}, {:.3}]", rep.x[0], rep.x[1]);

    let (d, rank) = (16, 10);
    let a = skew_hermitian_with_rank(&mut random::rng(5), d, rank);
    let b = vec![C64::new(1.0, 0.0); d];
    let x_dagger = matvec(&pinv(&a), &b);
    let rep =
        solve_skew(&DenseOperator::skew_hermitian(a)?, &b, &SolveOptions::default().with_reorthogonalization(true))?;
    println!(
        "rank {rank}/{d}: {} iterations, plain error {:.3e}, lifted error {:.3e}",
        rep.iterations,
        rel_err(&rep.x, &x_dagger),
        rel_err(&rep.lifted()?, &x_dagger)
    );
    Ok(())
}
