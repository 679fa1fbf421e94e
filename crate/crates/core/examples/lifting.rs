//! Plain MINRES on a singular Hermitian system stops at a least-squares
//! solution with a null-space component; one lifting step removes it.

use pinv_minres::oracle::{matvec, pinv};
use pinv_minres::random::{self, hermitian_with_rank};
use pinv_minres::vector::rel_err;
use pinv_minres::{lift, solve, DenseOperator, SolveOptions, C64};

fn main() -> pinv_minres::Result<()> {
    let (d, rank) = (20, 15);
    let a = hermitian_with_rank(&mut random::rng(0), d, rank);
    let b = vec![C64::new(1.0, 0.0); d];
    let x_dagger = matvec(&pinv(&a), &b);

    let op = DenseOperator::hermitian(a)?;
    let opts = SolveOptions::default().with_reorthogonalization(true).with_trace();
    let rep = solve(&op, &b, &opts)?;
    println!("terminated after {} iterations ({})", rep.iterations, rep.termination.name());

    println!("{:>3}  {:>12}  {:>12}", "t", "plain", "lifted");
    for rec in rep.trace.as_deref().unwrap_or_default() {
        let lifted = lift(&rec.x, &rec.residual);
        println!("{:>3}  {:>12.3e}  {:>12.3e}", rec.t, rel_err(&rec.x, &x_dagger), rel_err(&lifted, &x_dagger));
    }
    println!("final lifted error: {:.3e}", rel_err(&rep.lifted()?, &x_dagger));
    Ok(())
}
