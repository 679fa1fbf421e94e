//! MINRES with lifting against LSQR and truncated SVD on the same singular system.

use pinv_minres::baselines::{lsqr, tsvd_solve, Truncation};
use pinv_minres::oracle::{matvec, pinv};
use pinv_minres::random::{self, hermitian_with_rank};
use pinv_minres::vector::rel_err;
use pinv_minres::{solve, DenseOperator, SolveOptions, C64};

fn main() -> pinv_minres::Result<()> {
    let (d, rank) = (30, 20);
    let a = hermitian_with_rank(&mut random::rng(2), d, rank);
    let b = vec![C64::new(1.0, 0.0); d];
    let x_dagger = matvec(&pinv(&a), &b);
    let op = DenseOperator::hermitian(a.clone())?;

    let m = solve(&op, &b, &SolveOptions::default().with_reorthogonalization(true))?;
    println!("minres (lifted): {:>3} its, error {:.2e}", m.iterations, rel_err(&m.lifted()?, &x_dagger));
    for its in [10, 20, 40] {
        let l = lsqr(&op, &b, its)?;
        println!("lsqr:            {:>3} its, error {:.2e}", l.iterations.unwrap_or(0), rel_err(&l.x, &x_dagger));
    }
    for k in [10, rank] {
        let t = tsvd_solve(&a, &b, Truncation::Rank(k))?;
        println!("tsvd rank {k:>2}:               error {:.2e}", rel_err(&t.x, &x_dagger));
    }
    Ok(())
}
