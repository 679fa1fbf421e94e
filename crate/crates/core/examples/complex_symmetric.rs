//! Complex-symmetric (A^T = A, not Hermitian) singular systems: the Saunders
//! variant of MINRES plus conjugate lifting, checked against a Takagi oracle.

use pinv_minres::oracle::{matvec, pinv, takagi};
use pinv_minres::random::{self, complex_symmetric_with_rank};
use pinv_minres::vector::rel_err;
use pinv_minres::{lift_cs, solve_cs, DenseOperator, SolveOptions, C64};

fn main() -> pinv_minres::Result<()> {
    let (d, rank) = (20, 12);
    let a = complex_symmetric_with_rank(&mut random::rng(3), d, rank);
    let tk = takagi(&a)?;
    println!("Takagi rank {}, reconstruction error {:.2e}", tk.rank, (tk.reconstruct() - &a).norm() / a.norm());

    let b: Vec<C64> = (0..d).map(|k| C64::new(1.0, 0.1 * k as f64)).collect();
    let x_dagger = matvec(&pinv(&a), &b);
    let rep =
        solve_cs(&DenseOperator::complex_symmetric(a)?, &b, &SolveOptions::default().with_reorthogonalization(true))?;

    println!("{} iterations ({})", rep.iterations, rep.termination.name());
    println!("plain  error {:.3e}", rel_err(&rep.x, &x_dagger));
    println!("lifted error {:.3e}", rel_err(&lift_cs(&rep.x, &rep.residual), &x_dagger));
    Ok(())
}
