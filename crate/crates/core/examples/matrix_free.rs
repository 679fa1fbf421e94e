//! A user-defined matrix-free operator: the 1-D periodic Laplacian, which is
//! singular (constants span its null space).

use pinv_minres::vector::norm;
use pinv_minres::{solve, LinearOperator, SolveOptions, Symmetry, C64};

struct PeriodicLaplacian(usize);

impl LinearOperator for PeriodicLaplacian {
    fn dim(&self) -> usize {
        self.0
    }
    fn kind(&self) -> Symmetry {
        Symmetry::Hermitian
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.0;
        for i in 0..n {
            y[i] = 2.0 * x[i] - x[(i + n - 1) % n] - x[(i + 1) % n];
        }
    }
}

fn main() -> pinv_minres::Result<()> {
    let n = 64;
    let op = PeriodicLaplacian(n);
    println!("symmetry probe: {}", pinv_minres::probe_symmetry(&op, 10, 0));
    // Right-hand side with a nonzero mean: inconsistent system.
    let b: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i as f64 * 0.3).sin(), 0.0)).collect();
    let rep = solve(&op, &b, &SolveOptions::default().with_reorthogonalization(true))?;
    let x = rep.lifted()?;
    let mean: C64 = x.iter().sum::<C64>() / n as f64;
    println!("{} iterations ({})", rep.iterations, rep.termination.name());
    println!(
        "residual norm {:.4}, mean of lifted x {:.2e} (minimum-norm solution has zero mean)",
        norm(&rep.residual),
        mean.norm()
    );
    Ok(())
}
