//! With M = S S^H, preconditioned MINRES equals plain MINRES on the reduced
//! system (S^H A S) x̃ = S^H b mapped back through S, and the result does not
//! depend on which factor S is used.

use pinv_minres::experiments::{equivalence_traces, trace_gap};
use pinv_minres::{SolveOptions, Symmetry};

fn main() -> pinv_minres::Result<()> {
    let opts = SolveOptions::default().with_reorthogonalization(true);
    for kind in [Symmetry::Hermitian, Symmetry::ComplexSymmetric] {
        for seed in 0..3 {
            let tr = equivalence_traces(20, 15, 10, kind, &opts, seed)?;
            let (g1, _) = trace_gap(&tr.full, &tr.economy, 1e-10);
            let (g2, _) = trace_gap(&tr.economy, &tr.root, 1e-10);
            println!(
                "{kind:<17} seed {seed}: {} iterations, psolve vs subsolve {g1:.2e}, economy vs root factor {g2:.2e}",
                tr.full.len()
            );
        }
    }
    Ok(())
}
