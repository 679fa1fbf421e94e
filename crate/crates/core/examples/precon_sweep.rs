//! Rank-i preconditioners built from range(A) against random PSD ones: only the
//! former recover A† b, and exactly at i = rank(A).

use pinv_minres::precon_factory::{make_rank_family, run_error_sweep, sweep_hermitian, BasisSource, RankFamilySpec};
use pinv_minres::{SolveOptions, Symmetry, C64};

fn main() -> pinv_minres::Result<()> {
    let (d, rank) = (20, 15);
    let a = sweep_hermitian(d, rank, 0);
    let b = vec![C64::new(1.0, 0.0); d];
    let opts = SolveOptions::default().with_reorthogonalization(true);
    for source in [BasisSource::RangePreserved, BasisSource::RandomPsdSvd] {
        let family = make_rank_family(&RankFamilySpec::new(d, source, 1), Some(&a), Symmetry::Hermitian)?;
        println!("{}", source.name());
        println!("{:>3} {:>10} {:>10} {:>10}", "i", "E_x", "E_x_hat", "E_P");
        for r in run_error_sweep(&a, &b, &family, Symmetry::Hermitian, &opts)? {
            println!("{:>3} {:>10.2e} {:>10.2e} {:>10.2e}", r.i, r.e_x, r.e_x_hat, r.e_p);
        }
    }
    Ok(())
}
