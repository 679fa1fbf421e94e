//! Preconditioned MINRES with singular PSD preconditioners, its lifting step,
//! reorthogonalization, and the equivalent sub-preconditioned reduced solve.

mod precond;
mod reorth;
mod solve;
mod subsolve;

pub use precond::{
    DenseFactor, EconomyFactors, IdentityFactor, KroneckerFactor, Preconditioner, SubPreconditioner, PSD_RANK_TOL,
};
pub use reorth::ReorthBuffer;
pub use solve::{psolve_cs, psolve_h};
pub use subsolve::{subsolve, subsolve_materialized, ReducedOperator, SubsolveReport};

use crate::error::{Error, Result};
use crate::minres::SolveReport;
use crate::operator::Symmetry;
use crate::vector::{axpy, conj, dot, norm};
use crate::C64;

/// Lifting for preconditioned runs.
///
/// Hermitian: `x - (<rbreve, x> / <rhat, rbreve>) rhat`; complex-symmetric uses
/// the conjugated proxies. Returns `x` when `rhat` vanished.
pub fn plift(report: &SolveReport) -> Result<Vec<C64>> {
    let rbreve = report.companion.as_ref().ok_or(Error::InvalidConfig("plift needs a preconditioned report".into()))?;
    if report.residual_vanished() {
        return Ok(report.x.clone());
    }
    let (rhat, rbreve) = match report.kind {
        Symmetry::ComplexSymmetric => (conj(&report.residual), conj(rbreve)),
        _ => (report.residual.clone(), rbreve.clone()),
    };
    let den = dot(&rhat, &rbreve);
    if den.norm() <= report.zero_tol * norm(&rhat) * norm(&rbreve) {
        return Err(Error::DegenerateLifting(den.norm()));
    }
    let mut out = report.x.clone();
    axpy(-(dot(&rbreve, &report.x) / den), &rhat, &mut out);
    Ok(out)
}
