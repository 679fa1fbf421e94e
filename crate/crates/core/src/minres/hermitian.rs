use super::kernel;
use super::{SolveOptions, SolveReport};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, ScaledOperator, Symmetry};
use crate::vector::{axpy, dot, norm_sqr, scale};
use crate::C64;

/// MINRES for a Hermitian operator.
///
/// At a `GammaZero` exit the grade has been reached with `b` outside the range
/// of `A`; [`SolveReport::lifted`] then returns `A† b`.
pub fn solve(a: &dyn LinearOperator, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    if a.kind() != Symmetry::Hermitian {
        return Err(Error::KindMismatch { expected: "hermitian", found: a.kind() });
    }
    kernel::run(a, b, opts, Symmetry::Hermitian)
}

/// `x - (<r, x> / ||r||^2) r`.
///
/// Projects `x` onto the orthogonal complement of `r`. Returns `x` unchanged
/// when `r = 0`.
pub fn lift(x: &[C64], r: &[C64]) -> Vec<C64> {
    let rr = norm_sqr(r);
    let mut out = x.to_vec();
    if rr == 0.0 || !rr.is_finite() {
        return out;
    }
    axpy(-(dot(r, x) / rr), r, &mut out);
    out
}

/// Skew-Hermitian MINRES: runs [`solve`] on `(iA, ib)`.
///
/// The report keeps `r = ib - iA x` and `kind = SkewHermitian`; lifting it
/// gives `A† b` because `(iA)†(ib) = A† b`.
pub fn solve_skew(a: &dyn LinearOperator, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    if a.kind() != Symmetry::SkewHermitian {
        return Err(Error::KindMismatch { expected: "skew_hermitian", found: a.kind() });
    }
    let i = C64::new(0.0, 1.0);
    let ia = ScaledOperator::new(a, i, Symmetry::Hermitian);
    let mut report = kernel::run(&ia, &scale(i, b), opts, Symmetry::Hermitian)?;
    report.kind = Symmetry::SkewHermitian;
    Ok(report)
}
