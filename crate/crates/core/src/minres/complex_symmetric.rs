use super::kernel;
use super::{SolveOptions, SolveReport};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Symmetry};
use crate::vector::{axpy, conj, dot, norm_sqr};
use crate::C64;

/// MINRES over the Saunders subspace for a complex-symmetric operator.
pub fn solve_cs(a: &dyn LinearOperator, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    if a.kind() != Symmetry::ComplexSymmetric {
        return Err(Error::KindMismatch { expected: "complex_symmetric", found: a.kind() });
    }
    kernel::run(a, b, opts, Symmetry::ComplexSymmetric)
}

/// `x - (<conj(r), x> / ||r||^2) conj(r)`.
pub fn lift_cs(x: &[C64], r: &[C64]) -> Vec<C64> {
    let rr = norm_sqr(r);
    let mut out = x.to_vec();
    if rr == 0.0 || !rr.is_finite() {
        return out;
    }
    let rb = conj(r);
    axpy(-(dot(&rb, x) / rr), &rb, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minres::{lift, Termination};
    use crate::operator::DenseOperator;
    use crate::vector::{from_real, norm, rel_err};
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_is_one_step() {
        let a = DenseOperator::complex_symmetric(DMatrix::identity(2, 2)).unwrap();
        let b = from_real(&[1.0, 1.0]);
        let rep = solve_cs(&a, &b, &SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rel_err(&rep.x, &b) < 1e-15);
        assert!(norm(&rep.residual) < 1e-14);
    }

    #[test]
    fn rank_one_example() {
        // A = z z^T, z = [1, i]
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., 1.), c(-1., 0.)]);
        let a = DenseOperator::complex_symmetric(m).unwrap();
        let rep = solve_cs(&a, &from_real(&[1.0, 0.0]), &SolveOptions::default()).unwrap();
        assert_eq!(rep.termination, Termination::GammaZero);
        let want = [c(0.25, 0.0), c(0.0, -0.25)];
        assert!(rel_err(&rep.lifted().unwrap(), &want) < 1e-14);
        // (I - A A†) b = b - A x† = [1,0] - [0.5, 0.5 i]... ||.|| = sqrt(0.5)
        assert!((norm(&rep.residual) - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn real_inputs_reduce_to_hermitian_lift() {
        let x = from_real(&[1.0, -2.0, 0.5]);
        let r = from_real(&[0.3, 0.1, -1.0]);
        assert_eq!(lift_cs(&x, &r), lift(&x, &r));
    }
}
