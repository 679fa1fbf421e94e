//! Sub-preconditioned MINRES: solve the reduced system `Ã x̃ = b̃` with
//! `Ã = S^H A S` (`S^T A S` for complex-symmetric `A`) and map back with `S`.

use std::sync::Arc;

use super::precond::SubPreconditioner;
use crate::error::{Error, Result};
use crate::minres::{solve, solve_cs, IterRecord, SolveOptions, SolveReport};
use crate::operator::{DenseOperator, LinearOperator, Symmetry};
use crate::random::CMat;
use crate::vector::{conj_in_place, scale, zeros};
use crate::C64;

/// Composed reduced operator; nothing is materialized.
pub struct ReducedOperator<'a> {
    a: &'a dyn LinearOperator,
    s: &'a dyn SubPreconditioner,
    kind: Symmetry,
}

impl<'a> ReducedOperator<'a> {
    pub fn new(a: &'a dyn LinearOperator, s: &'a dyn SubPreconditioner) -> Result<Self> {
        if s.rows() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: s.rows() });
        }
        match a.kind() {
            Symmetry::Hermitian | Symmetry::ComplexSymmetric => Ok(Self { a, s, kind: a.kind() }),
            k => Err(Error::KindMismatch { expected: "hermitian or complex_symmetric", found: k }),
        }
    }

    /// Dense `Ã`, column by column. Intended for `m <= 2048`.
    pub fn to_dense(&self) -> Result<CMat> {
        let m = self.s.cols();
        if m > 2048 {
            return Err(Error::InvalidConfig(format!("dense reduced operator too large (m = {m})")));
        }
        let mut out = CMat::zeros(m, m);
        let mut e = zeros(m);
        let mut col = zeros(m);
        for j in 0..m {
            e[j] = C64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = C64::new(0.0, 0.0);
        }
        Ok(out)
    }
}

impl LinearOperator for ReducedOperator<'_> {
    fn dim(&self) -> usize {
        self.s.cols()
    }
    fn kind(&self) -> Symmetry {
        self.kind
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let d = self.a.dim();
        let mut sx = zeros(d);
        self.s.apply_into(x, &mut sx);
        let mut asx = zeros(d);
        self.a.apply_into(&sx, &mut asx);
        match self.kind {
            Symmetry::ComplexSymmetric => {
                // S^T v = conj(S^H conj(v))
                conj_in_place(&mut asx);
                self.s.adjoint_into(&asx, y);
                conj_in_place(y);
            }
            _ => self.s.adjoint_into(&asx, y),
        }
    }
}

/// Result of a sub-preconditioned solve.
#[derive(Debug, Clone)]
pub struct SubsolveReport {
    /// Full-space view: `x = S x̃`, `residual = rhat`; the trace (if any) holds
    /// `x_t`, `rhat_t` and `w_t`. It has no `rbreve`, so lift through
    /// [`SubsolveReport::lifted`] rather than `full.lifted()`.
    pub full: SolveReport,
    /// The reduced run on `(Ã, b̃)`.
    pub reduced: SolveReport,
    /// `S` times the lifted reduced iterate, i.e. `S Ã† b̃` at the grade.
    pub lifted: Vec<C64>,
}

/// Runs MINRES (or its complex-symmetric variant) on the reduced system.
pub fn subsolve(
    a: &dyn LinearOperator,
    s: Arc<dyn SubPreconditioner>,
    b: &[C64],
    opts: &SolveOptions,
) -> Result<SubsolveReport> {
    let reduced = ReducedOperator::new(a, s.as_ref())?;
    run(a.kind(), &reduced, s.as_ref(), b, opts)
}

/// As [`subsolve`] but with `Ã` formed densely first.
pub fn subsolve_materialized(
    a: &dyn LinearOperator,
    s: Arc<dyn SubPreconditioner>,
    b: &[C64],
    opts: &SolveOptions,
) -> Result<SubsolveReport> {
    let dense = DenseOperator::new(ReducedOperator::new(a, s.as_ref())?.to_dense()?, a.kind())?;
    run(a.kind(), &dense, s.as_ref(), b, opts)
}

fn run(
    kind: Symmetry,
    reduced: &dyn LinearOperator,
    s: &dyn SubPreconditioner,
    b: &[C64],
    opts: &SolveOptions,
) -> Result<SubsolveReport> {
    if b.len() != s.rows() {
        return Err(Error::DimensionMismatch { expected: s.rows(), found: b.len() });
    }
    let cs = kind == Symmetry::ComplexSymmetric;
    let bt = if cs { s.transpose(b)? } else { s.adjoint(b)? };
    let rep = if cs { solve_cs(reduced, &bt, opts)? } else { solve(reduced, &bt, opts)? };

    let rhat_of = |r: &[C64]| if cs { s.apply_conj(r) } else { s.apply(r) };
    let lifted = s.apply(&rep.lifted()?)?;
    let trace = match &rep.trace {
        None => None,
        Some(tr) => {
            let mut out = Vec::with_capacity(tr.len());
            for rec in tr {
                // w_t = beta_t S v_t  (beta_t S conj(v_t) on the CS path)
                let v = if cs { s.apply(&crate::vector::conj(&rec.basis))? } else { s.apply(&rec.basis)? };
                out.push(IterRecord {
                    x: s.apply(&rec.x)?,
                    residual: rhat_of(&rec.residual)?,
                    companion: None,
                    basis: scale(C64::new(rec.beta, 0.0), &v),
                    krylov: None,
                    direction: s.apply(&rec.direction)?,
                    ..rec.clone()
                });
            }
            Some(out)
        }
    };
    let full = SolveReport {
        x: s.apply(&rep.x)?,
        residual: rhat_of(&rep.residual)?,
        companion: None,
        kind,
        termination: rep.termination,
        iterations: rep.iterations,
        phi: rep.phi,
        phi0: rep.phi0,
        initial_residual_norm: crate::vector::norm(&rhat_of(&bt)?),
        zero_tol: rep.zero_tol,
        trace,
    };
    Ok(SubsolveReport { full, reduced: rep, lifted })
}
