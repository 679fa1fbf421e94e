//! MINRES-type solvers that recover the pseudo-inverse solution `A† b` of
//! singular Hermitian, skew-Hermitian and complex-symmetric systems.
//!
//! The plain solvers ([`minres::solve`], [`minres::solve_cs`],
//! [`minres::solve_skew`]) return the last Krylov iterate together with its
//! residual; one rank-one projection ([`minres::lift`], [`minres::lift_cs`])
//! turns it into the minimum-norm least-squares solution. The preconditioned
//! solvers in [`pminres`] accept singular PSD preconditioners and lift to the
//! pseudo-inverse solution of the preconditioned problem.
//!
//! Around the solvers sit a dense [`oracle`] for verification, preconditioner
//! families ([`precon_factory`]), a non-positive-curvature monitor
//! ([`npc`]), LSQR / truncated SVD [`baselines`], and [`imaging`] helpers for
//! the deblurring experiment driven from [`experiments`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
mod dense;
pub mod error;
pub mod experiments;
pub mod imaging;
pub mod minres;
pub mod npc;
pub mod operator;
pub mod oracle;
pub mod pminres;
pub mod precon_factory;
pub mod random;
pub mod vector;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use minres::{lift, lift_cs, solve, solve_cs, solve_skew, SolveOptions, SolveReport, Termination};
pub use operator::{probe_symmetry, DenseOperator, GaussianBlurToeplitz, KroneckerOperator, LinearOperator, Symmetry};
pub use pminres::{plift, psolve_cs, psolve_h, subsolve, Preconditioner};
