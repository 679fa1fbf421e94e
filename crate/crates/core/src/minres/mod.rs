//! MINRES for singular Hermitian, skew-Hermitian and complex-symmetric systems,
//! with the lifting step that turns the final iterate into `A† b`.
//!
//! The Hermitian and complex-symmetric variants share one short-recurrence
//! kernel; the complex-symmetric path works on conjugated Saunders vectors.

mod complex_symmetric;
mod hermitian;
pub(crate) mod kernel;

pub use complex_symmetric::{lift_cs, solve_cs};
pub use hermitian::{lift, solve, solve_skew};

use crate::error::{Error, Result};
use crate::operator::Symmetry;
use crate::vector::norm;
use crate::C64;

/// Default relative zero tolerance for `beta_{t+1}` and `gamma2_t`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Default grade tolerance: `gamma2_t <= grade_tol · ||T||` also ends the run
/// as `GammaZero`.
pub const DEFAULT_GRADE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Hard cap on iterations. Must be at least 1.
    pub max_iterations: usize,
    /// Relative zero tolerance used by the breakdown tests.
    pub zero_tol: f64,
    /// Relative tolerance, against a running estimate of `||T_t||`, under
    /// which `gamma2_t` counts as zero. Without reorthogonalization
    /// `beta_{g+1}` only falls to roughly `1e-10 ||T||` at the grade, which
    /// the strict `zero_tol` test misses.
    ///
    /// The same threshold arms the numerical-grade watch on
    /// `||A r_t|| / phi_t`: below it the best iterate is kept and the run
    /// stops (as `GammaZero`) once that ratio climbs again.
    pub grade_tol: f64,
    /// Stop once `phi_t <= target * phi_0`. Off by default.
    pub residual_target: Option<f64>,
    /// Keep every iterate, residual and scalar. O(t·d) memory.
    pub record_trace: bool,
    /// Full reorthogonalization of the Lanczos/Saunders vectors.
    pub reorthogonalize: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            zero_tol: DEFAULT_ZERO_TOL,
            grade_tol: DEFAULT_GRADE_TOL,
            residual_target: None,
            record_trace: false,
            reorthogonalize: false,
        }
    }
}

impl SolveOptions {
    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_reorthogonalization(mut self, on: bool) -> Self {
        self.reorthogonalize = on;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.zero_tol > 0.0) {
            return Err(Error::InvalidConfig("zero_tol must be positive".into()));
        }
        if !(self.grade_tol >= 0.0) {
            return Err(Error::InvalidConfig("grade_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `beta_{t+1} = 0` or `phi_t = 0`: the residual (or `rhat`) vanished.
    BetaZero,
    /// `gamma2_t = 0`: grade reached with a nonzero residual; lift to get `A† b`.
    GammaZero,
    ResidualTarget,
    MaxIter,
    /// `M b = 0`, nothing to iterate on.
    RhsInPreconditionerNull,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::BetaZero => "beta_zero",
            Termination::GammaZero => "gamma_zero",
            Termination::ResidualTarget => "residual_target",
            Termination::MaxIter => "max_iter",
            Termination::RhsInPreconditionerNull => "rhs_in_null_m",
        }
    }

    /// Terminated by one of the exact-arithmetic breakdown branches.
    pub fn reached_grade(self) -> bool {
        matches!(self, Termination::BetaZero | Termination::GammaZero)
    }
}

/// Per-iteration snapshot.
///
/// For plain MINRES `residual` is `r_t` and `basis` is `v_t`. For the
/// preconditioned solver `residual` is `rhat_t`, `companion` is `rbreve_t`,
/// `basis` is `w_t` and `krylov` is `z_t`.
#[derive(Debug, Clone)]
pub struct IterRecord {
    pub t: usize,
    pub alpha: C64,
    /// `beta_t`
    pub beta: f64,
    /// `beta_{t+1}`
    pub beta_next: f64,
    /// Pre-rotation `gamma_t`.
    pub gamma: C64,
    pub gamma2: f64,
    pub delta2: C64,
    /// `epsilon_{t+1}`
    pub epsilon_next: C64,
    /// `delta_{t+1}`
    pub delta_next: C64,
    pub c: C64,
    pub s: f64,
    pub tau: C64,
    pub phi: f64,
    pub x: Vec<C64>,
    pub residual: Vec<C64>,
    pub companion: Option<Vec<C64>>,
    pub basis: Vec<C64>,
    pub krylov: Option<Vec<C64>>,
    pub direction: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<C64>,
    /// `r_t` for plain MINRES, `rhat_t` for preconditioned MINRES.
    pub residual: Vec<C64>,
    /// `rbreve_t`, preconditioned runs only.
    pub companion: Option<Vec<C64>>,
    pub kind: Symmetry,
    pub termination: Termination,
    pub iterations: usize,
    /// `phi_t` at exit.
    pub phi: f64,
    /// `phi_0`: `||b||`, or `sqrt(<b, Mb>)` when preconditioned.
    pub phi0: f64,
    /// Norm of the initial residual quantity (`||b||` or `||Mb||`).
    pub initial_residual_norm: f64,
    pub zero_tol: f64,
    pub trace: Option<Vec<IterRecord>>,
}

impl SolveReport {
    /// Grade estimate: the termination iteration when a breakdown branch fired.
    pub fn grade(&self) -> Option<usize> {
        self.termination.reached_grade().then_some(self.iterations)
    }

    /// True when the residual (proxy) is zero under the report's tolerance.
    pub fn residual_vanished(&self) -> bool {
        norm(&self.residual) <= self.zero_tol * self.initial_residual_norm
    }

    /// Lifted iterate: `A† b` at the grade for plain runs, `S Ã† b̃` for
    /// preconditioned ones.
    pub fn lifted(&self) -> Result<Vec<C64>> {
        if self.companion.is_some() {
            return crate::pminres::plift(self);
        }
        if self.residual_vanished() {
            return Ok(self.x.clone());
        }
        Ok(match self.kind {
            Symmetry::ComplexSymmetric => lift_cs(&self.x, &self.residual),
            _ => lift(&self.x, &self.residual),
        })
    }
}
