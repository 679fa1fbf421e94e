//! Shared short-recurrence pieces: the reflector bookkeeping and the
//! unpreconditioned Lanczos/Saunders loop.

use super::{IterRecord, SolveOptions, SolveReport, Termination};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Symmetry};
use crate::vector::{axpy, conj_if, dot, is_finite, norm, scale, zeros};
use crate::C64;

fn conj_if_s(flag: bool, a: C64) -> C64 {
    if flag {
        a.conj()
    } else {
        a
    }
}

/// Output of applying the previous reflector to the new tridiagonal column.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Column {
    pub delta2: C64,
    pub epsilon_next: C64,
    pub gamma: C64,
    pub delta_next: C64,
    pub gamma2: f64,
}

/// Reflector state carried between iterations.
#[derive(Debug, Clone)]
pub(crate) struct Reflector {
    pub conj: bool,
    /// `c_{t-1}`
    pub c: C64,
    /// `s_{t-1}`
    pub s: f64,
    /// `delta_t`
    pub delta: C64,
    /// `epsilon_t`
    pub epsilon: C64,
    /// `phi_{t-1}`
    pub phi: f64,
}

impl Reflector {
    pub fn new(phi0: f64, conj: bool) -> Self {
        Self { conj, c: C64::new(-1.0, 0.0), s: 0.0, delta: C64::new(0.0, 0.0), epsilon: C64::new(0.0, 0.0), phi: phi0 }
    }

    pub fn column(&self, alpha: C64, beta_next: f64) -> Column {
        let cc = conj_if_s(self.conj, self.c);
        let gamma = self.s * self.delta - self.c * alpha;
        Column {
            delta2: cc * self.delta + self.s * alpha,
            epsilon_next: C64::new(self.s * beta_next, 0.0),
            gamma,
            delta_next: -self.c * beta_next,
            gamma2: gamma.norm().hypot(beta_next),
        }
    }

    /// Commits the new reflector. Returns `(c_t, s_t, tau_t, phi_t, epsilon_t)`,
    /// where `epsilon_t` is the value the direction update needs.
    pub fn advance(&mut self, col: &Column, beta_next: f64) -> (C64, f64, C64, f64, C64) {
        let c = col.gamma / col.gamma2;
        let s = beta_next / col.gamma2;
        let tau = conj_if_s(self.conj, c) * self.phi;
        let phi = s * self.phi;
        let eps_t = self.epsilon;
        self.c = c;
        self.s = s;
        self.delta = col.delta_next;
        self.epsilon = col.epsilon_next;
        self.phi = phi;
        (c, s, tau, phi, eps_t)
    }

    /// Coefficient `phi_t c_t / beta_{t+1}` (conjugated on the CS path),
    /// rewritten as `phi_{t-1} c_t / gamma2_t` so it stays finite when `beta_{t+1} = 0`.
    pub fn residual_coeff(&self, phi_prev: f64, c: C64, gamma2: f64) -> C64 {
        conj_if_s(self.conj, c) * (phi_prev / gamma2)
    }
}

/// `d_t = (u - delta2 d_{t-1} - epsilon_t d_{t-2}) / gamma2`
pub(crate) fn direction(u: &[C64], delta2: C64, eps: C64, d1: &[C64], d2: &[C64], gamma2: f64) -> Vec<C64> {
    let inv = 1.0 / gamma2;
    u.iter().zip(d1).zip(d2).map(|((ui, a), b)| (ui - delta2 * a - eps * b) * inv).collect()
}

/// Breakdown tests for one step.
#[derive(Debug, Clone)]
pub(crate) struct Guards {
    zero_tol: f64,
    grade_tol: f64,
    /// Running max of `|alpha_t| + beta_t + beta_{t+1}` over the tridiagonal.
    t_scale: f64,
}

impl Guards {
    pub fn new(opts: &SolveOptions) -> Self {
        Self { zero_tol: opts.zero_tol, grade_tol: opts.grade_tol, t_scale: 0.0 }
    }

    /// `beta_t` is the previous off-diagonal (0 at `t = 1`, where the
    /// Lanczos `beta_1` is `||b||` rather than an entry of `T`).
    pub fn gamma_is_zero(&mut self, gamma2: f64, alpha: C64, beta_t: f64, beta_next: f64, t: usize) -> bool {
        let off = if t == 1 { 0.0 } else { beta_t };
        self.t_scale = self.t_scale.max(alpha.norm() + off + beta_next);
        gamma2 <= self.zero_tol * (alpha.norm() + beta_t + beta_next) || gamma2 <= self.grade_tol * self.t_scale
    }

    /// `grade_tol · ||T||` with the running estimate of `||T||`.
    pub fn grade_threshold(&self) -> f64 {
        self.grade_tol * self.t_scale
    }
}

/// How far `psi` may climb above its minimum before the watch gives up.
const PSI_RISE: f64 = 10.0;

/// Numerical-grade watch on `psi_{t-1} = ||A r_{t-1}|| / phi_{t-1}
/// = hypot(|gamma_t|, |delta_{t+1}|)` (of the reduced operator when
/// preconditioned), available at step `t` before the update.
///
/// On a singular inconsistent system whose range component converges well
/// before the exact grade, the remaining steps run on rounding noise and
/// `x_t` blows up. Once `psi` is below `grade_tol ||T||` the watch keeps the
/// iterate with the smallest `psi` and stops the run when `psi` climbs back
/// (above the threshold or `PSI_RISE` times its minimum). `A r = 0` is the
/// grade event in exact arithmetic, so this is reported as `GammaZero`.
pub(crate) struct GradeWatch<S> {
    best: Option<(f64, S)>,
}

impl<S> GradeWatch<S> {
    pub fn new() -> Self {
        Self { best: None }
    }

    /// Returns the snapshot to restore when the run should stop.
    pub fn observe(&mut self, psi: f64, threshold: f64, snapshot: impl FnOnce() -> S) -> Option<S> {
        let best_psi = self.best.as_ref().map(|b| b.0);
        match best_psi {
            Some(bp) if psi > threshold || psi > PSI_RISE * bp => self.best.take().map(|b| b.1),
            Some(bp) if psi >= bp => None,
            _ if psi <= threshold => {
                self.best = Some((psi, snapshot()));
                None
            }
            _ => None,
        }
    }
}

pub(crate) fn psi(col: &Column) -> f64 {
    col.gamma.norm().hypot(col.delta_next.norm())
}

/// Two-pass classical Gram-Schmidt against an orthonormal list.
pub(crate) fn orthogonalize(q: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for v in basis {
            let h = dot(v, q);
            axpy(-h, v, q);
        }
    }
}

/// Unpreconditioned MINRES. `conj = true` runs the Saunders (complex-symmetric) variant.
pub(crate) fn run(a: &dyn LinearOperator, b: &[C64], opts: &SolveOptions, kind: Symmetry) -> Result<SolveReport> {
    opts.validate()?;
    let d = a.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: b.len() });
    }
    if !is_finite(b) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let conj = kind == Symmetry::ComplexSymmetric;
    let tol = opts.zero_tol;
    let beta1 = norm(b);
    let mut report = SolveReport {
        x: zeros(d),
        residual: b.to_vec(),
        companion: None,
        kind,
        termination: Termination::BetaZero,
        iterations: 0,
        phi: beta1,
        phi0: beta1,
        initial_residual_norm: beta1,
        zero_tol: tol,
        trace: opts.record_trace.then(Vec::new),
    };
    if beta1 == 0.0 {
        return Ok(report);
    }

    let mut v_prev = zeros(d);
    let mut v = scale(C64::new(1.0 / beta1, 0.0), b);
    let mut beta = beta1;
    let mut x = zeros(d);
    let mut r = b.to_vec();
    let mut d1 = zeros(d);
    let mut d2 = zeros(d);
    let mut refl = Reflector::new(beta1, conj);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut guards = Guards::new(opts);
    let mut watch = GradeWatch::new();
    report.termination = Termination::MaxIter;

    for t in 1..=opts.max_iterations {
        let mut q = if conj { a.apply_conj(&v)? } else { a.apply(&v)? };
        let mut alpha = dot(&v, &q);
        if !conj {
            alpha = C64::new(alpha.re, 0.0);
        }
        axpy(-alpha, &v, &mut q);
        axpy(C64::new(-beta, 0.0), &v_prev, &mut q);
        if opts.reorthogonalize {
            basis.push(v.clone());
            orthogonalize(&mut q, &basis);
        }
        let beta_next = norm(&q);
        let col = refl.column(alpha, beta_next);
        let phi_prev = refl.phi;

        if guards.gamma_is_zero(col.gamma2, alpha, beta, beta_next, t) {
            // Grade reached with a nonzero residual: x, r and phi stay put.
            if let Some(tr) = report.trace.as_mut() {
                tr.push(IterRecord {
                    t,
                    alpha,
                    beta,
                    beta_next,
                    gamma: col.gamma,
                    gamma2: col.gamma2,
                    delta2: col.delta2,
                    epsilon_next: col.epsilon_next,
                    delta_next: col.delta_next,
                    c: C64::new(0.0, 0.0),
                    s: 1.0,
                    tau: C64::new(0.0, 0.0),
                    phi: phi_prev,
                    x: x.clone(),
                    residual: r.clone(),
                    companion: None,
                    basis: v.clone(),
                    krylov: None,
                    direction: zeros(d),
                });
            }
            report.termination = Termination::GammaZero;
            report.iterations = t;
            break;
        }
        if t > 1 {
            let snap = || (t - 1, x.clone(), r.clone(), refl.phi);
            if let Some((tb, xb, rb, phib)) = watch.observe(psi(&col), guards.grade_threshold(), snap) {
                if let Some(tr) = report.trace.as_mut() {
                    tr.truncate(tb);
                }
                report.termination = Termination::GammaZero;
                report.iterations = tb;
                report.phi = phib;
                report.x = xb;
                report.residual = rb;
                return Ok(report);
            }
        }

        let (c, s, tau, phi, eps_t) = refl.advance(&col, beta_next);
        let u = conj_if(conj, &v);
        let dt = direction(&u, col.delta2, eps_t, &d1, &d2, col.gamma2);
        axpy(tau, &dt, &mut x);
        let coeff = refl.residual_coeff(phi_prev, c, col.gamma2);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri = *ri * (s * s) - coeff * qi;
        }
        if !is_finite(&x) {
            return Err(Error::NonFinite("minres iterate"));
        }

        if let Some(tr) = report.trace.as_mut() {
            tr.push(IterRecord {
                t,
                alpha,
                beta,
                beta_next,
                gamma: col.gamma,
                gamma2: col.gamma2,
                delta2: col.delta2,
                epsilon_next: col.epsilon_next,
                delta_next: col.delta_next,
                c,
                s,
                tau,
                phi,
                x: x.clone(),
                residual: r.clone(),
                companion: None,
                basis: v.clone(),
                krylov: None,
                direction: dt.clone(),
            });
        }
        report.iterations = t;
        d2 = std::mem::replace(&mut d1, dt);

        // phi_t = s_t phi_{t-1}: a vanished residual is the same event as beta_{t+1} = 0.
        if beta_next <= tol * beta1 || phi <= tol * beta1 {
            report.termination = Termination::BetaZero;
            break;
        }
        if let Some(target) = opts.residual_target {
            if phi <= target * beta1 {
                report.termination = Termination::ResidualTarget;
                break;
            }
        }
        let inv = C64::new(1.0 / beta_next, 0.0);
        v_prev = std::mem::replace(&mut v, scale(inv, &q));
        beta = beta_next;
    }

    report.phi = refl.phi;
    report.x = x;
    report.residual = r;
    Ok(report)
}
