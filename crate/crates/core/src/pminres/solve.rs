//! Preconditioned MINRES with a possibly singular PSD preconditioner.

use super::precond::Preconditioner;
use super::reorth::ReorthBuffer;
use crate::error::{Error, Result};
use crate::minres::kernel::{direction, psi, GradeWatch, Guards, Reflector};
use crate::minres::{IterRecord, SolveOptions, SolveReport, Termination};
use crate::operator::{LinearOperator, Symmetry};
use crate::vector::{axpy, conj_if, dot, is_finite, norm, scale, zeros};
use crate::C64;

/// Preconditioned MINRES for Hermitian `A`.
///
/// The report carries `rhat` in `residual` and `rbreve` in `companion`.
pub fn psolve_h(a: &dyn LinearOperator, m: &Preconditioner, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    if a.kind() != Symmetry::Hermitian {
        return Err(Error::KindMismatch { expected: "hermitian", found: a.kind() });
    }
    run(a, m, b, opts, false)
}

/// Preconditioned MINRES for complex-symmetric `A`.
pub fn psolve_cs(a: &dyn LinearOperator, m: &Preconditioner, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    if a.kind() != Symmetry::ComplexSymmetric {
        return Err(Error::KindMismatch { expected: "complex_symmetric", found: a.kind() });
    }
    run(a, m, b, opts, true)
}

/// `M conj?(z)` with `beta^2 = <conj?(z), M conj?(z)>`, clamping PSD roundoff.
fn precondition(m: &Preconditioner, z: &[C64], conj: bool) -> Result<(Vec<C64>, f64)> {
    let zz = conj_if(conj, z);
    let (w, e) = m.apply_with_energy(&zz)?;
    if e < 0.0 {
        if e < -1e-12 * norm(&zz) * norm(&w).max(norm(&zz)) {
            return Err(Error::NotPsd(e));
        }
        return Ok((w, 0.0));
    }
    Ok((w, e.sqrt()))
}

fn run(a: &dyn LinearOperator, m: &Preconditioner, b: &[C64], opts: &SolveOptions, conj: bool) -> Result<SolveReport> {
    opts.validate()?;
    let d = a.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: b.len() });
    }
    if m.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
    }
    if !is_finite(b) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let kind = if conj { Symmetry::ComplexSymmetric } else { Symmetry::Hermitian };
    let tol = opts.zero_tol;

    let mut z = b.to_vec();
    let (mut w, beta1) = precondition(m, &z, conj)?;
    let mut rhat = conj_if(conj, &w);
    let mut rbreve = b.to_vec();
    let mut report = SolveReport {
        x: zeros(d),
        residual: rhat.clone(),
        companion: Some(rbreve.clone()),
        kind,
        termination: Termination::RhsInPreconditionerNull,
        iterations: 0,
        phi: beta1,
        phi0: beta1,
        initial_residual_norm: norm(&rhat),
        zero_tol: tol,
        trace: opts.record_trace.then(Vec::new),
    };
    if beta1 == 0.0 {
        report.residual = zeros(d);
        return Ok(report);
    }

    let mut z_prev = zeros(d);
    let mut beta = beta1;
    let mut beta_prev = beta1;
    let mut x = zeros(d);
    let mut d1 = zeros(d);
    let mut d2 = zeros(d);
    let mut refl = Reflector::new(beta1, conj);
    let mut buffer = ReorthBuffer::new(conj);
    let mut guards = Guards::new(opts);
    let mut watch = GradeWatch::new();
    if opts.reorthogonalize {
        let inv = C64::new(1.0 / beta1, 0.0);
        buffer.push(scale(inv, &z), scale(inv, &w));
    }
    report.termination = Termination::MaxIter;

    for t in 1..=opts.max_iterations {
        let inv = C64::new(1.0 / beta, 0.0);
        let wn = scale(inv, &w);
        let q = a.apply(&wn)?;
        let mut alpha = dot(&conj_if(conj, &wn), &q);
        if !conj {
            alpha = C64::new(alpha.re, 0.0);
        }
        let mut z_next = q;
        axpy(-alpha * inv, &z, &mut z_next);
        axpy(C64::new(-beta / beta_prev, 0.0), &z_prev, &mut z_next);
        if opts.reorthogonalize {
            // Two passes on z; w is recomputed from the cleaned z, which equals
            // w - Y^H w in exact arithmetic.
            buffer.project_z(&mut z_next);
            buffer.project_z(&mut z_next);
        }
        let (w_next, beta_next) = precondition(m, &z_next, conj)?;

        let col = refl.column(alpha, beta_next);
        let phi_prev = refl.phi;
        if guards.gamma_is_zero(col.gamma2, alpha, beta, beta_next, t) {
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
                    residual: rhat.clone(),
                    companion: Some(rbreve.clone()),
                    basis: w.clone(),
                    krylov: Some(z.clone()),
                    direction: zeros(d),
                });
            }
            report.termination = Termination::GammaZero;
            report.iterations = t;
            break;
        }
        if t > 1 {
            let snap = || (t - 1, x.clone(), rhat.clone(), rbreve.clone(), refl.phi);
            if let Some((tb, xb, rh, rb, phib)) = watch.observe(psi(&col), guards.grade_threshold(), snap) {
                if let Some(tr) = report.trace.as_mut() {
                    tr.truncate(tb);
                }
                report.termination = Termination::GammaZero;
                report.iterations = tb;
                report.phi = phib;
                report.x = xb;
                report.residual = rh;
                report.companion = Some(rb);
                return Ok(report);
            }
        }

        let (c, s, tau, phi, eps_t) = refl.advance(&col, beta_next);
        let dt = direction(&wn, col.delta2, eps_t, &d1, &d2, col.gamma2);
        axpy(tau, &dt, &mut x);
        let coeff = refl.residual_coeff(phi_prev, c, col.gamma2);
        let s2 = s * s;
        for (ri, zi) in rbreve.iter_mut().zip(&z_next) {
            *ri = *ri * s2 - coeff * zi;
        }
        let beta_zero = beta_next <= tol * beta1 || phi <= tol * beta1;
        if beta_zero {
            rhat.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        } else {
            let wb = conj_if(conj, &w_next);
            for (ri, wi) in rhat.iter_mut().zip(&wb) {
                *ri = *ri * s2 - coeff * wi;
            }
        }
        if !is_finite(&x) {
            return Err(Error::NonFinite("pminres iterate"));
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
                residual: rhat.clone(),
                companion: Some(rbreve.clone()),
                basis: w.clone(),
                krylov: Some(z.clone()),
                direction: dt.clone(),
            });
        }
        report.iterations = t;
        d2 = std::mem::replace(&mut d1, dt);

        if beta_zero {
            report.termination = Termination::BetaZero;
            break;
        }
        if let Some(target) = opts.residual_target {
            if phi <= target * beta1 {
                report.termination = Termination::ResidualTarget;
                break;
            }
        }
        if opts.reorthogonalize {
            let inv = C64::new(1.0 / beta_next, 0.0);
            buffer.push(scale(inv, &z_next), scale(inv, &w_next));
        }
        z_prev = std::mem::replace(&mut z, z_next);
        w = w_next;
        beta_prev = beta;
        beta = beta_next;
    }

    report.phi = refl.phi;
    report.x = x;
    report.residual = rhat;
    report.companion = Some(rbreve);
    Ok(report)
}
