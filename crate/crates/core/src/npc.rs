//! Non-positive-curvature monitoring for preconditioned Hermitian MINRES.
//!
//! The monitor reads a recorded trace after the fact. It flags the first
//! iteration with `-c_{t-1} γ_t <= 0`, where `γ_t` is the value entering the
//! rotation at step `t` (before the reflector is applied), and collects the
//! scalars that are monotone before that point.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::minres::SolveReport;
use crate::operator::{LinearOperator, Symmetry};
use crate::pminres::{Preconditioner, SubsolveReport};
use crate::vector::{dot, norm, sub};
use crate::C64;

/// Relative tolerance for the detection test and for `λ_min(T_t)`.
pub const NPC_TOL: f64 = 1e-10;
/// Relative tolerance for [`verify_identities`].
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct NpcCertificate {
    pub detected: bool,
    /// First iteration at which the test fired.
    pub iteration: Option<usize>,
    /// `<rhat_{t-1}, A rhat_{t-1}>` evaluated with `A`.
    pub curvature: Option<f64>,
    /// The same quantity from the recurrence, `-phi_{t-1}^2 c_{t-1} γ_t`.
    pub predicted_curvature: Option<f64>,
    /// `rhat_{t-1}`, a non-positive curvature direction in `range(M)`.
    pub direction: Option<Vec<C64>>,
    /// `λ_min(T_t)` at detection, or of the final `T` otherwise.
    pub lambda_min: f64,
    /// Scale of `T` used by the tolerances: `max_t |α_t| + β_t + β_{t+1}`.
    pub t_scale: f64,
}

impl NpcCertificate {
    /// True when detection happened strictly before the last iteration.
    pub fn detected_before(&self, iterations: usize) -> bool {
        matches!(self.iteration, Some(t) if t < iterations)
    }
}

/// Per-iteration scalars, index 0 being the zero initial iterate.
#[derive(Debug, Clone, Default)]
pub struct MonotonicityTrace {
    /// `m(x_t) = <x_t, A x_t>/2 - <b, x_t>`
    pub model: Vec<f64>,
    /// `<x_t, b>`
    pub xb: Vec<f64>,
    /// `||x_t||_{M†}`; empty when no pseudo-inverse of `M` is available.
    pub mdag_norm: Vec<f64>,
    /// `-c_{t-1} γ_t` for `t >= 1` (entry 0 is unused and set to NaN).
    pub npc_test: Vec<f64>,
    /// `λ_min(T_t)` for `t >= 1` (entry 0 is NaN).
    pub lambda_min: Vec<f64>,
    /// Diagonal of `T`.
    pub alpha: Vec<f64>,
    /// Off-diagonal of `T`: `beta[t-1]` is `β_{t+1}`.
    pub beta: Vec<f64>,
    /// Scale used for the strictness margins, `||b|| max(1, ||A||)`.
    pub scale: f64,
}

impl MonotonicityTrace {
    /// Monotonicity failures over `1..=upto` with margin `margin · scale`.
    pub fn violations(&self, upto: usize, margin: f64) -> Vec<Violation> {
        let tol = margin * self.scale;
        let mut out = Vec::new();
        let upto = upto.min(self.model.len().saturating_sub(1));
        for t in 1..=upto {
            let dm = self.model[t - 1] - self.model[t];
            if dm <= -tol {
                out.push(Violation::new(t, "model_decrease", dm));
            }
            let db = self.xb[t] - self.xb[t - 1];
            if db <= -tol {
                out.push(Violation::new(t, "xb_increase", db));
            }
            if !self.mdag_norm.is_empty() {
                let dn = self.mdag_norm[t] - self.mdag_norm[t - 1];
                if dn <= -tol {
                    out.push(Violation::new(t, "mdag_norm_increase", dn));
                }
            }
        }
        out
    }
}

/// One failed identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub iteration: usize,
    pub identity: &'static str,
    pub magnitude: f64,
}

impl Violation {
    fn new(iteration: usize, identity: &'static str, magnitude: f64) -> Self {
        Self { iteration, identity, magnitude }
    }

    pub const CSV_HEADER: &'static str = "iteration,identity,magnitude";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:e}", self.iteration, self.identity, self.magnitude)
    }
}

/// CSV text (header plus one row per violation).
pub fn violations_csv(v: &[Violation]) -> String {
    let mut s = String::from(Violation::CSV_HEADER);
    s.push('\n');
    for row in v {
        s.push_str(&row.csv_row());
        s.push('\n');
    }
    s
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta[..alpha.len() - 1]`.
pub fn tridiagonal_lambda_min(alpha: &[f64], beta: &[f64]) -> f64 {
    let t = alpha.len();
    if t == 0 {
        return f64::NAN;
    }
    let m = DMatrix::<f64>::from_fn(t, t, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    crate::dense::symmetric_eigen(&m).map(|(v, _)| v.iter().cloned().fold(f64::INFINITY, f64::min)).unwrap_or(f64::NAN)
}

fn mdag_norms(m: &Preconditioner) -> Option<impl Fn(&[C64]) -> f64 + '_> {
    let econ = match m.economy() {
        Some(e) => e.clone(),
        None => Preconditioner::from_dense(m.dense_matrix()?).ok()?.economy()?.clone(),
    };
    Some(move |x: &[C64]| dot(x, &econ.pinv_apply(x)).re.max(0.0).sqrt())
}

/// Scans a traced `psolve_h` report.
pub fn attach(
    report: &SolveReport,
    a: &dyn LinearOperator,
    m: &Preconditioner,
    b: &[C64],
) -> Result<(NpcCertificate, MonotonicityTrace)> {
    match mdag_norms(m) {
        Some(f) => scan(report, a, b, Some(&f)),
        None => scan(report, a, b, None),
    }
}

/// As [`attach`] for a sub-preconditioned run; `||x_t||_{M†}` is read as
/// `||x̃_t||`, which assumes `S` has full column rank.
pub fn attach_subsolve(
    sub: &SubsolveReport,
    a: &dyn LinearOperator,
    b: &[C64],
) -> Result<(NpcCertificate, MonotonicityTrace)> {
    let reduced = sub.reduced.trace.as_ref().ok_or(Error::InvalidConfig("trace recording is off".into()))?;
    let norms: Vec<f64> = reduced.iter().map(|r| norm(&r.x)).collect();
    let (cert, mut mono) = scan(&sub.full, a, b, None)?;
    mono.mdag_norm = std::iter::once(0.0).chain(norms).collect();
    Ok((cert, mono))
}

/// `||x||_{M†}` evaluator.
type MdagNorm<'a> = dyn Fn(&[C64]) -> f64 + 'a;

fn scan(
    report: &SolveReport,
    a: &dyn LinearOperator,
    b: &[C64],
    mdag: Option<&MdagNorm<'_>>,
) -> Result<(NpcCertificate, MonotonicityTrace)> {
    if report.kind != Symmetry::Hermitian || a.kind() != Symmetry::Hermitian {
        return Err(Error::KindMismatch { expected: "hermitian", found: report.kind });
    }
    let trace = report.trace.as_ref().ok_or(Error::InvalidConfig("trace recording is off".into()))?;
    let mut mono = MonotonicityTrace {
        model: vec![0.0],
        xb: vec![0.0],
        mdag_norm: if mdag.is_some() { vec![0.0] } else { Vec::new() },
        npc_test: vec![f64::NAN],
        lambda_min: vec![f64::NAN],
        ..Default::default()
    };
    let mut a_est: f64 = 0.0;
    let mut t_scale: f64 = 0.0;
    let mut c_prev = C64::new(-1.0, 0.0);
    let mut phi_prev = report.phi0;
    let mut prev_residual: Option<&[C64]> = None;
    let mut hit: Option<(usize, f64, f64)> = None;

    for rec in trace {
        let ax = a.apply(&rec.x)?;
        let nx = norm(&rec.x);
        if nx > 0.0 {
            a_est = a_est.max(norm(&ax) / nx);
        }
        mono.model.push(0.5 * dot(&rec.x, &ax).re - dot(b, &rec.x).re);
        mono.xb.push(dot(&rec.x, b).re);
        if let Some(f) = mdag {
            mono.mdag_norm.push(f(&rec.x));
        }
        mono.alpha.push(rec.alpha.re);
        mono.beta.push(rec.beta_next);
        t_scale = t_scale.max(rec.alpha.norm() + if rec.t == 1 { 0.0 } else { rec.beta } + rec.beta_next);
        let test = -(c_prev * rec.gamma).re;
        mono.npc_test.push(test);
        mono.lambda_min.push(tridiagonal_lambda_min(&mono.alpha, &mono.beta));
        if hit.is_none() && test <= NPC_TOL * t_scale {
            hit = Some((rec.t, test, -phi_prev * phi_prev * (c_prev * rec.gamma).re));
        }
        if hit.is_none() {
            prev_residual = Some(&rec.residual);
        }
        c_prev = rec.c;
        phi_prev = rec.phi;
    }
    mono.scale = norm(b) * a_est.max(1.0);

    let cert = match hit {
        Some((t, _, predicted)) => {
            // rhat_{t-1}; rhat_0 = M b is not in the trace.
            let dir = if t == 1 { initial_rhat(trace) } else { prev_residual.expect("t > 1").to_vec() };
            let curvature = dot(&dir, &a.apply(&dir)?).re;
            NpcCertificate {
                detected: true,
                iteration: Some(t),
                curvature: Some(curvature),
                predicted_curvature: Some(predicted),
                direction: Some(dir),
                lambda_min: mono.lambda_min[t],
                t_scale,
            }
        }
        None => NpcCertificate {
            detected: false,
            iteration: None,
            curvature: None,
            predicted_curvature: None,
            direction: None,
            lambda_min: mono.lambda_min.last().cloned().unwrap_or(f64::NAN),
            t_scale,
        },
    };
    Ok((cert, mono))
}

/// `rhat_0 = M b = beta_1 w_1`; the trace stores the unnormalized `w_1`.
fn initial_rhat(trace: &[crate::minres::IterRecord]) -> Vec<C64> {
    trace[0].basis.clone()
}

/// Checks the preconditioned Hermitian MINRES identities over the pre-NPC
/// prefix. An empty list means every check passed.
///
/// Checked, with `r_t = b - A x_t` and `rhat_t` the recorded proxy:
/// `<rhat_t, A x_i> = 0` for `i <= t`, `<rhat_i, A rhat_t> = 0` for `i != t`,
/// `<rhat_{t-1}, A rhat_{t-1}> = -phi_{t-1}^2 c_{t-1} γ_t`,
/// `<rhat_t, b> = phi_t^2`, `<τ_t d_t, r_{t-j}> > 0` and
/// `<x_t, b> - <x_t, A x_t> > 0`.
pub fn verify_identities(
    cert: &NpcCertificate,
    report: &SolveReport,
    a: &dyn LinearOperator,
    b: &[C64],
) -> Result<Vec<Violation>> {
    let trace = report.trace.as_ref().ok_or(Error::InvalidConfig("trace recording is off".into()))?;
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    // Identities hold through detection; positivity only strictly before it.
    let last = cert.iteration.unwrap_or(report.iterations).min(trace.len());
    let strict = cert.iteration.map(|t| t - 1).unwrap_or(report.iterations).min(trace.len());
    let tol = IDENTITY_TOL;

    let mut rh: Vec<Vec<C64>> = vec![initial_rhat(trace)];
    rh.extend(trace.iter().map(|r| r.residual.clone()));
    let a_rh: Vec<Vec<C64>> = rh.iter().map(|v| a.apply(v)).collect::<Result<_>>()?;
    let xs: Vec<&[C64]> = trace.iter().map(|r| r.x.as_slice()).collect();
    let a_x: Vec<Vec<C64>> = xs.iter().map(|x| a.apply(x)).collect::<Result<_>>()?;

    let s_r = norm(&rh[0]);
    let s_b = norm(b);
    let s_x = xs.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let s_a = a_rh
        .iter()
        .zip(rh.iter().map(|v| v.as_slice()))
        .chain(a_x.iter().zip(xs.iter().copied()))
        .filter(|(_, v)| norm(v) > 0.0)
        .map(|(av, v)| norm(av) / norm(v))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut out = Vec::new();
    let mut c_prev = C64::new(-1.0, 0.0);
    let mut phi_prev = report.phi0;
    for t in 1..=last {
        let rec = &trace[t - 1];
        for i in 1..=t {
            let v = dot(&rh[t], &a_x[i - 1]).norm();
            if v > tol * s_r * s_a * s_x {
                out.push(Violation::new(t, "rhat_A_x_orthogonal", v));
            }
        }
        for (i, r) in rh.iter().enumerate().take(last + 1).skip(1) {
            if i != t {
                let v = dot(r, &a_rh[t]).norm();
                if v > tol * s_r * s_r * s_a {
                    out.push(Violation::new(t, "rhat_A_rhat_orthogonal", v));
                }
            }
        }
        let curv = dot(&rh[t - 1], &a_rh[t - 1]);
        let predicted = -phi_prev * phi_prev * (c_prev * rec.gamma).re;
        let v = (curv - predicted).norm();
        if v > tol * s_r * s_r * s_a {
            out.push(Violation::new(t, "curvature_identity", v));
        }
        let v = (dot(&rh[t], b) - rec.phi * rec.phi).norm();
        if v > tol * s_r * s_b {
            out.push(Violation::new(t, "rhat_b_equals_phi2", v));
        }
        if t <= strict {
            let step: Vec<C64> = rec.direction.iter().map(|d| rec.tau * d).collect();
            let s_step = norm(&step);
            for j in 0..=t {
                let r = if t == j { b.to_vec() } else { sub(b, &a_x[t - j - 1]) };
                let v = dot(&step, &r).re;
                if v <= -tol * s_step * s_b {
                    out.push(Violation::new(t, "step_residual_positive", v));
                }
            }
            let v = dot(xs[t - 1], b).re - dot(xs[t - 1], &a_x[t - 1]).re;
            if v <= -tol * s_x * s_b.max(s_a * s_x) {
                out.push(Violation::new(t, "xb_minus_xAx_positive", v));
            }
        }
        c_prev = rec.c;
        phi_prev = rec.phi;
    }
    Ok(out)
}
