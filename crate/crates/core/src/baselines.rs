//! Reference solvers: LSQR and truncated SVD.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::oracle::{matvec, svd, RANK_TOL};
use crate::random::CMat;
use crate::vector::{norm, scale, sub, zeros};
use crate::C64;

#[derive(Debug, Clone)]
pub struct BaselineReport {
    pub x: Vec<C64>,
    pub residual_norm: f64,
    /// LSQR iterations performed.
    pub iterations: Option<usize>,
    /// Singular triplets kept by a truncated SVD.
    pub rank: Option<usize>,
    pub seconds: f64,
    /// Per-iteration LSQR residual estimates `||b - A x_k||`, starting at `||b||`.
    pub residual_history: Vec<f64>,
}

/// `||A^H r|| / (||A||_F ||r||)` under which LSQR counts as converged.
const NORMAL_FLOOR: f64 = 1e-14;

/// LSQR (Paige and Saunders) with a fixed iteration budget.
///
/// Stops early only on an exact breakdown: `alpha` or `beta` zero, or the
/// normal-equation residual at rounding level (`NORMAL_FLOOR`). Each
/// iteration costs one `A` and one `A^H` application.
pub fn lsqr(a: &dyn LinearOperator, b: &[C64], max_iter: usize) -> Result<BaselineReport> {
    let d = a.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: b.len() });
    }
    let start = Instant::now();
    let mut x = zeros(d);
    let mut beta = norm(b);
    let mut history = vec![beta];
    if beta == 0.0 {
        return Ok(BaselineReport {
            x,
            residual_norm: 0.0,
            iterations: Some(0),
            rank: None,
            seconds: start.elapsed().as_secs_f64(),
            residual_history: history,
        });
    }
    let tiny = 1e-14;
    let mut u = scale(C64::new(1.0 / beta, 0.0), b);
    let mut v = a.apply_adjoint(&u)?;
    let mut alpha = norm(&v);
    let mut iterations = 0;
    let mut phibar = beta;
    if alpha > 0.0 {
        v = scale(C64::new(1.0 / alpha, 0.0), &v);
        let mut w = v.clone();
        let mut rhobar = alpha;
        let anorm_floor = alpha;
        let mut anorm2 = alpha * alpha;
        for _ in 0..max_iter {
            iterations += 1;
            // beta u = A v - alpha u
            let mut au = a.apply(&v)?;
            for (p, q) in au.iter_mut().zip(&u) {
                *p -= alpha * q;
            }
            beta = norm(&au);
            if beta > 0.0 {
                u = scale(C64::new(1.0 / beta, 0.0), &au);
                let mut av = a.apply_adjoint(&u)?;
                for (p, q) in av.iter_mut().zip(&v) {
                    *p -= beta * q;
                }
                alpha = norm(&av);
                if alpha > 0.0 {
                    v = scale(C64::new(1.0 / alpha, 0.0), &av);
                }
            } else {
                alpha = 0.0;
            }
            let rho = rhobar.hypot(beta);
            let c = rhobar / rho;
            let s = beta / rho;
            let theta = s * alpha;
            rhobar = -c * alpha;
            let phi = c * phibar;
            phibar *= s;
            let step = phi / rho;
            for (xi, wi) in x.iter_mut().zip(&w) {
                *xi += step * wi;
            }
            let coef = theta / rho;
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = vi - coef * *wi;
            }
            history.push(phibar.abs());
            anorm2 += alpha * alpha + beta * beta;
            // ||A^H r_k|| = |phibar alpha c|. At rounding level the
            // bidiagonalization only feeds noise back in, so treat it as the
            // exact breakdown it stands for.
            let arnorm = (phibar * alpha * c).abs();
            if beta <= tiny * anorm_floor
                || alpha <= tiny * anorm_floor
                || arnorm <= NORMAL_FLOOR * anorm2.sqrt() * phibar.abs()
            {
                break;
            }
        }
    }
    let residual_norm = norm(&sub(b, &a.apply(&x)?));
    Ok(BaselineReport {
        x,
        residual_norm,
        iterations: Some(iterations),
        rank: None,
        seconds: start.elapsed().as_secs_f64(),
        residual_history: history,
    })
}

/// How many singular triplets a truncated SVD keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Rank(usize),
    /// Keep `sigma_k > rel · sigma_max`.
    Threshold(f64),
}

/// `x = Σ_k (u_k^H b / σ_k) v_k` over the retained triplets. A requested rank
/// above the numerical rank is clamped (and logged).
pub fn tsvd_solve(a: &CMat, b: &[C64], truncation: Truncation) -> Result<BaselineReport> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    let start = Instant::now();
    let s = svd(a);
    let smax = s.sigma.first().cloned().unwrap_or(0.0);
    let numerical = s.sigma.iter().filter(|&&v| v > RANK_TOL * smax).count();
    let k = match truncation {
        Truncation::Rank(r) => {
            if r > numerical {
                log::warn!("requested rank {r} exceeds numerical rank {numerical}; clamping");
            }
            r.min(numerical)
        }
        Truncation::Threshold(rel) => s.sigma.iter().filter(|&&v| v > rel * smax && v > 0.0).count(),
    };
    let mut x = zeros(a.ncols());
    for j in 0..k {
        let coef: C64 = s.u.column(j).iter().zip(b).map(|(u, bi)| u.conj() * bi).sum::<C64>() / s.sigma[j];
        for (xi, vi) in x.iter_mut().zip(s.v.column(j).iter()) {
            *xi += coef * vi;
        }
    }
    let residual_norm = norm(&sub(b, &matvec(a, &x)));
    Ok(BaselineReport {
        x,
        residual_norm,
        iterations: None,
        rank: Some(k),
        seconds: start.elapsed().as_secs_f64(),
        residual_history: Vec::new(),
    })
}

/// Truncated SVD for `A = Z ⊗ Z` acting as `X ↦ Z X Z^T` on `n × n` images.
///
/// Keeps the leading `r × r` block of triplets `σ_i σ_j`, i.e. rank `r²` and
/// rank-ratio `r²/n²`.
pub fn kron_tsvd(z: &DMatrix<f64>, image: &DMatrix<f64>, r: usize) -> Result<(DMatrix<f64>, BaselineReport)> {
    let n = z.nrows();
    if !z.is_square() || image.nrows() != n || image.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: image.nrows() });
    }
    let start = Instant::now();
    let zc = z.map(|v| C64::new(v, 0.0));
    let s = svd(&zc);
    let smax = s.sigma.first().cloned().unwrap_or(0.0);
    let numerical = s.sigma.iter().filter(|&&v| v > RANK_TOL * smax).count();
    if r > numerical {
        log::warn!("requested rank {r} exceeds numerical rank {numerical}; clamping");
    }
    let r = r.min(numerical);
    let u = s.u.columns(0, r).map(|c| c.re);
    let v = s.v.columns(0, r).map(|c| c.re);
    let mut core = u.transpose() * image * &u;
    for i in 0..r {
        for j in 0..r {
            core[(i, j)] /= s.sigma[i] * s.sigma[j];
        }
    }
    let x = &v * core * v.transpose();
    let resid = image - z * &x * z.transpose();
    let report = BaselineReport {
        x: x.iter().map(|&p| C64::new(p, 0.0)).collect(),
        residual_norm: resid.norm(),
        iterations: None,
        rank: Some(r * r),
        seconds: start.elapsed().as_secs_f64(),
        residual_history: Vec::new(),
    };
    Ok((x, report))
}
