//! Dense reference computations used to check the iterative solvers.
//!
//! Everything here is O(d^3) and meant for the dense regime (d <= 4096).
//! The Takagi factorization goes through a real symmetric 2d × 2d embedding.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{dense_matvec, Symmetry};
use crate::pminres::Preconditioner;
use crate::random::CMat;
use crate::vector::{axpy, dot, norm, scale, zeros};
use crate::C64;

/// Relative singular-value cutoff shared by pinv, grade and the rank checks.
pub const RANK_TOL: f64 = 1e-10;

/// Thin SVD `A = U diag(sigma) V^H`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Svd {
    let (u, sigma, v) = crate::dense::thin_svd(a).expect("svd did not converge");
    Svd { u, sigma, v }
}

/// Number of singular values above `rel * sigma_max`.
pub fn numerical_rank(sigma: &[f64], rel: f64) -> usize {
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel * smax).count()
}

pub fn matrix_rank(a: &CMat) -> usize {
    numerical_rank(&svd(a).sigma, RANK_TOL)
}

pub fn pinv(a: &CMat) -> CMat {
    pinv_with_tol(a, RANK_TOL)
}

/// Pseudo-inverse with singular values below `rel * sigma_max` truncated.
pub fn pinv_with_tol(a: &CMat, rel: f64) -> CMat {
    let s = svd(a);
    let r = numerical_rank(&s.sigma, rel);
    let mut v = s.v.columns(0, r).into_owned();
    for j in 0..r {
        v.column_mut(j).scale_mut(1.0 / s.sigma[j]);
    }
    v * s.u.columns(0, r).adjoint()
}

pub fn matvec(a: &CMat, x: &[C64]) -> Vec<C64> {
    let mut y = zeros(a.nrows());
    dense_matvec(a, x, &mut y);
    y
}

/// Outcome of the four Moore-Penrose conditions.
#[derive(Debug, Clone, Copy)]
pub struct MoorePenroseCheck {
    pub passed: bool,
    /// Relative residuals of ABA = A, BAB = B, (AB)^H = AB, (BA)^H = BA.
    pub residuals: [f64; 4],
}

pub fn verify_moore_penrose(a: &CMat, b: &CMat) -> MoorePenroseCheck {
    let rel = |m: CMat, scale: f64| m.norm() / scale.max(f64::MIN_POSITIVE);
    let ab = a * b;
    let ba = b * a;
    let residuals = [
        rel(&ab * a - a, a.norm()),
        rel(&ba * b - b, b.norm()),
        rel(ab.adjoint() - &ab, ab.norm()),
        rel(ba.adjoint() - &ba, ba.norm()),
    ];
    MoorePenroseCheck { passed: residuals.iter().all(|&r| r <= 1e-8), residuals }
}

/// Range factorization of a Hermitian (`A = U Λ U^H`) or complex-symmetric
/// (`A = U Σ U^T`) matrix.
#[derive(Debug, Clone)]
pub struct OracleDecomposition {
    pub kind: Symmetry,
    /// `d × r`, orthonormal columns spanning range(A).
    pub u: CMat,
    /// Eigenvalues (Hermitian) or Takagi values (complex-symmetric), by decreasing magnitude.
    pub values: Vec<f64>,
    pub rank: usize,
    /// `d × (d - r)` orthonormal complement of `u`.
    pub complement: CMat,
}

impl OracleDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (j, l) in self.values.iter().enumerate() {
            us.column_mut(j).scale_mut(*l);
        }
        match self.kind {
            Symmetry::ComplexSymmetric => us * self.u.transpose(),
            _ => us * self.u.adjoint(),
        }
    }

    /// `U Λ^-1 U^H`, or `conj(U) Σ^-1 U^H` for complex-symmetric.
    pub fn pinv(&self) -> CMat {
        let mut left = match self.kind {
            Symmetry::ComplexSymmetric => self.u.map(|z| z.conj()),
            _ => self.u.clone(),
        };
        for (j, l) in self.values.iter().enumerate() {
            left.column_mut(j).scale_mut(1.0 / l);
        }
        left * self.u.adjoint()
    }
}

/// Orthonormal basis of the complement of the column span of `u`.
pub fn complement(u: &CMat) -> CMat {
    let d = u.nrows();
    let proj = CMat::identity(d, d) - u * u.adjoint();
    let (values, vectors) = crate::dense::hermitian_eigen(&proj).expect("eigensolver did not converge");
    let idx: Vec<usize> = (0..d).filter(|&j| values[j] > 0.5).collect();
    CMat::from_fn(d, idx.len(), |i, j| vectors[(i, idx[j])])
}

fn check_structure(a: &CMat, kind: Symmetry) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let scale = a.norm();
    let gap = match kind {
        Symmetry::Hermitian => (a - a.adjoint()).norm(),
        Symmetry::SkewHermitian => (a + a.adjoint()).norm(),
        Symmetry::ComplexSymmetric => (a - a.transpose()).norm(),
    };
    if gap > 1e-10 * scale {
        return Err(Error::NotSymmetric(kind.name()));
    }
    Ok(())
}

pub fn hermitian_eigen(a: &CMat) -> Result<OracleDecomposition> {
    check_structure(a, Symmetry::Hermitian)?;
    let (values, vectors) = crate::dense::hermitian_eigen(&((a + a.adjoint()) * C64::new(0.5, 0.0)))
        .ok_or(Error::InvalidConfig("eigensolver did not converge".into()))?;
    let lmax = values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let mut idx: Vec<usize> = (0..a.nrows()).filter(|&j| values[j].abs() > RANK_TOL * lmax).collect();
    idx.sort_by(|&i, &j| values[j].abs().total_cmp(&values[i].abs()));
    let u = CMat::from_fn(a.nrows(), idx.len(), |i, j| vectors[(i, idx[j])]);
    let complement = complement(&u);
    Ok(OracleDecomposition {
        kind: Symmetry::Hermitian,
        values: idx.iter().map(|&j| values[j]).collect(),
        rank: idx.len(),
        u,
        complement,
    })
}

/// Takagi factorization `A = U Σ U^T`.
///
/// With `A = B + iC`, the real symmetric matrix `[[B, C], [C, -B]]` has
/// eigenpairs `(σ, [x; y])` exactly when `A conj(u) = σ u` for `u = x + iy`;
/// its positive eigenvectors give the Takagi vectors.
pub fn takagi(a: &CMat) -> Result<OracleDecomposition> {
    check_structure(a, Symmetry::ComplexSymmetric)?;
    let d = a.nrows();
    let sym = (a + a.transpose()) * C64::new(0.5, 0.0);
    let h = DMatrix::<f64>::from_fn(2 * d, 2 * d, |i, j| {
        let (bi, bj) = (i % d, j % d);
        let z = sym[(bi, bj)];
        match (i < d, j < d) {
            (true, true) => z.re,
            (true, false) | (false, true) => z.im,
            (false, false) => -z.re,
        }
    });
    let (values, vectors) =
        crate::dense::symmetric_eigen(&h).ok_or(Error::InvalidConfig("eigensolver did not converge".into()))?;
    let lmax = values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let mut idx: Vec<usize> = (0..2 * d).filter(|&j| values[j] > RANK_TOL * lmax).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let u = CMat::from_fn(d, idx.len(), |i, j| {
        let col = idx[j];
        C64::new(vectors[(i, col)], vectors[(i + d, col)])
    });
    let complement = complement(&u);
    Ok(OracleDecomposition {
        kind: Symmetry::ComplexSymmetric,
        values: idx.iter().map(|&j| values[j]).collect(),
        rank: idx.len(),
        u,
        complement,
    })
}

/// Range decomposition matching the kind (skew-Hermitian goes through `iA`).
pub fn range_decomposition(a: &CMat, kind: Symmetry) -> Result<OracleDecomposition> {
    match kind {
        Symmetry::Hermitian => hermitian_eigen(a),
        Symmetry::ComplexSymmetric => takagi(a),
        Symmetry::SkewHermitian => {
            check_structure(a, kind)?;
            hermitian_eigen(&(a * C64::new(0.0, 1.0)))
        }
    }
}

/// Grade of `b` with respect to `A`: the dimension at which the Krylov
/// (or, for complex-symmetric `A`, Saunders) subspace stops growing.
///
/// Built with fully reorthogonalized Arnoldi; a new direction counts when its
/// orthogonalized norm exceeds `1e-10 · ||A||_2`.
pub fn grade(a: &CMat, b: &[C64], kind: Symmetry) -> usize {
    let nb = norm(b);
    if nb == 0.0 {
        return 0;
    }
    let smax = svd(a).sigma.first().cloned().unwrap_or(0.0);
    let mut basis = vec![scale(C64::new(1.0 / nb, 0.0), b)];
    loop {
        let last = basis.last().expect("nonempty");
        let src = if kind == Symmetry::ComplexSymmetric { crate::vector::conj(last) } else { last.clone() };
        let mut w = matvec(a, &src);
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                axpy(-h, q, &mut w);
            }
        }
        let nw = norm(&w);
        if nw <= RANK_TOL * smax || basis.len() == a.nrows() {
            return basis.len();
        }
        basis.push(scale(C64::new(1.0 / nw, 0.0), &w));
    }
}

fn range_projector_basis(m: &Preconditioner) -> Result<CMat> {
    if let Some(e) = m.economy() {
        return Ok(e.p.clone());
    }
    let dense = m.dense_matrix().ok_or(Error::IncompatibleSource("preconditioner has no dense or economy form"))?;
    Ok(Preconditioner::from_dense(dense)?.economy().expect("from_dense sets economy").p.clone())
}

/// Pseudo-inverse solution of the projected problem: `[P P^H A P P^H]† b`
/// (Hermitian) or `[conj(P) P^T A P P^H]† b` (complex-symmetric).
pub fn lifted_problem_pinv(a: &CMat, m: &Preconditioner, b: &[C64], kind: Symmetry) -> Result<Vec<C64>> {
    let p = range_projector_basis(m)?;
    let right = &p * p.adjoint();
    let left = match kind {
        Symmetry::ComplexSymmetric => p.map(|z| z.conj()) * p.transpose(),
        _ => right.clone(),
    };
    Ok(matvec(&pinv(&(left * a * right)), b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankAssumptions {
    /// rk(P^H U) = rk(U)  (CS: rk(P^T U) = rk(U))
    pub a_holds: bool,
    /// rk(U^H P) = rk(P)  (CS: rk(U^T P) = rk(P))
    pub b_holds: bool,
}

/// Numerical rank of a product of orthonormal bases; singular values are
/// cosines in [0, 1], so the cutoff is absolute.
fn cosine_rank(m: &CMat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    svd(m).sigma.iter().filter(|&&s| s > RANK_TOL).count()
}

pub fn check_rank_assumptions(a: &CMat, m: &Preconditioner, kind: Symmetry) -> Result<RankAssumptions> {
    let u = range_decomposition(a, kind)?.u;
    let p = range_projector_basis(m)?;
    let (pu, up) = match kind {
        Symmetry::ComplexSymmetric => (p.transpose() * &u, u.transpose() * &p),
        _ => (p.adjoint() * &u, u.adjoint() * &p),
    };
    Ok(RankAssumptions { a_holds: cosine_rank(&pu) == u.ncols(), b_holds: cosine_rank(&up) == p.ncols() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_symmetric_with_rank, hermitian_with_rank, rng};
    use crate::vector::from_real;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_vec(v.iter().map(|&x| c(x)).collect()))
    }

    #[test]
    fn pinv_of_diagonal() {
        let p = pinv(&diag(&[2.0, 0.0]));
        assert!((p - diag(&[0.5, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn pinv_closed_form_example() {
        let a = 3.0;
        let m = diag(&[a, 0.0]);
        let b = from_real(&[1.0, 1.0]);
        let x = matvec(&pinv(&m), &b);
        assert!(crate::vector::rel_err(&x, &from_real(&[1.0 / a, 0.0])) < 1e-15);
        let r = crate::vector::sub(&b, &matvec(&m, &x));
        assert!(crate::vector::rel_err(&r, &from_real(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn moore_penrose_examples() {
        let i = CMat::identity(3, 3);
        assert!(verify_moore_penrose(&i, &i).passed);
        let a = crate::random::complex_normal_matrix(&mut rng(4), 5, 5);
        assert!(verify_moore_penrose(&a, &pinv(&a)).passed);
        assert!(!verify_moore_penrose(&a, &a.transpose()).passed);
        let h = hermitian_with_rank(&mut rng(5), 20, 15);
        assert!(verify_moore_penrose(&h, &pinv(&h)).passed);
    }

    #[test]
    fn takagi_rank_one() {
        let i = C64::new(0.0, 1.0);
        let a = CMat::from_row_slice(2, 2, &[c(1.0), i, i, c(-1.0)]);
        let t = takagi(&a).unwrap();
        assert_eq!(t.rank, 1);
        assert!((t.values[0] - 2.0).abs() < 1e-12);
        // u = [1, i]/sqrt(2) up to a unit phase
        let want = [c(1.0 / 2f64.sqrt()), i / 2f64.sqrt()];
        let overlap = dot(&want, &t.u.column(0).iter().cloned().collect::<Vec<_>>()).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!((t.reconstruct() - &a).norm() < 1e-12);
    }

    #[test]
    fn takagi_random_and_real_psd() {
        let a = complex_symmetric_with_rank(&mut rng(8), 12, 12);
        let t = takagi(&a).unwrap();
        assert!((t.reconstruct() - &a).norm() <= 1e-8 * a.norm());
        assert!((t.pinv() - pinv(&a)).norm() <= 1e-8 * pinv(&a).norm());

        let g = crate::random::real_normal_matrix(&mut rng(9), 6, 6);
        let psd = (&g * g.transpose()).map(c);
        let t = takagi(&psd).unwrap();
        assert!((t.reconstruct() - &psd).norm() <= 1e-10 * psd.norm());
        let mut ev = crate::dense::hermitian_eigen(&psd).unwrap().0;
        ev.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in t.values.iter().zip(&ev) {
            assert!((x - y).abs() < 1e-10 * ev[0]);
        }
    }

    #[test]
    fn takagi_rejects_asymmetric() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(takagi(&a).is_err());
    }

    #[test]
    fn grade_examples() {
        let b = from_real(&[1.0, 1.0]);
        assert_eq!(grade(&CMat::identity(2, 2), &b, Symmetry::Hermitian), 1);
        assert_eq!(grade(&diag(&[1.0, 0.0]), &b, Symmetry::Hermitian), 2);
    }

    #[test]
    fn rank_assumption_examples() {
        let a = hermitian_with_rank(&mut rng(12), 10, 6);
        let dec = hermitian_eigen(&a).unwrap();
        let full = Preconditioner::identity(10);
        assert!(check_rank_assumptions(&a, &full, Symmetry::Hermitian).unwrap().a_holds);
        let exact = Preconditioner::from_economy(dec.u.clone(), vec![1.0; 6]).unwrap();
        let ra = check_rank_assumptions(&a, &exact, Symmetry::Hermitian).unwrap();
        assert!(ra.a_holds && ra.b_holds);
        let inside = Preconditioner::from_economy(dec.u.columns(0, 3).into_owned(), vec![1.0; 3]).unwrap();
        let ra = check_rank_assumptions(&a, &inside, Symmetry::Hermitian).unwrap();
        assert!(!ra.a_holds && ra.b_holds);
    }

    #[test]
    fn lifted_problem_examples() {
        let a = hermitian_with_rank(&mut rng(13), 10, 6);
        let b = crate::random::complex_normal_vec(&mut rng(14), 10);
        let xd = matvec(&pinv(&a), &b);
        let full = Preconditioner::identity(10);
        let x = lifted_problem_pinv(&a, &full, &b, Symmetry::Hermitian).unwrap();
        assert!(crate::vector::rel_err(&x, &xd) < 1e-10);
        let u = hermitian_eigen(&a).unwrap().u;
        let m = Preconditioner::from_economy(u, vec![1.0; 6]).unwrap();
        let x = lifted_problem_pinv(&a, &m, &b, Symmetry::Hermitian).unwrap();
        assert!(crate::vector::rel_err(&x, &xd) < 1e-10);
    }
}
