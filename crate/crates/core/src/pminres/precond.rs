//! PSD preconditioners `M`, optionally factored as `M = S S^H`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{dense_matvec, sandwich};
use crate::random::CMat;
use crate::vector::{conj, conj_in_place, dot, is_finite, norm_sqr, zeros};
use crate::C64;

/// A `d × m` factor `S` with `M = S S^H`.
pub trait SubPreconditioner: Send + Sync {
    /// `d`
    fn rows(&self) -> usize;
    /// `m`
    fn cols(&self) -> usize;
    /// `y = S x`, `x` of length `m`.
    fn apply_into(&self, x: &[C64], y: &mut [C64]);
    /// `x = S^H y`, `y` of length `d`.
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]);

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch { expected: self.cols(), found: x.len() });
        }
        let mut y = zeros(self.rows());
        self.apply_into(x, &mut y);
        Ok(y)
    }

    fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.rows() {
            return Err(Error::DimensionMismatch { expected: self.rows(), found: y.len() });
        }
        let mut x = zeros(self.cols());
        self.adjoint_into(y, &mut x);
        Ok(x)
    }

    /// `S^T y = conj(S^H conj(y))`
    fn transpose(&self, y: &[C64]) -> Result<Vec<C64>> {
        let mut x = self.adjoint(&conj(y))?;
        conj_in_place(&mut x);
        Ok(x)
    }

    /// `conj(S) x = conj(S conj(x))`
    fn apply_conj(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = self.apply(&conj(x))?;
        conj_in_place(&mut y);
        Ok(y)
    }
}

/// Explicit dense factor.
#[derive(Debug, Clone)]
pub struct DenseFactor {
    s: CMat,
    sh: CMat,
}

impl DenseFactor {
    pub fn new(s: CMat) -> Self {
        let sh = s.adjoint();
        Self { s, sh }
    }

    pub fn matrix(&self) -> &CMat {
        &self.s
    }
}

impl SubPreconditioner for DenseFactor {
    fn rows(&self) -> usize {
        self.s.nrows()
    }
    fn cols(&self) -> usize {
        self.s.ncols()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        dense_matvec(&self.s, x, y);
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        dense_matvec(&self.sh, y, x);
    }
}

/// `S = C ⊗ C` for a real `n × k` factor `C`: `S vec(X) = vec(C X C^T)`.
#[derive(Debug, Clone)]
pub struct KroneckerFactor {
    c: DMatrix<f64>,
    ct: DMatrix<f64>,
}

impl KroneckerFactor {
    pub fn new(c: DMatrix<f64>) -> Self {
        let ct = c.transpose();
        Self { c, ct }
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.c
    }
}

impl SubPreconditioner for KroneckerFactor {
    fn rows(&self) -> usize {
        self.c.nrows() * self.c.nrows()
    }
    fn cols(&self) -> usize {
        self.c.ncols() * self.c.ncols()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        sandwich(&self.c, &self.c, x, y);
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        sandwich(&self.ct, &self.ct, y, x);
    }
}

/// `S = I_d`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityFactor(pub usize);

impl SubPreconditioner for IdentityFactor {
    fn rows(&self) -> usize {
        self.0
    }
    fn cols(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
    }
    fn adjoint_into(&self, y: &[C64], x: &mut [C64]) {
        x.copy_from_slice(y);
    }
}

/// Economy factors `S = P Σ K^H` (so `M = P Σ^2 P^H`).
#[derive(Debug, Clone)]
pub struct EconomyFactors {
    /// `d × r`, orthonormal columns.
    pub p: CMat,
    /// Singular values of `S`, positive.
    pub sigma: Vec<f64>,
    /// `m × r`, orthonormal columns. `None` means `K = I_r`.
    pub k: Option<CMat>,
}

impl EconomyFactors {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `M† v = P Σ^-2 P^H v`
    pub fn pinv_apply(&self, v: &[C64]) -> Vec<C64> {
        let ph = self.p.adjoint();
        let mut y = zeros(self.rank());
        dense_matvec(&ph, v, &mut y);
        for (yi, s) in y.iter_mut().zip(&self.sigma) {
            *yi /= s * s;
        }
        let mut out = zeros(self.p.nrows());
        dense_matvec(&self.p, &y, &mut out);
        out
    }

    /// `P P^H`
    pub fn range_projector(&self) -> CMat {
        &self.p * self.p.adjoint()
    }

    pub fn dense_m(&self) -> CMat {
        let mut ps = self.p.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            ps.column_mut(j).scale_mut(s * s);
        }
        ps * self.p.adjoint()
    }
}

type MatVec = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

/// PSD preconditioner.
///
/// Solvers apply `M` through the factor when one is available, computing
/// `<z, Mz>` as `||S^H z||^2`; this keeps `beta` accurate when `z` lies in
/// the null space of a singular `M`.
#[derive(Clone)]
pub struct Preconditioner {
    dim: usize,
    factor: Option<Arc<dyn SubPreconditioner>>,
    matvec: Option<MatVec>,
    dense: Option<CMat>,
    economy: Option<EconomyFactors>,
    rank: Option<usize>,
}

impl std::fmt::Debug for Preconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Preconditioner")
            .field("dim", &self.dim)
            .field("factored", &self.factor.is_some())
            .field("rank", &self.rank)
            .finish()
    }
}

/// Relative eigenvalue cutoff used to decide the rank of a dense `M`.
pub const PSD_RANK_TOL: f64 = 1e-10;

impl Preconditioner {
    pub fn identity(d: usize) -> Self {
        Self {
            dim: d,
            factor: Some(Arc::new(IdentityFactor(d))),
            matvec: None,
            dense: None,
            economy: (d <= 4096).then(|| EconomyFactors { p: CMat::identity(d, d), sigma: vec![1.0; d], k: None }),
            rank: Some(d),
        }
    }

    /// `M = S S^H` from a sub-preconditioner.
    pub fn from_factor(s: Arc<dyn SubPreconditioner>) -> Self {
        Self { dim: s.rows(), factor: Some(s), matvec: None, dense: None, economy: None, rank: None }
    }

    /// Dense factor `S`; economy factors are computed by SVD.
    pub fn from_dense_factor(s: CMat) -> Self {
        let (u, sv, v) = crate::dense::thin_svd(&s).expect("svd did not converge");
        let smax = sv.first().cloned().unwrap_or(0.0);
        let keep = sv.iter().filter(|&&x| x > PSD_RANK_TOL * smax && x > 0.0).count();
        let p = u.columns(0, keep).into_owned();
        let k = v.columns(0, keep).into_owned();
        let sigma = sv[..keep].to_vec();
        let rank = sigma.len();
        Self {
            dim: s.nrows(),
            factor: Some(Arc::new(DenseFactor::new(s))),
            matvec: None,
            dense: None,
            economy: Some(EconomyFactors { p, sigma, k: Some(k) }),
            rank: Some(rank),
        }
    }

    /// `M = P diag(sigma)^2 P^H` with factor `S = P diag(sigma)`.
    pub fn from_economy(p: CMat, sigma: Vec<f64>) -> Result<Self> {
        if p.ncols() != sigma.len() {
            return Err(Error::DimensionMismatch { expected: p.ncols(), found: sigma.len() });
        }
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidConfig("economy singular values must be positive".into()));
        }
        let mut s = p.clone();
        for (j, v) in sigma.iter().enumerate() {
            s.column_mut(j).scale_mut(*v);
        }
        let rank = sigma.len();
        Ok(Self {
            dim: p.nrows(),
            factor: Some(Arc::new(DenseFactor::new(s))),
            matvec: None,
            dense: None,
            economy: Some(EconomyFactors { p, sigma, k: None }),
            rank: Some(rank),
        })
    }

    /// Dense Hermitian PSD `M`. The factor `P Σ` is taken from its
    /// eigendecomposition; eigenvalues below `1e-10 λ_max` are dropped.
    pub fn from_dense(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        if (&m - m.adjoint()).norm() > 1e-10 * scale {
            return Err(Error::NotSymmetric("hermitian"));
        }
        let (values, vectors) =
            crate::dense::hermitian_eigen(&m).ok_or(Error::InvalidConfig("eigensolver did not converge".into()))?;
        let lmax = values.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        let lmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if lmin < -1e-12 * lmax.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPsd(lmin));
        }
        let mut idx: Vec<usize> = (0..values.len()).filter(|&j| values[j] > PSD_RANK_TOL * lmax).collect();
        idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let p = CMat::from_fn(m.nrows(), idx.len(), |i, j| vectors[(i, idx[j])]);
        let sigma: Vec<f64> = idx.iter().map(|&j| values[j].sqrt()).collect();
        let mut pre = Self::from_economy(p, sigma)?;
        pre.dense = Some(m);
        Ok(pre)
    }

    /// Matrix-free `M` without a factor. `<z, Mz>` is then computed directly
    /// and small negative values are clamped.
    pub fn from_operator(d: usize, m: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static) -> Self {
        Self { dim: d, factor: None, matvec: Some(Arc::new(m)), dense: None, economy: None, rank: None }
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn with_economy(mut self, economy: EconomyFactors) -> Self {
        self.rank = Some(economy.rank());
        self.economy = Some(economy);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    pub fn factor(&self) -> Option<&Arc<dyn SubPreconditioner>> {
        self.factor.as_ref()
    }

    pub fn economy(&self) -> Option<&EconomyFactors> {
        self.economy.as_ref()
    }

    /// Dense `M`, when it is stored or can be rebuilt from economy factors.
    pub fn dense_matrix(&self) -> Option<CMat> {
        self.dense.clone().or_else(|| self.economy.as_ref().map(|e| e.dense_m()))
    }

    pub fn apply_m(&self, v: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_with_energy(v)?.0)
    }

    /// `(M v, <v, M v>)`. The energy is exact-PSD on the factored path.
    pub fn apply_with_energy(&self, v: &[C64]) -> Result<(Vec<C64>, f64)> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let (w, e) = if let Some(s) = &self.factor {
            let y = s.adjoint(v)?;
            (s.apply(&y)?, norm_sqr(&y))
        } else if let Some(m) = &self.matvec {
            let w = m(v);
            if w.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
            }
            let e = dot(v, &w).re;
            (w, e)
        } else {
            unreachable!("preconditioner without factor or matvec");
        };
        if !is_finite(&w) {
            return Err(Error::NonFinite("preconditioner apply"));
        }
        Ok((w, e))
    }
}
