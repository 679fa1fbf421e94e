//! Matrix-free linear operators with a declared symmetry kind.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::random::complex_normal_vec;
use crate::vector::{conj, conj_in_place, dot, dotu, norm, zeros};
use crate::C64;

/// Structural symmetry of a square operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    /// `A^H = A`
    Hermitian,
    /// `A^H = -A`
    SkewHermitian,
    /// `A^T = A`
    ComplexSymmetric,
}

impl Symmetry {
    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Hermitian => "hermitian",
            Symmetry::SkewHermitian => "skew_hermitian",
            Symmetry::ComplexSymmetric => "complex_symmetric",
        }
    }
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermitian" | "h" => Ok(Symmetry::Hermitian),
            "skew_hermitian" | "skew" => Ok(Symmetry::SkewHermitian),
            "complex_symmetric" | "cs" => Ok(Symmetry::ComplexSymmetric),
            other => Err(Error::InvalidConfig(format!("unknown symmetry kind `{other}`"))),
        }
    }
}

/// A square complex operator `A` of dimension `d`.
///
/// Implementors provide `apply_into`; the checked entry points (`apply`,
/// `apply_conj`, `apply_adjoint`) validate lengths and finiteness.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> Symmetry;

    /// `y = A x`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[C64], y: &mut [C64]);

    /// `y = A conj(x)`. Override when a cheaper native form exists.
    fn apply_conj_into(&self, x: &[C64], y: &mut [C64]) {
        self.apply_into(&conj(x), y);
    }

    /// `y = A^H x`, derived from the declared kind.
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        match self.kind() {
            Symmetry::Hermitian => self.apply_into(x, y),
            Symmetry::SkewHermitian => {
                self.apply_into(x, y);
                for v in y.iter_mut() {
                    *v = -*v;
                }
            }
            Symmetry::ComplexSymmetric => {
                // A^H x = conj(A conj(x))
                self.apply_conj_into(x, y);
                conj_in_place(y);
            }
        }
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        checked(self.dim(), x, |x, y| self.apply_into(x, y))
    }

    fn apply_conj(&self, x: &[C64]) -> Result<Vec<C64>> {
        checked(self.dim(), x, |x, y| self.apply_conj_into(x, y))
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        checked(self.dim(), x, |x, y| self.apply_adjoint_into(x, y))
    }
}

fn checked(d: usize, x: &[C64], f: impl FnOnce(&[C64], &mut [C64])) -> Result<Vec<C64>> {
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.len() });
    }
    let mut y = zeros(d);
    f(x, &mut y);
    if !crate::vector::is_finite(&y) {
        return Err(Error::NonFinite("operator apply"));
    }
    Ok(y)
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn kind(&self) -> Symmetry {
        (**self).kind()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_into(x, y)
    }
    fn apply_conj_into(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_conj_into(x, y)
    }
    fn apply_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        (**self).apply_adjoint_into(x, y)
    }
}

/// Explicit dense operator, intended for `d <= 4096`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
    kind: Symmetry,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>, kind: Symmetry) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix, kind })
    }

    pub fn hermitian(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(matrix, Symmetry::Hermitian)
    }

    pub fn complex_symmetric(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(matrix, Symmetry::ComplexSymmetric)
    }

    pub fn skew_hermitian(matrix: DMatrix<C64>) -> Result<Self> {
        Self::new(matrix, Symmetry::SkewHermitian)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Same matrix under a different declared kind (e.g. real symmetric as complex-symmetric).
    pub fn with_kind(&self, kind: Symmetry) -> Self {
        Self { matrix: self.matrix.clone(), kind }
    }
}

pub(crate) fn dense_matvec(m: &DMatrix<C64>, x: &[C64], y: &mut [C64]) {
    let (rows, cols) = m.shape();
    debug_assert_eq!(x.len(), cols);
    for yi in y.iter_mut().take(rows) {
        *yi = C64::new(0.0, 0.0);
    }
    for (j, xj) in x.iter().enumerate() {
        if *xj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = m.column(j);
        for (yi, mij) in y.iter_mut().zip(col.iter()) {
            *yi += mij * xj;
        }
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn kind(&self) -> Symmetry {
        self.kind
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        dense_matvec(&self.matrix, x, y);
    }
}

/// `A = Z ⊗ Z` for a real symmetric `n × n` factor, acting on `vec(X)` as `vec(Z X Z^T)`.
///
/// Vectors are column-major `vec` of an `n × n` array.
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    z: DMatrix<f64>,
}

impl KroneckerOperator {
    pub fn new(z: DMatrix<f64>) -> Result<Self> {
        if !z.is_square() {
            return Err(Error::DimensionMismatch { expected: z.nrows(), found: z.ncols() });
        }
        let scale = z.amax().max(f64::MIN_POSITIVE);
        if (&z - z.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotSymmetric("symmetric"));
        }
        Ok(Self { z })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }
}

/// `vec(L X R^T)` for real `L` (p × n), `R` (q × n) and column-major `x` of an n × n array.
pub(crate) fn sandwich(l: &DMatrix<f64>, r: &DMatrix<f64>, x: &[C64], out: &mut [C64]) {
    let n = l.ncols();
    let p = l.nrows();
    let q = r.nrows();
    debug_assert_eq!(r.ncols(), n);
    debug_assert_eq!(x.len(), n * n);
    debug_assert_eq!(out.len(), p * q);
    // T = L X  (p × n)
    let mut t = vec![C64::new(0.0, 0.0); p * n];
    for j in 0..n {
        let xc = &x[j * n..(j + 1) * n];
        let tc = &mut t[j * p..(j + 1) * p];
        for (k, xk) in xc.iter().enumerate() {
            if *xk == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, ti) in tc.iter_mut().enumerate() {
                *ti += xk * l[(i, k)];
            }
        }
    }
    // out = T R^T  (p × q): column j of out = sum_k T[:, k] R[j, k]
    for j in 0..q {
        let oc = &mut out[j * p..(j + 1) * p];
        oc.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for k in 0..n {
            let rjk = r[(j, k)];
            if rjk == 0.0 {
                continue;
            }
            let tc = &t[k * p..(k + 1) * p];
            for (o, tv) in oc.iter_mut().zip(tc) {
                *o += tv * rjk;
            }
        }
    }
}

impl LinearOperator for KroneckerOperator {
    fn dim(&self) -> usize {
        self.n() * self.n()
    }
    fn kind(&self) -> Symmetry {
        Symmetry::Hermitian
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        sandwich(&self.z, &self.z, x, y);
    }
}

/// Banded Toeplitz matrix with Gaussian entries `exp(-(j-k)^2 / (2 sigma^2))`
/// for `|j - k| <= (w - 1) / 2`.
#[derive(Debug, Clone)]
pub struct GaussianBlurToeplitz {
    n: usize,
    bandwidth: usize,
    sigma: f64,
    normalized: bool,
}

impl GaussianBlurToeplitz {
    pub fn new(n: usize, bandwidth: usize, sigma: f64) -> Result<Self> {
        if n == 0 || bandwidth == 0 || bandwidth.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("blur needs n >= 1 and odd bandwidth, got n={n}, w={bandwidth}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidConfig(format!("blur sigma must be positive, got {sigma}")));
        }
        Ok(Self { n, bandwidth, sigma, normalized: false })
    }

    /// Divide every entry by the full stencil sum. Keeps the matrix symmetric;
    /// rows near the boundary then sum to less than one (zero padding).
    pub fn normalized(mut self, on: bool) -> Self {
        self.normalized = on;
        self
    }

    pub fn half_bandwidth(&self) -> usize {
        (self.bandwidth - 1) / 2
    }

    fn stencil_sum(&self) -> f64 {
        let h = self.half_bandwidth() as i64;
        (-h..=h).map(|k| self.raw(k)).sum()
    }

    fn raw(&self, k: i64) -> f64 {
        let k = k as f64;
        (-k * k / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        let off = j as i64 - k as i64;
        if off.unsigned_abs() as usize > self.half_bandwidth() {
            return 0.0;
        }
        let v = self.raw(off);
        if self.normalized {
            v / self.stencil_sum()
        } else {
            v
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.entry(j, k))
    }
}

impl LinearOperator for GaussianBlurToeplitz {
    fn dim(&self) -> usize {
        self.n
    }
    fn kind(&self) -> Symmetry {
        Symmetry::Hermitian
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let h = self.half_bandwidth();
        for (j, yj) in y.iter_mut().enumerate() {
            let lo = j.saturating_sub(h);
            let hi = (j + h).min(self.n - 1);
            *yj = (lo..=hi).map(|k| x[k] * self.entry(j, k)).sum();
        }
    }
}

/// `factor · A`, used to turn a skew-Hermitian `A` into the Hermitian `iA`.
pub struct ScaledOperator<'a> {
    inner: &'a dyn LinearOperator,
    factor: C64,
    kind: Symmetry,
}

impl<'a> ScaledOperator<'a> {
    pub fn new(inner: &'a dyn LinearOperator, factor: C64, kind: Symmetry) -> Self {
        Self { inner, factor, kind }
    }
}

impl LinearOperator for ScaledOperator<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn kind(&self) -> Symmetry {
        self.kind
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.inner.apply_into(x, y);
        for v in y.iter_mut() {
            *v *= self.factor;
        }
    }
}

/// Randomized check of the declared symmetry identity on `trials` probe pairs.
///
/// Relative tolerance is `1e-10`.
pub fn probe_symmetry(op: &dyn LinearOperator, trials: usize, seed: u64) -> bool {
    let d = op.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..trials.max(1) {
        let u = complex_normal_vec(&mut rng, d);
        let v = complex_normal_vec(&mut rng, d);
        let (Ok(au), Ok(av)) = (op.apply(&u), op.apply(&v)) else {
            return false;
        };
        let scale = (norm(&u) * norm(&av)).max(norm(&au) * norm(&v));
        let gap = match op.kind() {
            Symmetry::Hermitian => (dot(&u, &av) - dot(&au, &v)).norm(),
            Symmetry::SkewHermitian => (dot(&u, &av) + dot(&au, &v)).norm(),
            Symmetry::ComplexSymmetric => (dotu(&u, &av) - dotu(&v, &au)).norm(),
        };
        if gap > 1e-10 * scale {
            return false;
        }
    }
    true
}
