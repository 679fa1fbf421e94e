//! Preconditioner families `M_i = P_i diag(σ_1..σ_i) P_i^H` and the error
//! sweep run over them.

use crate::error::{Error, Result};
use crate::minres::{SolveOptions, SolveReport};
use crate::operator::{DenseOperator, LinearOperator, Symmetry};
use crate::oracle::{
    check_rank_assumptions, lifted_problem_pinv, matvec, pinv, range_decomposition, svd, RankAssumptions,
};
use crate::pminres::{plift, psolve_cs, psolve_h, Preconditioner};
use crate::random::{abs_normal_weights, from_spectrum, orthonormal, random_psd, real_normal_matrix, rng, CMat};
use crate::vector::{norm, rel_err, sub};
use crate::C64;

/// Minimum `|<p, u>|` between a random basis vector and any eigenvector of `A`.
pub const NOT_PERPENDICULAR_TOL: f64 = 1e-6;

/// Where the columns of `P` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSource {
    /// Left singular vectors of a random PSD matrix, none perpendicular to an
    /// eigenvector of `A` (checked only when `A` is given).
    RandomPsdSvd,
    /// Left singular vectors of `A C` (`conj(A) C` for complex-symmetric) with
    /// `C` random PSD, so the first `rank(A)` columns span the range.
    RangePreserved,
    /// Eigenvectors of Hermitian `A` with positive eigenvalues, largest first.
    EigenPositive,
    /// Left singular vectors of a real Gaussian `d × m` sketch.
    Sketch(usize),
    /// Range basis of `A` (eigen- or conjugated Takagi vectors) followed by
    /// its complement.
    EigenAll,
}

impl BasisSource {
    pub fn name(self) -> &'static str {
        match self {
            BasisSource::RandomPsdSvd => "random_psd_svd",
            BasisSource::RangePreserved => "range_preserved",
            BasisSource::EigenPositive => "eigen_positive",
            BasisSource::Sketch(_) => "sketch",
            BasisSource::EigenAll => "eigen_all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankFamilySpec {
    pub d: usize,
    /// `σ_1..σ_d`, strictly positive.
    pub weights: Vec<f64>,
    pub source: BasisSource,
    pub seed: u64,
}

impl RankFamilySpec {
    /// Weights drawn as `|N(0,1)|` from `seed`.
    pub fn new(d: usize, source: BasisSource, seed: u64) -> Self {
        let weights = abs_normal_weights(&mut rng(seed), d);
        Self { d, weights, source, seed }
    }
}

fn source_needs_a(source: BasisSource) -> bool {
    matches!(source, BasisSource::RangePreserved | BasisSource::EigenPositive | BasisSource::EigenAll)
}

/// All eigen/Takagi directions of `A`: range basis plus complement.
fn full_basis(a: &CMat, kind: Symmetry) -> Result<CMat> {
    let dec = range_decomposition(a, kind)?;
    let mut cols: Vec<_> = dec.u.column_iter().map(|c| c.into_owned()).collect();
    cols.extend(dec.complement.column_iter().map(|c| c.into_owned()));
    Ok(CMat::from_columns(&cols))
}

/// `d × d` (or `d × m` for sketches) orthonormal basis; `M_i` uses its first
/// `i` columns.
pub fn make_basis(spec: &RankFamilySpec, a: Option<&CMat>, kind: Symmetry) -> Result<CMat> {
    let d = spec.d;
    if source_needs_a(spec.source) && a.is_none() {
        return Err(Error::IncompatibleSource("this basis source needs a dense A"));
    }
    if let Some(a) = a {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.nrows() });
        }
    }
    let mut g = rng(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    match spec.source {
        BasisSource::RandomPsdSvd => {
            let eig = a.map(|a| full_basis(a, kind)).transpose()?;
            for _ in 0..100 {
                let u = svd(&random_psd(&mut g, d)).u;
                let ok = match &eig {
                    None => true,
                    Some(e) => {
                        let cos = u.adjoint() * e;
                        cos.iter().all(|z| z.norm() >= NOT_PERPENDICULAR_TOL)
                    }
                };
                if ok {
                    return Ok(u);
                }
            }
            Err(Error::InvalidConfig("rejection sampling for a non-perpendicular basis failed".into()))
        }
        BasisSource::RangePreserved => {
            let a = a.expect("checked");
            let left = if kind == Symmetry::ComplexSymmetric { a.map(|z| z.conj()) } else { a.clone() };
            let rank = range_decomposition(a, kind)?.rank;
            for _ in 0..100 {
                let ac = &left * random_psd(&mut g, d);
                let s = svd(&ac);
                if crate::oracle::numerical_rank(&s.sigma, crate::oracle::RANK_TOL) == rank {
                    return Ok(s.u);
                }
            }
            Err(Error::InvalidConfig("could not draw C with rk(AC) = rk(A)".into()))
        }
        BasisSource::EigenPositive => {
            if kind != Symmetry::Hermitian {
                return Err(Error::IncompatibleSource("eigen_positive needs a Hermitian A"));
            }
            let dec = range_decomposition(a.expect("checked"), kind)?;
            let mut idx: Vec<usize> = (0..dec.rank).filter(|&j| dec.values[j] > 0.0).collect();
            idx.sort_by(|&i, &j| dec.values[j].total_cmp(&dec.values[i]));
            Ok(CMat::from_fn(d, idx.len(), |i, j| dec.u[(i, idx[j])]))
        }
        BasisSource::Sketch(m) => {
            if m == 0 || m > d {
                return Err(Error::InvalidConfig(format!("sketch size {m} outside 1..={d}")));
            }
            let s = real_normal_matrix(&mut g, d, m).map(|v| C64::new(v, 0.0));
            Ok(svd(&s).u)
        }
        BasisSource::EigenAll => {
            let basis = full_basis(a.expect("checked"), kind)?;
            Ok(if kind == Symmetry::ComplexSymmetric { basis.map(|z| z.conj()) } else { basis })
        }
    }
}

/// `M_i` for every rank the source supports (`i = 1..=d`, fewer for
/// `EigenPositive` and `Sketch`).
pub fn make_rank_family(spec: &RankFamilySpec, a: Option<&CMat>, kind: Symmetry) -> Result<Vec<Preconditioner>> {
    if spec.weights.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, found: spec.weights.len() });
    }
    if spec.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidConfig("weights must be strictly positive".into()));
    }
    let basis = make_basis(spec, a, kind)?;
    (1..=basis.ncols()).map(|i| rank_member(&basis, &spec.weights, i)).collect()
}

/// `M_i = P_i diag(w_1..w_i) P_i^H`, factored as `S_i = P_i diag(sqrt(w))`.
pub fn rank_member(basis: &CMat, weights: &[f64], i: usize) -> Result<Preconditioner> {
    let p = basis.columns(0, i).into_owned();
    Preconditioner::from_economy(p, weights[..i].iter().map(|w| w.sqrt()).collect())
}

/// The indefinite test problem for NPC detection: `d = 20`, rank 15, with 14
/// positive eigenvalues log-spaced in `[1, 100]` and one eigenvalue `-1`.
#[derive(Debug, Clone)]
pub struct NpcProblem {
    pub a: CMat,
    pub b: Vec<C64>,
    /// `d × r₊`, eigenvectors for the positive eigenvalues.
    pub u_plus: CMat,
    pub u_minus: Vec<C64>,
    pub positive: Vec<f64>,
}

impl NpcProblem {
    pub const D: usize = 20;
    pub const R: usize = 15;
    pub const R_PLUS: usize = 14;

    pub fn generate(seed: u64) -> Self {
        Self::with_sizes(Self::D, Self::R_PLUS, seed)
    }

    /// General sizes: `r₊` positive eigenvalues, one at `-1`, rest zero.
    pub fn with_sizes(d: usize, r_plus: usize, seed: u64) -> Self {
        assert!(r_plus < d, "need room for the negative eigenvalue");
        let mut g = rng(seed);
        let u = orthonormal(&mut g, d, r_plus + 1, true);
        let positive: Vec<f64> = (0..r_plus)
            .map(|k| if r_plus == 1 { 1.0 } else { 10f64.powf(2.0 * k as f64 / (r_plus - 1) as f64) })
            .rev()
            .collect();
        let mut lambda = positive.clone();
        lambda.push(-1.0);
        let a = from_spectrum(&u, &lambda);
        Self {
            a,
            b: vec![C64::new(1.0, 0.0); d],
            u_plus: u.columns(0, r_plus).into_owned(),
            u_minus: u.column(r_plus).iter().cloned().collect(),
            positive,
        }
    }
}

/// The four preconditioners of the NPC experiment.
#[derive(Debug, Clone)]
pub struct NpcSuite {
    /// `S₁ S₁^H` with `S₁` a real `d × r` Gaussian sketch.
    pub m1: Preconditioner,
    /// Positive definite, eigenvalues `|N(0,1)|`.
    pub m2: Preconditioner,
    /// Rank `r`, range `[U₊ u₋]`, the first `r` eigenvalues of `M₂`.
    pub m3: Preconditioner,
    /// Rank `r₊`, range `U₊`, the first `r₊` eigenvalues of `M₂`.
    pub m4: Preconditioner,
}

impl NpcSuite {
    pub fn all(&self) -> [(&'static str, &Preconditioner); 4] {
        [("M1", &self.m1), ("M2", &self.m2), ("M3", &self.m3), ("M4", &self.m4)]
    }
}

pub fn make_npc_suite(problem: &NpcProblem, seed: u64) -> Result<NpcSuite> {
    let d = problem.a.nrows();
    let r_plus = problem.u_plus.ncols();
    let r = r_plus + 1;
    let mut g = rng(seed);
    let s1 = real_normal_matrix(&mut g, d, r).map(|v| C64::new(v, 0.0));
    let m1 = Preconditioner::from_dense_factor(s1);
    let eig = abs_normal_weights(&mut g, d);
    let q = orthonormal(&mut g, d, d, true);
    let sqrt: Vec<f64> = eig.iter().map(|v| v.sqrt()).collect();
    let m2 = Preconditioner::from_economy(q, sqrt.clone())?;
    let mut p3 = problem.u_plus.clone().insert_column(r_plus, C64::new(0.0, 0.0));
    for (i, v) in problem.u_minus.iter().enumerate() {
        p3[(i, r_plus)] = *v;
    }
    let m3 = Preconditioner::from_economy(p3, sqrt[..r].to_vec())?;
    let m4 = Preconditioner::from_economy(problem.u_plus.clone(), sqrt[..r_plus].to_vec())?;
    Ok(NpcSuite { m1, m2, m3, m4 })
}

/// One row of the error sweep.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub i: usize,
    /// `||x_g - A†b|| / ||A†b||`
    pub e_x: f64,
    /// Same for the lifted iterate.
    pub e_x_hat: f64,
    /// `||r_g - r†|| / ||r†||` with `r† = b - A A†b` (absolute when `r† = 0`).
    pub e_r: f64,
    /// `x_g` against the pseudo-inverse solution of the projected problem.
    pub e_p: f64,
    /// `||M r_g||` (`||conj(M) r_g||` for complex-symmetric).
    pub norm_mr: f64,
    /// `||A^H M r_g||` (`||A^H conj(M) r_g||` for complex-symmetric).
    pub norm_amr: f64,
    /// `||A rhat_g||` (`||conj(A) rhat_g||` for complex-symmetric)
    pub norm_a_rhat: f64,
    /// `||rhat_g||`
    pub norm_rhat: f64,
    pub assumptions: RankAssumptions,
    pub iterations: usize,
}

pub const ERROR_CSV_HEADER: &str = "i,E_x,E_x_hat,E_r,E_P,norm_Mr,norm_AMr";

impl ErrorRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.i, self.e_x, self.e_x_hat, self.e_r, self.e_p, self.norm_mr, self.norm_amr
        )
    }
}

pub fn error_csv(rows: &[ErrorRow]) -> String {
    let mut s = format!("{ERROR_CSV_HEADER}\n");
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn psolve(op: &DenseOperator, m: &Preconditioner, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    match op.kind() {
        Symmetry::Hermitian => psolve_h(op, m, b, opts),
        Symmetry::ComplexSymmetric => psolve_cs(op, m, b, opts),
        Symmetry::SkewHermitian => {
            Err(Error::KindMismatch { expected: "hermitian or complex_symmetric", found: op.kind() })
        }
    }
}

/// Runs preconditioned MINRES (plus lifting) once per family member.
pub fn run_error_sweep(
    a: &CMat,
    b: &[C64],
    family: &[Preconditioner],
    kind: Symmetry,
    opts: &SolveOptions,
) -> Result<Vec<ErrorRow>> {
    let op = DenseOperator::new(a.clone(), kind)?;
    let xd = matvec(&pinv(a), b);
    let rd = sub(b, &matvec(a, &xd));
    let nrd = norm(&rd);
    let ah = a.adjoint();
    let mut rows = Vec::with_capacity(family.len());
    for (k, m) in family.iter().enumerate() {
        let rep = psolve(&op, m, b, opts)?;
        let x_hat = match plift(&rep) {
            Ok(x) => x,
            Err(Error::DegenerateLifting(_)) => rep.x.clone(),
            Err(e) => return Err(e),
        };
        let r = sub(b, &matvec(a, &rep.x));
        let mr = match kind {
            Symmetry::ComplexSymmetric => crate::vector::conj(&m.apply_m(&crate::vector::conj(&r))?),
            _ => m.apply_m(&r)?,
        };
        let xp = lifted_problem_pinv(a, m, b, kind)?;
        let e_r = if nrd > 0.0 { norm(&sub(&r, &rd)) / nrd } else { norm(&r) };
        rows.push(ErrorRow {
            i: m.rank().unwrap_or(k + 1),
            e_x: rel_err(&rep.x, &xd),
            e_x_hat: rel_err(&x_hat, &xd),
            e_r,
            e_p: rel_err(&rep.x, &xp),
            norm_mr: norm(&mr),
            norm_amr: norm(&matvec(&ah, &mr)),
            norm_a_rhat: match kind {
                Symmetry::ComplexSymmetric => norm(&op.apply_conj(&rep.residual)?),
                _ => norm(&op.apply(&rep.residual)?),
            },
            norm_rhat: norm(&rep.residual),
            assumptions: check_rank_assumptions(a, m, kind)?,
            iterations: rep.iterations,
        });
    }
    Ok(rows)
}

/// Inertia of a Hermitian matrix: `(positive, negative, zero)` counts at a
/// relative cutoff.
pub fn inertia(a: &CMat, rel: f64) -> (usize, usize, usize) {
    let (values, _) = crate::dense::hermitian_eigen(a).expect("eigensolver did not converge");
    let lmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pos = values.iter().filter(|&&v| v > rel * lmax).count();
    let neg = values.iter().filter(|&&v| v < -rel * lmax).count();
    (pos, neg, values.len() - pos - neg)
}

/// Hermitian `A` of rank `r` whose eigenvalues are log-uniform in
/// `[0.1, 10]` with random signs; used as `A₁` of the error sweep.
pub fn sweep_hermitian(d: usize, r: usize, seed: u64) -> CMat {
    crate::random::hermitian_with_rank(&mut rng(seed), d, r)
}

/// Complex-symmetric `A₂` of rank `r`.
pub fn sweep_complex_symmetric(d: usize, r: usize, seed: u64) -> CMat {
    crate::random::complex_symmetric_with_rank(&mut rng(seed), d, r)
}
