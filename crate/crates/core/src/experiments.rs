//! Experiment drivers behind the `pinv-minres` subcommands.
//!
//! Each `cmd_*` returns an [`Outcome`]: a versioned CSV document, a few human
//! readable summary lines and the list of checked properties that failed.
//! Nothing here prints or touches the filesystem except [`cmd_deblur`], which
//! writes images when asked to.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::baselines::{kron_tsvd, lsqr};
use crate::error::{Error, Result};
use crate::imaging::{self, add_noise, psnr, ssim, ImagePlane};
use crate::minres::{lift, lift_cs, solve, solve_cs, solve_skew, SolveOptions, SolveReport};
use crate::npc::{attach, verify_identities};
use crate::operator::{DenseOperator, GaussianBlurToeplitz, KroneckerOperator, LinearOperator, Symmetry};
use crate::oracle::{matvec, pinv};
use crate::pminres::{psolve_cs, psolve_h, subsolve, DenseFactor, KroneckerFactor, Preconditioner};
use crate::precon_factory::{
    make_npc_suite, make_rank_family, run_error_sweep, sweep_complex_symmetric, sweep_hermitian, BasisSource,
    NpcProblem, RankFamilySpec,
};
use crate::random::{self, CMat};
use crate::vector::{norm, rel_err};
use crate::C64;

/// First line of every CSV document.
pub const CSV_MAGIC: &str = "pinv-minres-csv v1";

/// Largest dimension accepted by the dense-oracle commands.
pub const MAX_DENSE_DIM: usize = 512;

/// Result of one experiment run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub csv: String,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn preamble(config_line: &str, columns: &str) -> String {
    format!("{CSV_MAGIC}\n# config: {config_line}\n{columns}\n")
}

fn ones(d: usize) -> Vec<C64> {
    vec![C64::new(1.0, 0.0); d]
}

fn check_dense(d: usize, rank: usize) -> Result<()> {
    if d == 0 || d > MAX_DENSE_DIM {
        return Err(Error::InvalidConfig(format!("d must be in 1..={MAX_DENSE_DIM}, got {d}")));
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidConfig(format!("rank must be in 1..={d}, got {rank}")));
    }
    Ok(())
}

fn dense_opts(d: usize, reorth: bool, max_iter: Option<usize>) -> SolveOptions {
    SolveOptions::default().with_max_iterations(max_iter.unwrap_or(10 * d + 10)).with_reorthogonalization(reorth)
}

// ---------------------------------------------------------------- synthetic

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub d: usize,
    pub rank: usize,
    pub kind: Symmetry,
    pub reorth: bool,
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { d: 20, rank: 15, kind: Symmetry::Hermitian, reorth: true, max_iter: None, seed: 0 }
    }
}

impl SyntheticConfig {
    pub fn config_line(&self) -> String {
        format!(
            "command=synthetic d={} rank={} kind={} reorth={} max_iter={} seed={} b=ones",
            self.d,
            self.rank,
            self.kind,
            self.reorth,
            self.max_iter.map_or("auto".into(), |m| m.to_string()),
            self.seed
        )
    }
}

/// Random singular system of the requested kind with `b = 1`.
pub fn synthetic_system(d: usize, rank: usize, kind: Symmetry, seed: u64) -> CMat {
    let mut g = random::rng(seed);
    match kind {
        Symmetry::Hermitian => random::hermitian_with_rank(&mut g, d, rank),
        Symmetry::ComplexSymmetric => random::complex_symmetric_with_rank(&mut g, d, rank),
        Symmetry::SkewHermitian => random::skew_hermitian_with_rank(&mut g, d, rank),
    }
}

fn run_plain(op: &DenseOperator, b: &[C64], opts: &SolveOptions) -> Result<SolveReport> {
    match op.kind() {
        Symmetry::Hermitian => solve(op, b, opts),
        Symmetry::ComplexSymmetric => solve_cs(op, b, opts),
        Symmetry::SkewHermitian => solve_skew(op, b, opts),
    }
}

/// Relative error of the plain and lifted iterates at every iteration.
pub fn cmd_synthetic(cfg: &SyntheticConfig) -> Result<Outcome> {
    check_dense(cfg.d, cfg.rank)?;
    let a = synthetic_system(cfg.d, cfg.rank, cfg.kind, cfg.seed);
    let b = ones(cfg.d);
    let xd = matvec(&pinv(&a), &b);
    let op = DenseOperator::new(a, cfg.kind)?;
    let rep = run_plain(&op, &b, &dense_opts(cfg.d, cfg.reorth, cfg.max_iter).with_trace())?;

    let mut out = Outcome { csv: preamble(&cfg.config_line(), "t,err_plain,err_lifted,kind"), ..Default::default() };
    let mut last = (f64::NAN, f64::NAN);
    for rec in rep.trace.as_deref().unwrap_or_default() {
        let lifted = match cfg.kind {
            Symmetry::ComplexSymmetric => lift_cs(&rec.x, &rec.residual),
            _ => lift(&rec.x, &rec.residual),
        };
        last = (rel_err(&rec.x, &xd), rel_err(&lifted, &xd));
        writeln!(out.csv, "{},{:e},{:e},{}", rec.t, last.0, last.1, cfg.kind).unwrap();
    }
    // The report's own lifting also handles a vanished residual.
    let final_lifted = rel_err(&rep.lifted()?, &xd);
    out.summary.push(format!(
        "{} d={} rank={}: {} iterations ({}), final err_plain={:.3e}, err_lifted={:.3e}",
        cfg.kind,
        cfg.d,
        cfg.rank,
        rep.iterations,
        rep.termination.name(),
        last.0,
        final_lifted
    ));
    out.check(final_lifted <= 1e-8, || format!("final lifted error {final_lifted:.3e} > 1e-8"));
    Ok(out)
}

// -------------------------------------------------------------- precon sweep

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub d: usize,
    pub rank: usize,
    pub kind: Symmetry,
    pub reorth: bool,
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { d: 20, rank: 15, kind: Symmetry::Hermitian, reorth: true, max_iter: None, seed: 0 }
    }
}

impl SweepConfig {
    pub fn config_line(&self) -> String {
        format!(
            "command=precon-sweep d={} rank={} kind={} reorth={} max_iter={} seed={} b=ones",
            self.d,
            self.rank,
            self.kind,
            self.reorth,
            self.max_iter.map_or("auto".into(), |m| m.to_string()),
            self.seed
        )
    }
}

/// Error metrics over the rank-`i` range-preserved and random families.
pub fn cmd_precon_sweep(cfg: &SweepConfig) -> Result<Outcome> {
    check_dense(cfg.d, cfg.rank)?;
    let a = match cfg.kind {
        Symmetry::Hermitian => sweep_hermitian(cfg.d, cfg.rank, cfg.seed),
        Symmetry::ComplexSymmetric => sweep_complex_symmetric(cfg.d, cfg.rank, cfg.seed),
        k => return Err(Error::KindMismatch { expected: "hermitian or complex_symmetric", found: k }),
    };
    let b = ones(cfg.d);
    let opts = dense_opts(cfg.d, cfg.reorth, cfg.max_iter);
    let mut out = Outcome {
        csv: preamble(
            &cfg.config_line(),
            "family,i,E_x,E_x_hat,E_r,E_P,norm_Mr,norm_AMr,norm_A_rhat,norm_rhat,a_holds,b_holds,iterations",
        ),
        ..Default::default()
    };
    for source in [BasisSource::RangePreserved, BasisSource::RandomPsdSvd] {
        let spec = RankFamilySpec::new(cfg.d, source, cfg.seed.wrapping_add(1));
        let family = make_rank_family(&spec, Some(&a), cfg.kind)?;
        let rows = run_error_sweep(&a, &b, &family, cfg.kind, &opts)?;
        for r in &rows {
            writeln!(
                out.csv,
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{}",
                source.name(),
                r.i,
                r.e_x,
                r.e_x_hat,
                r.e_r,
                r.e_p,
                r.norm_mr,
                r.norm_amr,
                r.norm_a_rhat,
                r.norm_rhat,
                r.assumptions.a_holds,
                r.assumptions.b_holds,
                r.iterations
            )
            .unwrap();
            if r.i <= cfg.rank && r.assumptions.b_holds {
                out.check(r.e_p <= 1e-8, || format!("{} i={}: E_P = {:.3e} > 1e-8", source.name(), r.i, r.e_p));
            }
        }
        let min_ex = rows.iter().map(|r| r.e_x).fold(f64::INFINITY, f64::min);
        match source {
            BasisSource::RangePreserved => {
                let at_r = rows.iter().find(|r| r.i == cfg.rank).map_or(f64::INFINITY, |r| r.e_x);
                out.summary.push(format!("range_preserved: E_x at i = rank = {at_r:.3e}"));
                out.check(at_r <= 1e-8, || format!("range_preserved: E_x at i = {} is {at_r:.3e} > 1e-8", cfg.rank));
            }
            _ => {
                out.summary.push(format!("{}: min_i E_x = {min_ex:.3e}", source.name()));
                out.check(min_ex > 1e-3, || format!("{}: E_x dropped to {min_ex:.3e}", source.name()));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------- npc

#[derive(Debug, Clone)]
pub struct NpcConfig {
    pub d: usize,
    pub r_plus: usize,
    pub reorth: bool,
    pub seed: u64,
}

impl Default for NpcConfig {
    fn default() -> Self {
        Self { d: NpcProblem::D, r_plus: NpcProblem::R_PLUS, reorth: true, seed: 0 }
    }
}

impl NpcConfig {
    pub fn config_line(&self) -> String {
        format!(
            "command=npc d={} r_plus={} reorth={} seed={} eigenvalues=logspace(100,1)+[-1] b=ones",
            self.d, self.r_plus, self.reorth, self.seed
        )
    }
}

/// Monitor traces of preconditioned MINRES under the four NPC-suite
/// preconditioners.
pub fn cmd_npc(cfg: &NpcConfig) -> Result<Outcome> {
    if cfg.d == 0 || cfg.d > 128 {
        return Err(Error::InvalidConfig(format!("npc needs 1 <= d <= 128, got {}", cfg.d)));
    }
    if cfg.r_plus == 0 || cfg.r_plus + 1 > cfg.d {
        return Err(Error::InvalidConfig(format!("npc needs 1 <= r_plus < d, got {}", cfg.r_plus)));
    }
    let problem = NpcProblem::with_sizes(cfg.d, cfg.r_plus, cfg.seed);
    let suite = make_npc_suite(&problem, cfg.seed.wrapping_add(1))?;
    let op = DenseOperator::hermitian(problem.a.clone())?;
    let opts = dense_opts(cfg.d, cfg.reorth, None).with_trace();
    let mut out = Outcome {
        csv: preamble(&cfg.config_line(), "preconditioner,t,lambda_min,model,xb,mdag_norm,npc_test,detected"),
        ..Default::default()
    };
    for (name, m) in suite.all() {
        let rep = psolve_h(&op, m, &problem.b, &opts)?;
        let (cert, mono) = attach(&rep, &op, m, &problem.b)?;
        for t in 0..mono.model.len() {
            writeln!(
                out.csv,
                "{name},{t},{:e},{:e},{:e},{:e},{:e},{}",
                mono.lambda_min.get(t).copied().unwrap_or(f64::NAN),
                mono.model[t],
                mono.xb[t],
                mono.mdag_norm.get(t).copied().unwrap_or(f64::NAN),
                mono.npc_test.get(t).copied().unwrap_or(f64::NAN),
                cert.iteration.is_some_and(|i| i <= t)
            )
            .unwrap();
        }
        let identities = verify_identities(&cert, &rep, &op, &problem.b)?;
        let upto = cert.iteration.map_or(rep.iterations, |t| t - 1);
        let monotone = mono.violations(upto, 0.0);
        out.summary.push(format!(
            "{name}: {} iterations ({}), NPC at {}, lambda_min(T) = {:.3e}, {} identity / {} monotonicity violations",
            rep.iterations,
            rep.termination.name(),
            cert.iteration.map_or("none".into(), |t| t.to_string()),
            cert.lambda_min,
            identities.len(),
            monotone.len()
        ));
        let early = cert.detected_before(rep.iterations);
        if name == "M4" {
            out.check(!early, || format!("M4 detected NPC at iteration {:?}", cert.iteration));
        } else {
            out.check(cert.detected, || format!("{name} did not detect NPC"));
        }
        for v in identities.iter().chain(&monotone).take(3) {
            out.failures
                .push(format!("{name}: {} violated at t={} (magnitude {:.3e})", v.identity, v.iteration, v.magnitude));
        }
    }
    Ok(out)
}

// -------------------------------------------------------------------- equiv

#[derive(Debug, Clone)]
pub struct EquivConfig {
    pub d: usize,
    pub rank: usize,
    pub m_rank: usize,
    pub kind: Symmetry,
    pub pairs: usize,
    pub reorth: bool,
    pub seed: u64,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self { d: 20, rank: 15, m_rank: 10, kind: Symmetry::Hermitian, pairs: 1, reorth: true, seed: 0 }
    }
}

impl EquivConfig {
    pub fn config_line(&self) -> String {
        format!(
            "command=equiv d={} rank={} m_rank={} kind={} pairs={} reorth={} seed={}",
            self.d, self.rank, self.m_rank, self.kind, self.pairs, self.reorth, self.seed
        )
    }
}

/// Largest relative gap between two iterate sequences, and the first
/// iteration (1-based) where it exceeds `tol`. Unequal lengths count as a
/// divergence at the first missing iteration.
pub fn trace_gap(a: &[Vec<C64>], b: &[Vec<C64>], tol: f64) -> (f64, Option<usize>) {
    let mut worst = 0.0f64;
    let mut first = None;
    for (t, (x, y)) in a.iter().zip(b).enumerate() {
        let gap = norm(&crate::vector::sub(x, y)) / norm(x).max(norm(y)).max(f64::MIN_POSITIVE);
        worst = worst.max(gap);
        if gap > tol && first.is_none() {
            first = Some(t + 1);
        }
    }
    if a.len() != b.len() && first.is_none() {
        first = Some(a.len().min(b.len()) + 1);
    }
    (worst, first)
}

fn iterates(rep: &SolveReport) -> Vec<Vec<C64>> {
    rep.trace.as_deref().unwrap_or_default().iter().map(|r| r.x.clone()).collect()
}

/// One `(A, M)` pair of the equivalence check and its traces.
pub struct EquivTraces {
    /// Preconditioned MINRES on `(A, M)`.
    pub full: Vec<Vec<C64>>,
    /// Reduced solve with the economy factor `P diag(√σ)`.
    pub economy: Vec<Vec<C64>>,
    /// Reduced solve with the square PSD root `P diag(√σ) P^H`.
    pub root: Vec<Vec<C64>>,
}

pub fn equivalence_traces(
    d: usize,
    rank: usize,
    m_rank: usize,
    kind: Symmetry,
    opts: &SolveOptions,
    seed: u64,
) -> Result<EquivTraces> {
    let a = synthetic_system(d, rank, kind, seed);
    let op = DenseOperator::new(a, kind)?;
    let mut g = random::rng(seed ^ 0x5eed_0fe9_u64);
    let p = random::orthonormal(&mut g, d, m_rank, true);
    let w: Vec<f64> = random::abs_normal_weights(&mut g, m_rank).iter().map(|v| v.sqrt()).collect();
    let m = Preconditioner::from_economy(p.clone(), w.clone())?;
    let mut econ = p.clone();
    for (j, v) in w.iter().enumerate() {
        econ.column_mut(j).scale_mut(*v);
    }
    let root = &econ * p.adjoint();
    let b = ones(d);
    let opts = opts.clone().with_trace();
    let full = match kind {
        Symmetry::Hermitian => psolve_h(&op, &m, &b, &opts)?,
        Symmetry::ComplexSymmetric => psolve_cs(&op, &m, &b, &opts)?,
        k => return Err(Error::KindMismatch { expected: "hermitian or complex_symmetric", found: k }),
    };
    let e = subsolve(&op, Arc::new(DenseFactor::new(econ)), &b, &opts)?;
    let r = subsolve(&op, Arc::new(DenseFactor::new(root)), &b, &opts)?;
    Ok(EquivTraces { full: iterates(&full), economy: iterates(&e.full), root: iterates(&r.full) })
}

/// Preconditioned MINRES against the reduced solve under two factorizations.
pub fn cmd_equiv(cfg: &EquivConfig) -> Result<Outcome> {
    check_dense(cfg.d, cfg.rank)?;
    if cfg.m_rank == 0 || cfg.m_rank > cfg.d {
        return Err(Error::InvalidConfig(format!("m_rank must be in 1..={}, got {}", cfg.d, cfg.m_rank)));
    }
    const TOL: f64 = 1e-10;
    let opts = dense_opts(cfg.d, cfg.reorth, None);
    let mut out = Outcome {
        csv: preamble(&cfg.config_line(), "pair,comparison,iterations,max_rel_gap,first_divergence"),
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for k in 0..cfg.pairs.max(1) {
        let seed = cfg.seed.wrapping_add(k as u64);
        let tr = equivalence_traces(cfg.d, cfg.rank, cfg.m_rank, cfg.kind, &opts, seed)?;
        for (label, other) in [("psolve_vs_subsolve", &tr.economy), ("economy_vs_root", &tr.root)] {
            let base = if label == "psolve_vs_subsolve" { &tr.full } else { &tr.economy };
            let (gap, first) = trace_gap(base, other, TOL);
            worst = worst.max(gap);
            writeln!(out.csv, "{k},{label},{},{gap:e},{}", base.len(), first.map_or(String::new(), |t| t.to_string()))
                .unwrap();
            if let Some(t) = first {
                out.failures.push(format!("pair {k} {label}: first divergent iteration {t} (max gap {gap:.3e})"));
            }
        }
    }
    out.summary.push(format!("{} pair(s), {} kind: max relative trace gap {worst:.3e}", cfg.pairs.max(1), cfg.kind));
    Ok(out)
}

// ------------------------------------------------------------------- deblur

#[derive(Debug, Clone)]
pub struct DeblurConfig {
    pub n: usize,
    pub bandwidth: usize,
    pub sigma_blur: f64,
    pub sigma_noise: f64,
    pub iterations: usize,
    /// `r` for the sub-preconditioner factors and for TSVD (rank-ratio `r²/n²`).
    pub rank: usize,
    /// Divide the blur stencil by its sum.
    pub normalize_blur: bool,
    /// Column-pivoted (rank-revealing) truncated QR for the factor bases;
    /// otherwise the first `rank` columns are orthonormalized in order.
    pub pivoted_qr: bool,
    /// Use a three-channel phantom when no input is given.
    pub color: bool,
    /// Report wall-clock seconds in the CSV. Off keeps CSVs reproducible.
    pub timings: bool,
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for DeblurConfig {
    fn default() -> Self {
        Self {
            n: 64,
            bandwidth: 9,
            sigma_blur: 2.0,
            sigma_noise: 1e-2,
            iterations: 30,
            rank: 13,
            normalize_blur: false,
            pivoted_qr: true,
            color: false,
            timings: false,
            input: None,
            out_dir: None,
            seed: 0,
        }
    }
}

impl DeblurConfig {
    /// The full-size setting: `n = 1024`, `w = 101`, `σ = 9`.
    pub fn full_size() -> Self {
        Self { n: 1024, bandwidth: 101, sigma_blur: 9.0, rank: 205, ..Self::default() }
    }

    pub fn config_line(&self) -> String {
        format!(
            "command=deblur n={} bandwidth={} sigma_blur={} sigma_noise={} iterations={} rank={} normalize_blur={} color={} input={} seed={}",
            self.n,
            self.bandwidth,
            self.sigma_blur,
            self.sigma_noise,
            self.iterations,
            self.rank,
            self.normalize_blur,
            self.color,
            self.input.as_ref().map_or("phantom".into(), |p| p.display().to_string()),
            self.seed
        )
    }
}

/// One reconstruction and its scores against the clean image.
#[derive(Debug, Clone)]
pub struct DeblurResult {
    pub solver: &'static str,
    /// `r²/n²`, or `1` for unpreconditioned solvers; `None` for the blurred input.
    pub rank_ratio: Option<f64>,
    pub image: ImagePlane,
    pub psnr: f64,
    pub ssim: f64,
    pub seconds: f64,
}

/// Output of the deblurring pipeline.
#[derive(Debug, Clone)]
pub struct DeblurRun {
    pub original: ImagePlane,
    /// `Z X Z^T` before noise.
    pub blurred: ImagePlane,
    /// The blurred, noisy observation; also the first entry of `results`.
    pub observed: ImagePlane,
    pub results: Vec<DeblurResult>,
}

impl DeblurRun {
    pub fn get(&self, solver: &str) -> Option<&DeblurResult> {
        self.results.iter().find(|r| r.solver == solver)
    }
}

/// `Q diag(linspace(1, 2, r))` with `Q` the leading `r` columns of a QR
/// factorization of `g`.
pub fn scaled_basis(g: &DMatrix<f64>, r: usize, pivoted: bool) -> DMatrix<f64> {
    let mut q = crate::dense::leading_q_real(g, r, pivoted);
    for j in 0..r {
        let s = if r > 1 { 1.0 + j as f64 / (r - 1) as f64 } else { 1.0 };
        q.column_mut(j).scale_mut(s);
    }
    q
}

/// Runs every solver on every channel of `original`.
pub fn deblur_pipeline(original: &ImagePlane, cfg: &DeblurConfig) -> Result<DeblurRun> {
    let n = original.n();
    if cfg.rank == 0 || cfg.rank > n {
        return Err(Error::InvalidConfig(format!("rank must be in 1..={n}, got {}", cfg.rank)));
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be >= 1".into()));
    }
    if !(cfg.sigma_noise >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma_noise must be >= 0, got {}", cfg.sigma_noise)));
    }
    let z = GaussianBlurToeplitz::new(n, cfg.bandwidth, cfg.sigma_blur)?.normalized(cfg.normalize_blur).matrix();
    let a = KroneckerOperator::new(z.clone())?;
    let blurred = original.map_channels(|x| Ok(&z * x * &z))?;
    let observed = add_noise(&blurred, cfg.sigma_noise, cfg.seed);

    let r = cfg.rank;
    let mut g = random::rng(cfg.seed ^ 0xdeb1_u64);
    let c_hat = random::real_normal_matrix(&mut g, n, n);
    let s1 = Arc::new(KroneckerFactor::new(scaled_basis(&(&z * &c_hat), r, cfg.pivoted_qr)));
    let s2 = Arc::new(KroneckerFactor::new(scaled_basis(&c_hat, r, cfg.pivoted_qr)));
    let ratio = (r * r) as f64 / (n * n) as f64;
    let opts = SolveOptions::default().with_max_iterations(cfg.iterations);

    const SOLVERS: [&str; 8] = [
        "minres",
        "minres_lifted",
        "lsqr",
        "tsvd",
        "pminres_s1",
        "pminres_s1_lifted",
        "pminres_s2",
        "pminres_s2_lifted",
    ];
    let mut channels: Vec<Vec<DMatrix<f64>>> = vec![Vec::new(); SOLVERS.len()];
    let mut seconds = [0.0f64; SOLVERS.len()];
    for b_img in observed.channels() {
        let b = imaging::channel_to_vec(b_img);
        let mut push = |k: usize, v: &[C64], secs: f64| -> Result<()> {
            channels[k].push(imaging::vec_to_channel(n, v)?);
            seconds[k] += secs;
            Ok(())
        };

        let t = Instant::now();
        let rep = solve(&a, &b, &opts)?;
        let secs = t.elapsed().as_secs_f64();
        push(0, &rep.x, secs)?;
        let t = Instant::now();
        let lifted = rep.lifted()?;
        push(1, &lifted, secs + t.elapsed().as_secs_f64())?;

        let ls = lsqr(&a, &b, cfg.iterations)?;
        push(2, &ls.x, ls.seconds)?;
        let (_, ts) = kron_tsvd(&z, b_img, r)?;
        push(3, &ts.x, ts.seconds)?;

        for (k, s) in [(4, &s1), (6, &s2)] {
            let t = Instant::now();
            let sub = subsolve(&a, s.clone(), &b, &opts)?;
            let secs = t.elapsed().as_secs_f64();
            push(k, &sub.full.x, secs)?;
            push(k + 1, &sub.lifted, secs)?;
        }
    }

    let score = |solver: &'static str, rank_ratio: Option<f64>, image: ImagePlane, secs: f64| -> Result<DeblurResult> {
        let shown = image.renormalized();
        Ok(DeblurResult {
            solver,
            rank_ratio,
            psnr: psnr(&shown, original)?,
            ssim: ssim(&shown, original)?,
            image,
            seconds: secs,
        })
    };
    let mut results = vec![score("observed", None, observed.clone(), 0.0)?];
    for (k, planes) in channels.into_iter().enumerate() {
        let rr = if k >= 3 { Some(ratio) } else { Some(1.0) };
        results.push(score(SOLVERS[k], rr, ImagePlane::new(planes)?, seconds[k])?);
    }
    Ok(DeblurRun { original: original.clone(), blurred, observed, results })
}

/// Blur, add noise, deblur with every solver, score and optionally write images.
pub fn cmd_deblur(cfg: &DeblurConfig) -> Result<Outcome> {
    let original = match &cfg.input {
        Some(p) => imaging::read_image(p)?,
        None => imaging::phantom(cfg.n, cfg.color),
    };
    let run = deblur_pipeline(&original, cfg)?;
    let mut out =
        Outcome { csv: preamble(&cfg.config_line(), "solver,rank_ratio,psnr,ssim,seconds"), ..Default::default() };
    for r in &run.results {
        writeln!(
            out.csv,
            "{},{},{:.6},{:.6},{}",
            r.solver,
            r.rank_ratio.map_or(String::new(), |v| format!("{v:.6}")),
            r.psnr,
            r.ssim,
            if cfg.timings { format!("{:.6}", r.seconds) } else { "NA".into() }
        )
        .unwrap();
        out.summary.push(format!("{:<18} PSNR {:7.3} dB  SSIM {:.4}", r.solver, r.psnr, r.ssim));
    }
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let ext = if original.channel_count() == 1 { "pgm" } else { "ppm" };
        imaging::write_image(&run.original, dir.join(format!("original.{ext}")))?;
        imaging::write_image(&run.blurred.renormalized(), dir.join(format!("blurred.{ext}")))?;
        for r in &run.results {
            imaging::write_image(&r.image.renormalized(), dir.join(format!("{}.{ext}", r.solver)))?;
        }
    }
    for f in deblur_property_failures(&run) {
        out.failures.push(f);
    }
    Ok(out)
}

/// Inequalities expected of a desk-scale run. Empty when all hold.
pub fn deblur_property_failures(run: &DeblurRun) -> Vec<String> {
    let mut fails = Vec::new();
    let p = |s: &str| run.get(s).map_or(f64::NAN, |r| r.psnr);
    let observed = p("observed");
    if !(p("minres_lifted") >= p("minres")) {
        fails.push(format!("PSNR(minres_lifted) {:.3} < PSNR(minres) {:.3}", p("minres_lifted"), p("minres")));
    }
    for s in ["minres", "minres_lifted", "lsqr", "tsvd", "pminres_s1", "pminres_s1_lifted"] {
        if !(p(s) > observed) {
            fails.push(format!("PSNR({s}) {:.3} <= PSNR(observed) {observed:.3}", p(s)));
        }
    }
    for (a, b) in [("pminres_s1", "pminres_s2"), ("pminres_s1_lifted", "pminres_s2_lifted")] {
        if !(p(a) > p(b)) {
            fails.push(format!("PSNR({a}) {:.3} <= PSNR({b}) {:.3}", p(a), p(b)));
        }
    }
    fails
}
