//! Command-line front end for the experiment drivers.
//!
//! Exit codes: 0 success, 1 usage, configuration or I/O error, 2 a checked property failed
//! under `--assert` (or an equivalence mismatch, which always fails).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pinv_minres::experiments::{
    cmd_deblur, cmd_equiv, cmd_npc, cmd_precon_sweep, cmd_synthetic, DeblurConfig, EquivConfig, NpcConfig, Outcome,
    SweepConfig, SyntheticConfig,
};
use pinv_minres::Symmetry;

#[derive(Parser)]
#[command(name = "pinv-minres", version, about = "Pseudo-inverse MINRES experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// RNG seed; every run is deterministic given the seed.
    #[arg(long, env = "PINV_MINRES_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when a checked property fails.
    #[arg(long)]
    assert: bool,
    /// Disable full reorthogonalization of the Lanczos vectors.
    #[arg(long)]
    no_reorth: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Plain vs lifted MINRES errors per iteration on a random singular system.
    Synthetic {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 15)]
        rank: usize,
        /// hermitian | cs | skew
        #[arg(long, default_value = "hermitian")]
        kind: Symmetry,
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Error metrics for rank-i range-preserved and random PSD preconditioners.
    PreconSweep {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 15)]
        rank: usize,
        /// hermitian | cs
        #[arg(long, default_value = "hermitian")]
        kind: Symmetry,
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Non-positive-curvature monitor over the four-preconditioner suite.
    Npc {
        #[arg(long, default_value_t = 20)]
        d: usize,
        /// Number of positive eigenvalues.
        #[arg(long, default_value_t = 14)]
        r_plus: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Preconditioned MINRES vs the reduced solve under two factorizations.
    Equiv {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 15)]
        rank: usize,
        #[arg(long, default_value_t = 10)]
        m_rank: usize,
        /// hermitian | cs
        #[arg(long, default_value = "hermitian")]
        kind: Symmetry,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian deblurring with MINRES, preconditioned MINRES, LSQR and TSVD.
    Deblur {
        /// Image side length (ignored with --input).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        bandwidth: Option<usize>,
        #[arg(long)]
        sigma_blur: Option<f64>,
        #[arg(long)]
        sigma_noise: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Factor rank r; the rank-ratio is r²/n².
        #[arg(long)]
        rank: Option<usize>,
        /// Start from the n=1024, w=101, σ=9 setting.
        #[arg(long)]
        full: bool,
        /// Divide the blur stencil by its sum.
        #[arg(long)]
        normalize_blur: bool,
        /// Orthonormalize the first r columns instead of a pivoted QR.
        #[arg(long)]
        unpivoted: bool,
        /// Three-channel phantom.
        #[arg(long)]
        color: bool,
        /// Binary PGM (P5) or PPM (P6) input image.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Directory for original, blurred and per-solver images.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Record wall-clock seconds in the CSV.
        #[arg(long)]
        timings: bool,
        #[arg(long, env = "PINV_MINRES_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        assert: bool,
    },
}

fn run(command: Command) -> pinv_minres::Result<(Outcome, Option<PathBuf>, bool)> {
    Ok(match command {
        Command::Synthetic { d, rank, kind, max_iter, common } => {
            let cfg = SyntheticConfig { d, rank, kind, reorth: !common.no_reorth, max_iter, seed: common.seed };
            (cmd_synthetic(&cfg)?, common.out, common.assert)
        }
        Command::PreconSweep { d, rank, kind, max_iter, common } => {
            let cfg = SweepConfig { d, rank, kind, reorth: !common.no_reorth, max_iter, seed: common.seed };
            (cmd_precon_sweep(&cfg)?, common.out, common.assert)
        }
        Command::Npc { d, r_plus, common } => {
            let cfg = NpcConfig { d, r_plus, reorth: !common.no_reorth, seed: common.seed };
            (cmd_npc(&cfg)?, common.out, common.assert)
        }
        Command::Equiv { d, rank, m_rank, kind, pairs, common } => {
            let cfg = EquivConfig { d, rank, m_rank, kind, pairs, reorth: !common.no_reorth, seed: common.seed };
            // A trace mismatch is the command's result, not an optional check.
            (cmd_equiv(&cfg)?, common.out, true)
        }
        Command::Deblur {
            n,
            bandwidth,
            sigma_blur,
            sigma_noise,
            iterations,
            rank,
            full,
            normalize_blur,
            unpivoted,
            color,
            input,
            out_dir,
            timings,
            seed,
            out,
            assert,
        } => {
            let mut cfg = if full { DeblurConfig::full_size() } else { DeblurConfig::default() };
            cfg.n = n.unwrap_or(cfg.n);
            cfg.bandwidth = bandwidth.unwrap_or(cfg.bandwidth);
            cfg.sigma_blur = sigma_blur.unwrap_or(cfg.sigma_blur);
            cfg.sigma_noise = sigma_noise.unwrap_or(cfg.sigma_noise);
            cfg.iterations = iterations.unwrap_or(cfg.iterations);
            cfg.rank = rank.unwrap_or(cfg.rank);
            cfg.normalize_blur = normalize_blur;
            cfg.pivoted_qr = !unpivoted;
            cfg.color = color;
            cfg.input = input;
            cfg.out_dir = out_dir;
            cfg.timings = timings;
            cfg.seed = seed;
            (cmd_deblur(&cfg)?, out, assert)
        }
    })
}

fn main() -> ExitCode {
    env_logger::init();
    // clap exits with 2 on usage errors; 2 is reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (outcome, out, assert) = match run(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.csv) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
            for line in &outcome.summary {
                println!("{line}");
            }
        }
        None => {
            print!("{}", outcome.csv);
            for line in &outcome.summary {
                eprintln!("{line}");
            }
        }
    }
    for f in &outcome.failures {
        eprintln!("property failed: {f}");
    }
    if assert && !outcome.passed() {
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
