//! Gaussian deblurring of a phantom with every solver.
//!
//! `cargo run --release --example deblur -- [n] [out_dir]`

use std::path::PathBuf;

use pinv_minres::experiments::{cmd_deblur, DeblurConfig};

fn main() -> pinv_minres::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = DeblurConfig::default();
    if let Some(n) = args.next().and_then(|s| s.parse().ok()) {
        cfg.n = n;
        cfg.rank = ((n as f64) * 0.2).round().max(1.0) as usize;
    }
    cfg.out_dir = args.next().map(PathBuf::from);
    let out = cmd_deblur(&cfg)?;
    print!("{}", out.csv);
    for line in out.summary.iter().chain(&out.failures) {
        println!("{line}");
    }
    Ok(())
}
