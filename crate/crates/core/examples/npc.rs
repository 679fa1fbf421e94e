//! Non-positive-curvature detection inside preconditioned MINRES on an
//! indefinite singular system, for four preconditioners.

use pinv_minres::experiments::{cmd_npc, NpcConfig};

fn main() -> pinv_minres::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let out = cmd_npc(&NpcConfig { seed, ..Default::default() })?;
    for line in &out.summary {
        println!("{line}");
    }
    if !out.passed() {
        println!("failed checks: {:?}", out.failures);
    }
    Ok(())
}
