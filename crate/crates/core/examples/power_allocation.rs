//! Runs the dual power solver on every subcarrier of a snapshot and shows the
//! multiplier trajectory of one of them.

use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::netmodel::snapshot;
use d2d_secrecy::solver::{solve_network, SolverParams};
use d2d_secrecy::suballoc::allocate_heuristic;

fn main() -> d2d_secrecy::Result<()> {
    let cfg = NetworkConfig::desk().with_qos(0.1);
    let (_, ch) = snapshot(&cfg, 5)?;
    let alloc = allocate_heuristic(&ch, &cfg);
    let params = SolverParams {
        trace: true,
        ..SolverParams::default()
    };
    let sol = solve_network(&ch, &alloc, &cfg, &params)?;

    for s in sol.subcarriers.iter().flatten() {
        println!(
            "n={} converged={} after {} outer / {} inner steps",
            s.n, s.converged, s.outer_iters, s.inner_iters
        );
        for (i, u) in s.users.iter().enumerate() {
            println!(
                "   {:<10} p {:>9.3e} W  secrecy {:>7.3} nat/s/Hz  lambda {:>7.3}  qos {}",
                format!("{u:?}"),
                s.power[i],
                s.secrecy[i],
                s.duals.lambda[i],
                s.qos_ok[i]
            );
        }
    }
    println!("total {:.4e} bit/s", sol.breakdown.total_clipped());

    println!("\nsubcarrier 0 trajectory");
    for t in sol.trace().filter(|t| t.subcarrier == 0).take(12) {
        println!("  it {:>3}  L {:>9.4}  |lambda| {:.4}  max log rho {:+.3e}  moved {:.2e}", t.iter, t.objective_nats, t.lambda_norm, t.max_log_rho, t.movement);
    }
    Ok(())
}
