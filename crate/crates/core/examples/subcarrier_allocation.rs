//! The per-cell subcarrier heuristic against exhaustive search on a tiny
//! network, both scored with the power solver.

use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::netmodel::snapshot;
use d2d_secrecy::solver::{outer_solve, solve_network, SolverParams};
use d2d_secrecy::suballoc::{allocate_exhaustive, allocate_heuristic_with, exhaustive_size, LambdaSearch};

fn main() -> d2d_secrecy::Result<()> {
    let cfg = NetworkConfig::tiny();
    let params = SolverParams::default();
    println!("exhaustive search size: {:?} power solves", exhaustive_size(&d2d_secrecy::netmodel::Dims::of(&cfg)));

    for seed in 1..=5 {
        let (_, ch) = snapshot(&cfg, seed)?;
        let h = allocate_heuristic_with(&ch, &cfg, &LambdaSearch::default());
        let heur = solve_network(&ch, &h.alloc, &cfg, &params)?.breakdown.total_clipped();

        let score = |sp: &_| -> d2d_secrecy::Result<f64> {
            let s = outer_solve(sp, &params)?;
            Ok(s.secrecy.iter().map(|c| c.max(0.0)).sum())
        };
        let ex = allocate_exhaustive(&ch, &cfg, &score)?;
        let best = solve_network(&ch, &ex.alloc, &cfg, &params)?.breakdown.total_clipped();

        println!(
            "seed {seed}: heuristic {heur:.4e} bit/s (multiplier search converged: {}), exhaustive {best:.4e} bit/s over {} solves",
            h.converged(),
            ex.calls
        );
        for n in 0..cfg.subcarriers {
            println!("   n={n} heuristic {:?}  exhaustive {:?}", h.alloc.scheduled(n), ex.alloc.scheduled(n));
        }
    }
    Ok(())
}
