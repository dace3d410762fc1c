//! Every scheme on the same tiny snapshots.

use d2d_secrecy::baselines::{orthogonal_partition, run_scheme, Scheme};
use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::netmodel::{snapshot, Dims};
use d2d_secrecy::solver::SolverParams;

fn main() -> d2d_secrecy::Result<()> {
    let cfg = NetworkConfig::tiny();
    let params = SolverParams::default();
    println!("orthogonal split (HUE, LUE, DUE subcarriers): {:?}", orthogonal_partition(&Dims::of(&cfg))?);
    print!("{:>5}", "seed");
    for s in Scheme::ALL {
        print!(" {:>23}", s.name());
    }
    println!();
    for seed in 1..=8 {
        let (_, ch) = snapshot(&cfg, seed)?;
        print!("{seed:>5}");
        for s in Scheme::ALL {
            let r = run_scheme(s, &ch, &cfg, &params)?;
            print!(" {:>23.4e}", r.total_bps());
        }
        println!();
    }
    Ok(())
}
