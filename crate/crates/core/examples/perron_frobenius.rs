//! Perron-Frobenius eigenpairs, the power-cap constraints they express, and
//! the map from rates back to powers.

use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::netmodel::snapshot;
use d2d_secrecy::spectral::{build_subproblem, constraint_matrices_lenient, normalize, pf_eigenpair, recover_power, PF_MAX_ITER, PF_TOL};
use d2d_secrecy::suballoc::allocate_heuristic;
use nalgebra::{DMatrix, DVector};

fn main() -> d2d_secrecy::Result<()> {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 0.5, 0.0, 3.0, 1.0, 1.0, 0.0]);
    let pf = pf_eigenpair(&a, PF_TOL, PF_MAX_ITER)?;
    println!("rho = {:.12}, x = {:.6?}, y^T x = {:.3e}", pf.rho, pf.x.as_slice(), pf.y.dot(&pf.x));
    println!("|Ax - rho x| = {:.2e}", (&a * &pf.x - &pf.x * pf.rho).amax());

    let cfg = NetworkConfig::desk();
    let (_, ch) = snapshot(&cfg, 11)?;
    let alloc = allocate_heuristic(&ch, &cfg);
    let sp = build_subproblem(&ch, &alloc, &cfg, 0)?;
    let ns = normalize(&sp)?;
    let cm = constraint_matrices_lenient(&ns, &sp.p_max)?;
    println!("\nsubcarrier 0 users {:?}", sp.users);
    println!("constraint forms {:?}", cm.legit.form);

    // Rates from half power; every cap constraint then sits below zero.
    let p = &sp.p_max * 0.5;
    let c = sp.legit_rates(&p);
    for j in 0..sp.dim() {
        println!("  user {j}: log rho = {:+.4}", cm.legit.log_rho(j, &c)?);
    }
    let back = recover_power(&c, &ns)?;
    println!("recovered powers match to {:.2e} W", (&back - &p).amax());

    // Scaling all rates up pushes someone past its cap.
    let hot: DVector<f64> = &c * 1.5;
    match recover_power(&hot, &ns) {
        Ok(q) => {
            let over = q.component_div(&sp.p_max).max();
            println!("1.5x rates need {:.2}x the largest cap; worst log rho {:+.4}", over, (0..sp.dim()).map(|j| cm.legit.log_rho(j, &hot).unwrap()).fold(f64::MIN, f64::max));
        }
        Err(e) => println!("1.5x rates are not jointly reachable: {e}"),
    }
    Ok(())
}
