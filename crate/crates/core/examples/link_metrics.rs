//! SINRs and secrecy rates for a fixed allocation and power profile.

use d2d_secrecy::config::{NetworkConfig, UserClass};
use d2d_secrecy::linkmetrics::{network_secrecy, qos_feasible, sinr_report, slot_of, PowerProfile};
use d2d_secrecy::netmodel::snapshot;
use d2d_secrecy::suballoc::allocate_heuristic;

fn main() -> d2d_secrecy::Result<()> {
    let cfg = NetworkConfig::desk().with_qos(0.5);
    let (_, ch) = snapshot(&cfg, 3)?;
    let alloc = allocate_heuristic(&ch, &cfg);
    let d = alloc.dims();

    for fraction in [1.0, 0.5, 0.1] {
        let pw = PowerProfile::fixed(&alloc, &cfg, fraction);
        let rep = sinr_report(&ch, &alloc, &pw, &cfg);
        let bd = network_secrecy(&ch, &alloc, &pw, &cfg);
        let ok = qos_feasible(&bd, &cfg).iter().filter(|&&q| q).count();
        println!("power at {:>3.0}% of p_max", fraction * 100.0);
        for (n, (legit, eve)) in rep.legit.iter().zip(&rep.eve).enumerate() {
            for (_, tx) in alloc.scheduled(n) {
                let s = slot_of(&d, tx);
                println!(
                    "  n={n} {:<10} sinr {:>9.2e}  eve {:>9.2e}  secrecy {:>10.3e} bit/s",
                    format!("{tx:?}"),
                    legit[s],
                    eve[s],
                    bd.per_slot[n][s]
                );
            }
        }
        for class in UserClass::ALL {
            println!("  {class:?} total {:.3e} bit/s (clipped)", bd.class_total_clipped(class));
        }
        println!("  total {:.4e} bit/s, {ok}/{} users meet 0.5 bit/s/Hz\n", bd.total_clipped(), bd.per_user.len());
    }
    Ok(())
}
