//! Draws one network snapshot and prints where everything landed and how
//! strong a few of the links are.
//!
//! ```text
//! cargo run --example scenario -- 7
//! ```

use d2d_secrecy::config::{watts_to_dbm, NetworkConfig};
use d2d_secrecy::netmodel::{snapshot, Rx, Tx};

fn db(g: f64) -> f64 {
    10.0 * g.log10()
}

fn main() -> d2d_secrecy::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = NetworkConfig::desk();
    let (topo, ch) = snapshot(&cfg, seed)?;

    println!("seed {seed}: H={} L={} M={} K={} N={}", cfg.hues, cfg.lpns, cfg.lues_per_lpn, cfg.dues_per_lpn, cfg.subcarriers);
    println!("noise per subcarrier {:.1} dBm", watts_to_dbm(cfg.noise_w()));
    for (l, p) in topo.lpn_pos.iter().enumerate() {
        println!("LPN {l} at ({:7.1}, {:7.1}), {:.0} m from the HPN", p.x, p.y, p.dist(topo.hpn_pos));
    }
    for (n, e) in topo.eve_pos.iter().enumerate() {
        println!("eavesdropper of subcarrier {n} at ({:7.1}, {:7.1})", e.x, e.y);
    }

    // Direct and wiretap gains on subcarrier 0.
    println!("\n{:<12} {:>10} {:>10} {:>10}", "user", "dist [m]", "direct dB", "eve dB");
    for tx in Tx::all(&ch.dims()) {
        let rx = tx.serving_rx();
        let d = topo.tx_pos(tx).dist(topo.rx_pos(rx, 0));
        println!(
            "{:<12} {:>10.1} {:>10.1} {:>10.1}",
            format!("{tx:?}"),
            d,
            db(ch.gain(tx, rx, 0)),
            db(ch.gain(tx, Rx::Eve, 0))
        );
    }
    Ok(())
}
