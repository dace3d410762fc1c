//! A small power sweep through the experiment driver, written to CSV and read back.

use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::harness::{read_csv, run_experiment, write_csv, ExperimentKind, ExperimentSpec, SeedTag};

fn main() -> d2d_secrecy::Result<()> {
    let mut spec = ExperimentSpec::new(ExperimentKind::PowerSweep, NetworkConfig::desk(), 10);
    spec.sweep = vec![14.0, 20.0, 26.0, 32.0];
    let table = run_experiment(&spec)?;

    let path = std::env::temp_dir().join("d2dsec_power_sweep.csv");
    write_csv(&table, &path)?;
    for row in read_csv(&path)?.iter().filter(|r| r.seed == SeedTag::Mean) {
        println!("{} dBm: {:.4e} bit/s, {:.0}% users meet QoS", row.sweep_value, row.total_secrecy_bps, 100.0 * row.feasible_fraction);
    }
    println!("wrote {}", path.display());
    Ok(())
}
