//! Command line front end of the experiment driver.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{run_experiment, write_csv, write_trace_csv, ExperimentKind, ExperimentSpec};
use crate::config::{dbm_to_watts, NetworkConfig};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "d2dsec", version, about = "Secrecy-capacity experiments for D2D links in a two-tier HetNet")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-iteration behaviour of the power solver.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Use the large sizing H=10, M=15, K=15, N=20 (slow).
        #[arg(long)]
        fig2_sizing: bool,
    },
    /// Total secrecy against the QoS threshold, 0 to 0.2 bits/s/Hz.
    QosSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Total secrecy against the LUE power cap, 14 to 36 dBm.
    PowerSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Secrecy against the number of LUEs per LPN, 1 to 8, with N=8.
    LueSweep {
        #[command(flatten)]
        common: Common,
        /// LUE power cap, dBm.
        #[arg(long)]
        p_lue_dbm: Option<f64>,
    },
    /// All schemes on paired snapshots.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
    Desk,
    Tiny,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (TOML key-value). Without it the preset is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration used when --config is absent.
    #[arg(long, value_enum, default_value = "paper")]
    preset: Preset,
    /// First snapshot seed; snapshot i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    snapshots: usize,
    /// Output CSV; defaults to <subcommand>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Also write per-iteration solver rows to <out>.trace.csv.
    #[arg(long)]
    trace: bool,
    /// Record wall-clock time per run (makes the output non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn base_config(&self) -> Result<NetworkConfig> {
        let mut cfg = match &self.config {
            Some(p) => NetworkConfig::load(p)?,
            None => {
                let (name, cfg) = match self.preset {
                    Preset::Paper => ("paper", NetworkConfig::paper()),
                    Preset::Desk => ("desk", NetworkConfig::desk()),
                    Preset::Tiny => ("tiny", NetworkConfig::tiny()),
                };
                eprintln!(
                    "note: no --config given; using the built-in {name} configuration (H={}, L={}, M={}, K={}, N={})",
                    cfg.hues, cfg.lpns, cfg.lues_per_lpn, cfg.dues_per_lpn, cfg.subcarriers
                );
                cfg
            }
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (kind, common, name) = match &cli.command {
        Command::Convergence { common, .. } => (ExperimentKind::Convergence, common, "convergence"),
        Command::QosSweep { common } => (ExperimentKind::QosSweep, common, "qos-sweep"),
        Command::PowerSweep { common } => (ExperimentKind::PowerSweep, common, "power-sweep"),
        Command::LueSweep { common, .. } => (ExperimentKind::LueSweep, common, "lue-sweep"),
        Command::Compare { common } => (ExperimentKind::Compare, common, "compare"),
    };
    let mut base = common.base_config()?;
    match &cli.command {
        Command::Convergence { fig2_sizing: true, .. } => {
            base = base.clone().resized(10, base.lpns, 15, 15, 20);
        }
        Command::LueSweep { p_lue_dbm: Some(dbm), .. } => base.p_max_lue_w = dbm_to_watts(*dbm),
        _ => {}
    }
    let mut spec = ExperimentSpec::new(kind, base, common.snapshots);
    if !common.scheme.is_empty() {
        spec.schemes = common.scheme.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    spec.params.trace |= common.trace;
    spec.timing = common.timing;
    spec.validate()?;

    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let table = run_experiment(&spec)?;
    write_csv(&table, &out)?;
    if spec.params.trace {
        write_trace_csv(&table, out.with_extension("trace.csv"))?;
    }

    println!("{:<24} {:>14} {:>16} {:>14} {:>6}", "scheme", table.sweep_param, "mean_bps", "stderr_bps", "failed");
    for (value, scheme, rows) in table.groups() {
        let (m, e) = table.stat(scheme, value, |r| r.total_secrecy_bps);
        let failed = rows.iter().filter(|r| !r.ok()).count();
        println!("{:<24} {:>14} {:>16.6e} {:>14.4e} {:>6}", scheme.name(), value, m, e, failed);
        if let Some(err) = rows.iter().find_map(|r| r.error.as_deref()) {
            eprintln!("warning: {scheme} at {value}: {failed} failed run(s), first: {err}");
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// Parses `args` (program name first) and runs the requested experiment.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Toml(_) => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_shape_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn zero_snapshots_is_rejected() {
        assert_ne!(run(["d2dsec", "compare", "--snapshots", "0", "--out", "/nonexistent/x.csv"]), 0);
    }

    #[test]
    fn unknown_flag_fails() {
        assert_ne!(run(["d2dsec", "compare", "--bogus"]), 0);
        assert_ne!(run(["d2dsec", "frobnicate"]), 0);
    }
}
