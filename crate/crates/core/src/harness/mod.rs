//! Monte-Carlo experiment driver.
//!
//! Every (sweep value, seed) cell draws one snapshot and runs all requested
//! schemes on the same channels, so scheme comparisons are paired. Seeds are
//! `seed_base + snapshot_index`; cells run on the rayon pool and are collected
//! in cell order, so output does not depend on the thread count.

pub mod cli;
pub mod table;

use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{run_scheme, Scheme};
use crate::config::{dbm_to_watts, NetworkConfig, UserClass};
use crate::error::{Error, Result};
use crate::netmodel::{snapshot, ChannelSet, Tx};
use crate::solver::{SolverParams, TraceRow};

pub use table::{read_csv, write_csv, write_trace_csv, CsvRow, ResultTable, SeedTag};

/// Outcome of one scheme on one snapshot. Failed runs carry `error` and NaN metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotResult {
    pub seed: u64,
    pub scheme: Scheme,
    pub sweep_value: f64,
    /// Bits/s, per-link secrecy clipped at zero.
    pub total_secrecy_bps: f64,
    /// Mean clipped secrecy per user of each class (HUE, LUE, DUE), bits/s.
    pub class_means_bps: [f64; 3],
    pub feasible_fraction: f64,
    pub outer_iters: usize,
    pub converged: bool,
    /// Zero unless timing was requested, so that output stays reproducible.
    pub wall_ms: f64,
    pub error: Option<String>,
    pub trace: Vec<TraceRow>,
}

impl SnapshotResult {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn mean_secrecy_per_lue_bps(&self) -> f64 {
        self.class_means_bps[1]
    }

    fn failed(seed: u64, scheme: Scheme, sweep_value: f64, err: &Error) -> Self {
        Self {
            seed,
            scheme,
            sweep_value,
            total_secrecy_bps: f64::NAN,
            class_means_bps: [f64::NAN; 3],
            feasible_fraction: f64::NAN,
            outer_iters: 0,
            converged: false,
            wall_ms: 0.0,
            error: Some(err.to_string()),
            trace: Vec::new(),
        }
    }
}

fn evaluate(ch: &ChannelSet, cfg: &NetworkConfig, seed: u64, scheme: Scheme, params: &SolverParams, sweep_value: f64, timing: bool) -> SnapshotResult {
    let start = Instant::now();
    let r = match run_scheme(scheme, ch, cfg, params) {
        Ok(r) => r,
        Err(e) => return SnapshotResult::failed(seed, scheme, sweep_value, &e),
    };
    let wall_ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let d = ch.dims();
    let class_means_bps = UserClass::ALL.map(|class| {
        let users = Tx::all(&d).into_iter().filter(|u| u.class() == class).count();
        if users == 0 {
            0.0
        } else {
            r.breakdown.class_total_clipped(class) / users as f64
        }
    });
    SnapshotResult {
        seed,
        scheme,
        sweep_value,
        total_secrecy_bps: r.total_bps(),
        class_means_bps,
        feasible_fraction: r.feasible_fraction(),
        outer_iters: r.outer_iters,
        converged: r.converged,
        wall_ms,
        error: None,
        trace: r.trace,
    }
}

/// One scheme on the snapshot drawn from `(cfg, seed)`. Deterministic.
pub fn run_snapshot(cfg: &NetworkConfig, seed: u64, scheme: Scheme, params: &SolverParams) -> SnapshotResult {
    run_paired(cfg, seed, &[scheme], params, 0.0, false).remove(0)
}

/// All `schemes` on the one snapshot drawn from `(cfg, seed)`.
pub fn run_paired(cfg: &NetworkConfig, seed: u64, schemes: &[Scheme], params: &SolverParams, sweep_value: f64, timing: bool) -> Vec<SnapshotResult> {
    match snapshot(cfg, seed) {
        Ok((_, ch)) => schemes
            .iter()
            .map(|&s| evaluate(&ch, cfg, seed, s, params, sweep_value, timing))
            .collect(),
        Err(e) => schemes.iter().map(|&s| SnapshotResult::failed(seed, s, sweep_value, &e)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Proposed scheme with per-iteration traces.
    Convergence,
    /// QoS threshold, bits/s/Hz, applied to every class.
    QosSweep,
    /// LUE power cap, dBm.
    PowerSweep,
    /// LUEs per LPN with 8 subcarriers and a 0.1 bits/s/Hz QoS floor.
    LueSweep,
    /// All schemes at the base configuration.
    Compare,
}

/// QoS floor used by the LUE sweep, bits/s/Hz.
pub const LUE_SWEEP_QOS: f64 = 0.1;
pub const LUE_SWEEP_SUBCARRIERS: usize = 8;

impl ExperimentKind {
    pub fn sweep_param(self) -> &'static str {
        match self {
            ExperimentKind::Convergence | ExperimentKind::Compare => "none",
            ExperimentKind::QosSweep => "c_min_bps_hz",
            ExperimentKind::PowerSweep => "p_max_lue_dbm",
            ExperimentKind::LueSweep => "lues_per_lpn",
        }
    }

    pub fn default_sweep(self) -> Vec<f64> {
        match self {
            ExperimentKind::Convergence | ExperimentKind::Compare => vec![0.0],
            ExperimentKind::QosSweep => (0..=10).map(|i| i as f64 * 0.02).collect(),
            ExperimentKind::PowerSweep => (0..=11).map(|i| 14.0 + 2.0 * i as f64).collect(),
            ExperimentKind::LueSweep => (1..=8).map(f64::from).collect(),
        }
    }

    pub fn default_schemes(self) -> Vec<Scheme> {
        match self {
            ExperimentKind::Compare => Scheme::ALL.to_vec(),
            _ => vec![Scheme::Proposed],
        }
    }

    /// The configuration for one sweep point.
    pub fn apply(self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let cfg = match self {
            ExperimentKind::Convergence | ExperimentKind::Compare => base.clone(),
            ExperimentKind::QosSweep => base.clone().with_qos(value),
            ExperimentKind::PowerSweep => NetworkConfig {
                p_max_lue_w: dbm_to_watts(value),
                ..base.clone()
            },
            ExperimentKind::LueSweep => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("LUE count must be a positive integer, got {value}")));
                }
                let b = base.clone();
                b.clone()
                    .resized(b.hues, b.lpns, value as usize, b.dues_per_lpn, LUE_SWEEP_SUBCARRIERS)
                    .with_qos(LUE_SWEEP_QOS)
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Strictly increasing.
    pub sweep: Vec<f64>,
    pub snapshots: usize,
    pub seed_base: u64,
    pub base: NetworkConfig,
    pub schemes: Vec<Scheme>,
    pub params: SolverParams,
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, base: NetworkConfig, snapshots: usize) -> Self {
        let mut params = SolverParams::default();
        params.trace = kind == ExperimentKind::Convergence;
        Self {
            kind,
            sweep: kind.default_sweep(),
            snapshots,
            seed_base: base.seed,
            base,
            schemes: kind.default_schemes(),
            params,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snapshots == 0 {
            return Err(Error::Config("snapshots must be at least 1".into()));
        }
        if self.sweep.is_empty() || self.sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep needs at least one finite value".into()));
        }
        if self.sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no scheme selected".into()));
        }
        self.base.validate()
    }
}

/// Runs every (sweep value, snapshot) cell. Per-snapshot failures become rows
/// with an error; only an invalid spec is fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cfgs = spec
        .sweep
        .iter()
        .map(|&v| spec.kind.apply(&spec.base, v))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, u64)> = (0..cfgs.len())
        .flat_map(|k| (0..spec.snapshots as u64).map(move |i| (k, i)))
        .collect();
    let rows: Vec<SnapshotResult> = cells
        .par_iter()
        .map(|&(k, i)| run_paired(&cfgs[k], spec.seed_base.wrapping_add(i), &spec.schemes, &spec.params, spec.sweep[k], spec.timing))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(ResultTable {
        sweep_param: spec.kind.sweep_param().to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sweep_grids() {
        let q = ExperimentKind::QosSweep.default_sweep();
        assert_eq!(q.len(), 11);
        assert!((q[10] - 0.2).abs() < 1e-15);
        let p = ExperimentKind::PowerSweep.default_sweep();
        assert_eq!((p.len(), p[0], p[11]), (12, 14.0, 36.0));
        assert_eq!(ExperimentKind::LueSweep.default_sweep(), (1..=8).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn lue_sweep_config() {
        let cfg = ExperimentKind::LueSweep.apply(&NetworkConfig::paper(), 3.0).unwrap();
        assert_eq!((cfg.lues_per_lpn, cfg.subcarriers, cfg.c_min_lue), (3, 8, 0.1));
        assert!(ExperimentKind::LueSweep.apply(&NetworkConfig::paper(), 2.5).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::new(ExperimentKind::QosSweep, NetworkConfig::tiny(), 1);
        assert!(s.validate().is_ok());
        s.snapshots = 0;
        assert!(s.validate().is_err());
        s.snapshots = 1;
        s.sweep = vec![0.1, 0.1];
        assert!(s.validate().is_err());
    }

    #[test]
    fn snapshot_is_deterministic_and_zero_power_is_silent() {
        let mut cfg = NetworkConfig::tiny();
        let p = SolverParams::default();
        let a = run_snapshot(&cfg, 4, Scheme::Proposed, &p);
        assert_eq!(a, run_snapshot(&cfg, 4, Scheme::Proposed, &p));
        cfg.fixed_power_fraction = 0.0;
        assert_eq!(run_snapshot(&cfg, 4, Scheme::FixedPower, &p).total_secrecy_bps, 0.0);
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = NetworkConfig::paper();
        let r = run_snapshot(&cfg, 1, Scheme::UpperBound, &SolverParams::default());
        assert!(!r.ok() && r.total_secrecy_bps.is_nan());
    }
}
