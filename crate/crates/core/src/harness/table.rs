//! Result tables and their CSV form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SnapshotResult;
use crate::baselines::Scheme;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub sweep_param: String,
    pub rows: Vec<SnapshotResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedTag {
    Seed(u64),
    Mean,
    Stderr,
}

impl SeedTag {
    fn render(self) -> String {
        match self {
            SeedTag::Seed(s) => s.to_string(),
            SeedTag::Mean => "mean".into(),
            SeedTag::Stderr => "stderr".into(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(SeedTag::Mean),
            "stderr" => Ok(SeedTag::Stderr),
            _ => s
                .parse()
                .map(SeedTag::Seed)
                .map_err(|_| Error::Config(format!("bad seed field `{s}`"))),
        }
    }
}

/// One line of the output file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scheme: Scheme,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub seed: SeedTag,
    pub total_secrecy_bps: f64,
    pub mean_secrecy_per_lue_bps: f64,
    pub feasible_fraction: f64,
    pub outer_iters: f64,
    pub wall_ms: f64,
}

#[derive(Serialize, Deserialize)]
struct Record {
    scheme: String,
    sweep_param: String,
    sweep_value: f64,
    seed: String,
    total_secrecy_bps: f64,
    mean_secrecy_per_lue_bps: f64,
    feasible_fraction: f64,
    outer_iters: f64,
    wall_ms: f64,
}

impl CsvRow {
    fn metrics(&self) -> [f64; 5] {
        [
            self.total_secrecy_bps,
            self.mean_secrecy_per_lue_bps,
            self.feasible_fraction,
            self.outer_iters,
            self.wall_ms,
        ]
    }

    fn with_metrics(&self, seed: SeedTag, m: [f64; 5]) -> Self {
        Self {
            seed,
            total_secrecy_bps: m[0],
            mean_secrecy_per_lue_bps: m[1],
            feasible_fraction: m[2],
            outer_iters: m[3],
            wall_ms: m[4],
            ..self.clone()
        }
    }
}

/// Sample mean and standard error (`n - 1` denominator); the error is NaN for one sample.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl ResultTable {
    /// `(sweep value, scheme)` groups in order of first appearance.
    pub fn groups(&self) -> Vec<(f64, Scheme, Vec<&SnapshotResult>)> {
        let mut out: Vec<(f64, Scheme, Vec<&SnapshotResult>)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|g| g.0 == r.sweep_value && g.1 == r.scheme) {
                Some(g) => g.2.push(r),
                None => out.push((r.sweep_value, r.scheme, vec![r])),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Mean and standard error of `f` over the successful rows of one group.
    pub fn stat(&self, scheme: Scheme, sweep_value: f64, f: impl Fn(&SnapshotResult) -> f64) -> (f64, f64) {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.scheme == scheme && r.sweep_value == sweep_value && r.ok())
            .map(f)
            .collect();
        mean_stderr(&v)
    }

    pub fn mean_total(&self, scheme: Scheme, sweep_value: f64) -> f64 {
        self.stat(scheme, sweep_value, |r| r.total_secrecy_bps).0
    }

    /// Data rows followed by `mean` and `stderr` rows, group by group. Failed
    /// runs are listed with NaN metrics and left out of the aggregates.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut out = Vec::with_capacity(self.rows.len() + 8);
        for (value, scheme, rows) in self.groups() {
            let data: Vec<CsvRow> = rows
                .iter()
                .map(|r| CsvRow {
                    scheme,
                    sweep_param: self.sweep_param.clone(),
                    sweep_value: value,
                    seed: SeedTag::Seed(r.seed),
                    total_secrecy_bps: r.total_secrecy_bps,
                    mean_secrecy_per_lue_bps: r.mean_secrecy_per_lue_bps(),
                    feasible_fraction: r.feasible_fraction,
                    outer_iters: if r.ok() { r.outer_iters as f64 } else { f64::NAN },
                    wall_ms: if r.ok() { r.wall_ms } else { f64::NAN },
                })
                .collect();
            let good: Vec<&CsvRow> = data.iter().zip(&rows).filter(|(_, r)| r.ok()).map(|(d, _)| d).collect();
            let mut mean = [0.0; 5];
            let mut err = [0.0; 5];
            for k in 0..5 {
                let col: Vec<f64> = good.iter().map(|d| d.metrics()[k]).collect();
                (mean[k], err[k]) = mean_stderr(&col);
            }
            let template = data[0].clone();
            out.extend(data);
            out.push(template.with_metrics(SeedTag::Mean, mean));
            out.push(template.with_metrics(SeedTag::Stderr, err));
        }
        out
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the table with a header row. An empty table is refused.
pub fn write_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Refused("result table is empty".into()));
    }
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in table.csv_rows() {
        w.serialize(Record {
            scheme: r.scheme.name().to_string(),
            sweep_param: r.sweep_param,
            sweep_value: r.sweep_value,
            seed: r.seed.render(),
            total_secrecy_bps: r.total_secrecy_bps,
            mean_secrecy_per_lue_bps: r.mean_secrecy_per_lue_bps,
            feasible_fraction: r.feasible_fraction,
            outer_iters: r.outer_iters,
            wall_ms: r.wall_ms,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for rec in csv::Reader::from_reader(file).deserialize() {
        let r: Record = rec?;
        out.push(CsvRow {
            scheme: r.scheme.parse()?,
            sweep_param: r.sweep_param,
            sweep_value: r.sweep_value,
            seed: SeedTag::parse(&r.seed)?,
            total_secrecy_bps: r.total_secrecy_bps,
            mean_secrecy_per_lue_bps: r.mean_secrecy_per_lue_bps,
            feasible_fraction: r.feasible_fraction,
            outer_iters: r.outer_iters,
            wall_ms: r.wall_ms,
        });
    }
    Ok(out)
}

/// Per-iteration solver rows of every run that recorded a trace.
pub fn write_trace_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(create(path)?);
    writeln!(f, "scheme,seed,sweep_value,iter,subcarrier,objective_nats,lambda_norm,beta_norm,mu_norm,max_log_rho").map_err(io)?;
    for r in &table.rows {
        for t in &r.trace {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{}",
                r.scheme, r.seed, r.sweep_value, t.iter, t.subcarrier, t.objective_nats, t.lambda_norm, t.beta_norm, t.mu_norm, t.max_log_rho
            )
            .map_err(io)?;
        }
    }
    f.flush().map_err(io)
}
