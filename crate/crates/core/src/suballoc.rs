//! Subcarrier assignment.
//!
//! [`allocate_heuristic`] runs a small Lagrangian problem in every cell and
//! class: maximise the sum of per-subcarrier rates subject to a budget on the
//! interference leaked out of the cell. For multiplier `lambda` each
//! subcarrier goes to the user with the largest water-filling utility
//!
//! ```text
//! ln(1 + p* g / N) - lambda p* g_leak,   p* = min(p_max, [1/(lambda g_leak) - N/g]+)
//! ```
//!
//! and `lambda` follows a projected sub-gradient on the budget residual.
//!
//! [`allocate_exhaustive`] enumerates assignments. The power problem splits
//! over subcarriers, so the search runs per subcarrier over
//! `H * M^L * K^L` choices instead of over whole allocations.

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linkmetrics::{slot_count, slot_user, Allocation};
use crate::netmodel::{ChannelSet, Dims, Rx, Tx};
use crate::spectral::SubcarrierProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSearch {
    /// Initial multiplier, in units of `1 / budget`.
    pub lambda0: f64,
    pub xi0: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        Self {
            lambda0: 1.0,
            xi0: 0.1,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

/// One cell-and-class assignment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProblem {
    pub users: Vec<Tx>,
    /// `g[u][n]`: gain to the serving node.
    pub g: Vec<Vec<f64>>,
    /// `g_leak[u][n]`: gain toward the nodes the budget protects.
    pub g_leak: Vec<Vec<f64>>,
    pub budget: f64,
    pub noise: f64,
    pub p_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAssignment {
    /// Index into `users` per subcarrier.
    pub owner: Vec<usize>,
    /// Multiplier in units of `1 / budget`.
    pub lambda_norm: f64,
    pub leakage: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl CellProblem {
    pub fn subcarriers(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    /// Water-filling power and utility of user `u` on `n` at multiplier `lambda`.
    pub fn utility(&self, u: usize, n: usize, lambda: f64) -> (f64, f64) {
        let g = self.g[u][n];
        let gl = self.g_leak[u][n];
        if g <= 0.0 {
            return (0.0, 0.0);
        }
        let p = if lambda * gl > 0.0 {
            (1.0 / (lambda * gl) - self.noise / g).max(0.0).min(self.p_max[u])
        } else {
            self.p_max[u]
        };
        (p, (p * g / self.noise).ln_1p() - lambda * p * gl)
    }

    /// Per-subcarrier argmax at `lambda`; the lowest user index wins ties.
    pub fn select(&self, lambda: f64) -> (Vec<usize>, f64) {
        let mut owner = Vec::with_capacity(self.subcarriers());
        let mut leak = 0.0;
        for n in 0..self.subcarriers() {
            let mut best = 0;
            let (mut bp, mut bu) = self.utility(0, n, lambda);
            for u in 1..self.users.len() {
                let (p, val) = self.utility(u, n, lambda);
                if val > bu {
                    best = u;
                    bu = val;
                    bp = p;
                }
            }
            owner.push(best);
            leak += bp * self.g_leak[best][n];
        }
        (owner, leak)
    }

    fn rate(&self, owner: &[usize], lambda: f64) -> f64 {
        owner
            .iter()
            .enumerate()
            .map(|(n, &u)| {
                let (p, _) = self.utility(u, n, lambda);
                (p * self.g[u][n] / self.noise).ln_1p()
            })
            .sum()
    }

    /// Sub-gradient search on the multiplier. Returns the best assignment that
    /// met the budget, or the last one if none did.
    pub fn solve(&self, search: &LambdaSearch) -> CellAssignment {
        let mut lam = search.lambda0;
        let mut best: Option<(f64, CellAssignment)> = None;
        let mut last = None;
        for i in 1..=search.max_iter {
            let (owner, leak) = self.select(lam / self.budget);
            let cand = CellAssignment {
                owner,
                lambda_norm: lam,
                leakage: leak,
                iterations: i,
                converged: false,
            };
            if leak <= self.budget {
                let r = self.rate(&cand.owner, lam / self.budget);
                if best.as_ref().is_none_or(|(br, _)| r > *br) {
                    best = Some((r, cand.clone()));
                }
            }
            let next = (lam + search.xi0 / (i as f64).sqrt() * (leak / self.budget - 1.0)).max(0.0);
            let done = (next - lam).abs() < search.tol;
            lam = next;
            last = Some(cand);
            if done {
                let mut out = best.map(|(_, c)| c).or(last).expect("one iteration ran");
                out.converged = true;
                out.iterations = i;
                return out;
            }
        }
        let mut out = best.map(|(_, c)| c).or(last).expect("one iteration ran");
        out.iterations = search.max_iter;
        out
    }
}

/// The cell problems in slot order: HUEs, each LPN's LUEs, each LPN's DUE pairs.
pub fn cell_problems(ch: &ChannelSet, cfg: &NetworkConfig) -> Vec<CellProblem> {
    let d = ch.dims();
    (0..slot_count(&d))
        .map(|slot| {
            let count = match slot_user(&d, slot, 0) {
                Tx::Hue(_) => d.h,
                Tx::Lue(..) => d.m,
                Tx::Due(..) => d.k,
            };
            let users: Vec<Tx> = (0..count).map(|i| slot_user(&d, slot, i)).collect();
            let leak = |u: Tx, n: usize| match u {
                Tx::Hue(_) => (0..d.l).map(|l| ch.gain(u, Rx::Lpn(l), n)).sum(),
                _ => ch.gain(u, Rx::Hpn, n),
            };
            let budget = match users[0] {
                Tx::Hue(_) => cfg.i_max_hue_w,
                _ => cfg.i_max_lpn_w,
            };
            CellProblem {
                g: users.iter().map(|&u| (0..d.n).map(|n| ch.gain(u, u.serving_rx(), n)).collect()).collect(),
                g_leak: users.iter().map(|&u| (0..d.n).map(|n| leak(u, n)).collect()).collect(),
                p_max: users.iter().map(|u| cfg.p_max(u.class())).collect(),
                users,
                budget,
                noise: cfg.noise_w(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicAllocation {
    pub alloc: Allocation,
    /// One entry per cell problem, in slot order.
    pub cells: Vec<CellAssignment>,
}

impl HeuristicAllocation {
    pub fn converged(&self) -> bool {
        self.cells.iter().all(|c| c.converged)
    }
}

pub fn allocate_heuristic_with(ch: &ChannelSet, cfg: &NetworkConfig, search: &LambdaSearch) -> HeuristicAllocation {
    let d = ch.dims();
    let mut alloc = Allocation::empty(d);
    let cells: Vec<CellAssignment> = cell_problems(ch, cfg).iter().map(|cp| cp.solve(search)).collect();
    for (slot, ca) in cells.iter().enumerate() {
        for (n, &u) in ca.owner.iter().enumerate() {
            alloc.set_slot(n, slot, Some(u));
        }
    }
    HeuristicAllocation { alloc, cells }
}

pub fn allocate_heuristic(ch: &ChannelSet, cfg: &NetworkConfig) -> Allocation {
    allocate_heuristic_with(ch, cfg, &LambdaSearch::default()).alloc
}

/// Number of per-subcarrier power solves an exhaustive search needs.
pub fn exhaustive_size(d: &Dims) -> Option<u128> {
    let per = (d.h as u128)
        .checked_mul((d.m as u128).checked_pow(d.l as u32)?)?
        .checked_mul((d.k as u128).checked_pow(d.l as u32)?)?;
    per.checked_mul(d.n as u128)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveAllocation {
    pub alloc: Allocation,
    /// Best score per subcarrier.
    pub scores: Vec<f64>,
    pub calls: usize,
}

impl ExhaustiveAllocation {
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// Tries every assignment of one user per class and cell on each subcarrier,
/// scores each with `score` and keeps the best (first found on ties).
pub fn allocate_exhaustive(
    ch: &ChannelSet,
    cfg: &NetworkConfig,
    score: &dyn Fn(&SubcarrierProblem) -> Result<f64>,
) -> Result<ExhaustiveAllocation> {
    let d = ch.dims();
    let size = exhaustive_size(&d).unwrap_or(u128::MAX);
    if size > cfg.exhaustive_cap as u128 {
        return Err(Error::SearchSpaceTooLarge {
            size,
            cap: cfg.exhaustive_cap,
        });
    }
    let slots = slot_count(&d);
    let radix: Vec<usize> = (0..slots)
        .map(|s| match slot_user(&d, s, 0) {
            Tx::Hue(_) => d.h,
            Tx::Lue(..) => d.m,
            Tx::Due(..) => d.k,
        })
        .collect();
    let mut alloc = Allocation::empty(d);
    let mut scores = Vec::with_capacity(d.n);
    let mut calls = 0;
    for n in 0..d.n {
        let mut digits = vec![0usize; slots];
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            let users = digits.iter().enumerate().map(|(s, &i)| slot_user(&d, s, i)).collect();
            let sp = SubcarrierProblem::from_users(ch, cfg, n, users);
            let v = score(&sp)?;
            calls += 1;
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, digits.clone()));
            }
            // odometer, last slot fastest
            let mut s = slots;
            let wrapped = loop {
                if s == 0 {
                    break true;
                }
                s -= 1;
                digits[s] += 1;
                if digits[s] < radix[s] {
                    break false;
                }
                digits[s] = 0;
            };
            if wrapped {
                break;
            }
        }
        let (v, choice) = best.expect("non-empty search");
        for (s, &i) in choice.iter().enumerate() {
            alloc.set_slot(n, s, Some(i));
        }
        scores.push(v);
    }
    Ok(ExhaustiveAllocation { alloc, scores, calls })
}
