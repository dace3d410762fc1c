//! SINRs, secrecy capacities and QoS checks for a given allocation and power profile.
//!
//! Every subcarrier has `1 + 2L` slots: slot 0 is the HUE, slots `1..=L` hold
//! the LUE of each LPN and slots `L+1..=2L` the DUE pair of each LPN. A slot
//! may be empty. Every scheduled transmitter on a subcarrier interferes with
//! every other scheduled receiver on it, and the subcarrier's eavesdropper hears
//! all of them.

use crate::config::{NetworkConfig, UserClass};
use crate::error::{Error, Result};
use crate::netmodel::{ChannelSet, Dims, Rx, Tx};

pub type User = Tx;

/// Tolerance used when comparing summed secrecy rates (bits/s/Hz) with thresholds.
pub const QOS_TOL: f64 = 1e-9;

pub fn slot_count(d: &Dims) -> usize {
    1 + 2 * d.l
}

pub fn slot_of(d: &Dims, tx: Tx) -> usize {
    match tx {
        Tx::Hue(_) => 0,
        Tx::Lue(l, _) => 1 + l,
        Tx::Due(l, _) => 1 + d.l + l,
    }
}

/// Builds the transmitter occupying `slot` with in-class index `idx`.
pub fn slot_user(d: &Dims, slot: usize, idx: usize) -> Tx {
    if slot == 0 {
        Tx::Hue(idx)
    } else if slot <= d.l {
        Tx::Lue(slot - 1, idx)
    } else {
        Tx::Due(slot - 1 - d.l, idx)
    }
}

pub fn slot_class(d: &Dims, slot: usize) -> UserClass {
    slot_user(d, slot, 0).class()
}

fn slot_capacity(d: &Dims, slot: usize) -> usize {
    match slot_class(d, slot) {
        UserClass::Hue => d.h,
        UserClass::Lue => d.m,
        UserClass::Due => d.k,
    }
}

/// Subcarrier assignment: which user of each class holds each (cell, subcarrier).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    dims: Dims,
    slots: Vec<Vec<Option<usize>>>,
}

impl Allocation {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            slots: vec![vec![None; slot_count(&dims)]; dims.n],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, n: usize, slot: usize) -> Option<Tx> {
        self.slots[n][slot].map(|i| slot_user(&self.dims, slot, i))
    }

    pub fn set_slot(&mut self, n: usize, slot: usize, idx: Option<usize>) {
        self.slots[n][slot] = idx;
    }

    /// Schedules `tx` on `n`, evicting whoever held its slot.
    pub fn assign(&mut self, n: usize, tx: Tx) {
        let idx = match tx {
            Tx::Hue(h) => h,
            Tx::Lue(_, m) => m,
            Tx::Due(_, k) => k,
        };
        let s = slot_of(&self.dims, tx);
        self.slots[n][s] = Some(idx);
    }

    pub fn hue(&self, n: usize) -> Option<usize> {
        self.slots[n][0]
    }
    pub fn lue(&self, n: usize, l: usize) -> Option<usize> {
        self.slots[n][1 + l]
    }
    pub fn due(&self, n: usize, l: usize) -> Option<usize> {
        self.slots[n][1 + self.dims.l + l]
    }

    /// Scheduled users on `n` as `(slot, user)` in slot order.
    pub fn scheduled(&self, n: usize) -> Vec<(usize, Tx)> {
        (0..slot_count(&self.dims))
            .filter_map(|s| self.get(n, s).map(|u| (s, u)))
            .collect()
    }

    /// The α indicator.
    pub fn alpha(&self, tx: Tx, n: usize) -> bool {
        self.get(n, slot_of(&self.dims, tx)) == Some(tx)
    }

    pub fn subcarriers_of(&self, tx: Tx) -> Vec<usize> {
        (0..self.dims.n).filter(|&n| self.alpha(tx, n)).collect()
    }

    /// Every slot of every subcarrier is occupied by exactly one user.
    pub fn is_complete(&self) -> bool {
        self.slots.iter().flatten().all(Option::is_some)
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.slots {
            for (s, idx) in row.iter().enumerate() {
                if let Some(i) = idx {
                    if *i >= slot_capacity(&self.dims, s) {
                        return Err(Error::Invariant(format!("slot {s} holds user {i} out of range")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Transmit powers per (subcarrier, slot), W. Empty slots carry no power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    p: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn zeros(dims: &Dims) -> Self {
        Self {
            p: vec![vec![0.0; slot_count(dims)]; dims.n],
        }
    }

    /// `fraction * p_max` of each scheduled user's class, zero elsewhere.
    pub fn fixed(alloc: &Allocation, cfg: &NetworkConfig, fraction: f64) -> Self {
        Self::from_fn(alloc, |tx, _| fraction * cfg.p_max(tx.class()))
    }

    pub fn from_fn(alloc: &Allocation, mut f: impl FnMut(Tx, usize) -> f64) -> Self {
        let mut pw = Self::zeros(&alloc.dims());
        for n in 0..alloc.dims().n {
            for (s, tx) in alloc.scheduled(n) {
                pw.p[n][s] = f(tx, n);
            }
        }
        pw
    }

    pub fn get(&self, n: usize, slot: usize) -> f64 {
        self.p[n][slot]
    }

    pub fn set(&mut self, n: usize, slot: usize, w: f64) {
        self.p[n][slot] = w;
    }

    /// Power of `tx` on `n`; zero if it is not scheduled there.
    pub fn of(&self, alloc: &Allocation, tx: Tx, n: usize) -> f64 {
        if alloc.alpha(tx, n) {
            self.p[n][slot_of(&alloc.dims(), tx)]
        } else {
            0.0
        }
    }

    pub fn validate(&self, alloc: &Allocation, cfg: &NetworkConfig, tol: f64) -> Result<()> {
        let d = alloc.dims();
        for n in 0..d.n {
            for s in 0..slot_count(&d) {
                let p = self.p[n][s];
                let cap = cfg.p_max(slot_class(&d, s));
                let ok = match alloc.get(n, s) {
                    Some(_) => p >= 0.0 && p <= cap + tol,
                    None => p == 0.0,
                };
                if !ok {
                    return Err(Error::Invariant(format!("power {p} in slot {s} of subcarrier {n}")));
                }
            }
        }
        Ok(())
    }
}

/// Legitimate and eavesdropper SINRs per (subcarrier, slot); zero in empty slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub legit: Vec<Vec<f64>>,
    pub eve: Vec<Vec<f64>>,
}

fn sinrs_at(ch: &ChannelSet, alloc: &Allocation, pw: &PowerProfile, noise: f64, eve: bool) -> Vec<Vec<f64>> {
    let d = alloc.dims();
    (0..d.n)
        .map(|n| {
            let sched = alloc.scheduled(n);
            let mut row = vec![0.0; slot_count(&d)];
            for &(s, tx) in &sched {
                let rx = if eve { Rx::Eve } else { tx.serving_rx() };
                let interference: f64 = sched
                    .iter()
                    .filter(|&&(o, _)| o != s)
                    .map(|&(o, other)| pw.get(n, o) * ch.gain(other, rx, n))
                    .sum();
                row[s] = pw.get(n, s) * ch.gain(tx, rx, n) / (interference + noise);
            }
            row
        })
        .collect()
}

pub fn legit_sinrs(ch: &ChannelSet, alloc: &Allocation, pw: &PowerProfile, cfg: &NetworkConfig) -> Vec<Vec<f64>> {
    sinrs_at(ch, alloc, pw, cfg.noise_w(), false)
}

pub fn eve_sinrs(ch: &ChannelSet, alloc: &Allocation, pw: &PowerProfile, cfg: &NetworkConfig) -> Vec<Vec<f64>> {
    sinrs_at(ch, alloc, pw, cfg.noise_w(), true)
}

pub fn sinr_report(ch: &ChannelSet, alloc: &Allocation, pw: &PowerProfile, cfg: &NetworkConfig) -> SinrReport {
    SinrReport {
        legit: legit_sinrs(ch, alloc, pw, cfg),
        eve: eve_sinrs(ch, alloc, pw, cfg),
    }
}

/// `B (log2(1 + rho) - log2(1 + rho_e))` in bits/s. Not clipped.
pub fn secrecy_capacity(rho: f64, rho_e: f64, bandwidth: f64) -> f64 {
    bandwidth * (rho.ln_1p() - rho_e.ln_1p()) / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyBreakdown {
    pub bandwidth: f64,
    /// Secrecy rate per (subcarrier, slot), bits/s, unclipped.
    pub per_slot: Vec<Vec<f64>>,
    /// Rate of every user summed over its subcarriers, bits/s, in `Tx::all` order.
    pub per_user: Vec<(Tx, f64)>,
    /// Sum of all per-slot rates, bits/s, unclipped.
    pub total: f64,
    dims: Dims,
}

impl SecrecyBreakdown {
    /// Total with each (user, subcarrier) rate clipped at zero.
    pub fn total_clipped(&self) -> f64 {
        self.per_slot.iter().flatten().map(|c| c.max(0.0)).sum()
    }

    pub fn class_total_clipped(&self, class: UserClass) -> f64 {
        self.per_slot
            .iter()
            .flat_map(|row| row.iter().enumerate())
            .filter(|(s, _)| slot_class(&self.dims, *s) == class)
            .map(|(_, c)| c.max(0.0))
            .sum()
    }

    /// Clipped LUE total divided by the LUE population.
    pub fn mean_per_lue(&self) -> f64 {
        self.class_total_clipped(UserClass::Lue) / (self.dims.l * self.dims.m) as f64
    }

    /// A user's summed secrecy rate in bits/s/Hz.
    pub fn user_rate_bps_hz(&self, tx: Tx) -> f64 {
        self.per_user
            .iter()
            .find(|(u, _)| *u == tx)
            .map_or(0.0, |(_, c)| c / self.bandwidth)
    }
}

pub fn network_secrecy(ch: &ChannelSet, alloc: &Allocation, pw: &PowerProfile, cfg: &NetworkConfig) -> SecrecyBreakdown {
    let rep = sinr_report(ch, alloc, pw, cfg);
    breakdown_from_sinrs(&rep, alloc, cfg.bandwidth_per_subcarrier_hz)
}

pub fn breakdown_from_sinrs(rep: &SinrReport, alloc: &Allocation, bandwidth: f64) -> SecrecyBreakdown {
    let d = alloc.dims();
    let mut per_slot = vec![vec![0.0; slot_count(&d)]; d.n];
    let mut per_user: Vec<(Tx, f64)> = Tx::all(&d).into_iter().map(|t| (t, 0.0)).collect();
    for n in 0..d.n {
        for (s, tx) in alloc.scheduled(n) {
            let c = secrecy_capacity(rep.legit[n][s], rep.eve[n][s], bandwidth);
            per_slot[n][s] = c;
            per_user[tx.index(&d)].1 += c;
        }
    }
    let total = per_slot.iter().flatten().sum();
    SecrecyBreakdown {
        bandwidth,
        per_slot,
        per_user,
        total,
        dims: d,
    }
}

/// One flag per user (`Tx::all` order): summed secrecy rate meets the class threshold.
pub fn qos_feasible(bd: &SecrecyBreakdown, cfg: &NetworkConfig) -> Vec<bool> {
    bd.per_user
        .iter()
        .map(|&(tx, c)| c / bd.bandwidth >= cfg.c_min(tx.class()) - QOS_TOL)
        .collect()
}
