//! Reference schemes: the exhaustive upper bound, the proposed scheme, an
//! interference-avoidance scheduler, orthogonal allocation and fixed power.
//! All of them report through [`BaselineResult`].

use std::fmt;
use std::str::FromStr;

use crate::config::{NetworkConfig, UserClass};
use crate::error::{Error, Result};
use crate::linkmetrics::{network_secrecy, qos_feasible, slot_count, Allocation, PowerProfile, SecrecyBreakdown};
use crate::netmodel::{ChannelSet, Dims, Tx};
use crate::solver::{outer_solve, solve_network, NetworkSolution, SolverParams, TraceRow};
use crate::suballoc::{allocate_exhaustive, allocate_heuristic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    UpperBound,
    Proposed,
    InterferenceAvoidance,
    Orthogonal,
    FixedPower,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::UpperBound,
        Scheme::Proposed,
        Scheme::InterferenceAvoidance,
        Scheme::Orthogonal,
        Scheme::FixedPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::UpperBound => "upper_bound",
            Scheme::Proposed => "proposed",
            Scheme::InterferenceAvoidance => "interference_avoidance",
            Scheme::Orthogonal => "orthogonal",
            Scheme::FixedPower => "fixed_power",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub scheme: Scheme,
    pub alloc: Allocation,
    pub power: PowerProfile,
    pub breakdown: SecrecyBreakdown,
    /// Per-user QoS flags in `Tx::all` order.
    pub qos: Vec<bool>,
    /// Largest outer iteration count over subcarriers; 0 for schemes without a solver.
    pub outer_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl BaselineResult {
    /// Total secrecy, bits/s, each link clipped at zero.
    pub fn total_bps(&self) -> f64 {
        self.breakdown.total_clipped()
    }

    pub fn feasible_fraction(&self) -> f64 {
        self.qos.iter().filter(|&&q| q).count() as f64 / self.qos.len() as f64
    }

    fn evaluated(scheme: Scheme, ch: &ChannelSet, cfg: &NetworkConfig, alloc: Allocation, power: PowerProfile) -> Self {
        let breakdown = network_secrecy(ch, &alloc, &power, cfg);
        let qos = qos_feasible(&breakdown, cfg);
        Self {
            scheme,
            alloc,
            power,
            breakdown,
            qos,
            outer_iters: 0,
            converged: true,
            trace: Vec::new(),
        }
    }

    fn solved(scheme: Scheme, alloc: Allocation, sol: NetworkSolution) -> Self {
        Self {
            scheme,
            outer_iters: sol.max_outer_iters(),
            converged: sol.converged(),
            trace: sol.trace().cloned().collect(),
            alloc,
            power: sol.power,
            breakdown: sol.breakdown,
            qos: sol.qos,
        }
    }
}

/// Heuristic subcarrier allocation followed by the dual power solver.
pub fn proposed(ch: &ChannelSet, cfg: &NetworkConfig, params: &SolverParams) -> Result<BaselineResult> {
    let alloc = allocate_heuristic(ch, cfg);
    let sol = solve_network(ch, &alloc, cfg, params)?;
    Ok(BaselineResult::solved(Scheme::Proposed, alloc, sol))
}

/// Exhaustive subcarrier search, each candidate scored by the power solver's
/// clipped secrecy sum.
pub fn upper_bound(ch: &ChannelSet, cfg: &NetworkConfig, params: &SolverParams) -> Result<BaselineResult> {
    let quiet = SolverParams {
        trace: false,
        ..params.clone()
    };
    let score = |sp: &_| outer_solve(sp, &quiet).map(|s| s.secrecy.iter().map(|c| c.max(0.0)).sum());
    let ex = allocate_exhaustive(ch, cfg, &score)?;
    let sol = solve_network(ch, &ex.alloc, cfg, params)?;
    Ok(BaselineResult::solved(Scheme::UpperBound, ex.alloc, sol))
}

/// Interference `tx` would cause at full power to the other receivers scheduled on `n`.
pub fn inflicted_interference(ch: &ChannelSet, cfg: &NetworkConfig, alloc: &Allocation, tx: Tx, n: usize) -> f64 {
    let own = crate::linkmetrics::slot_of(&alloc.dims(), tx);
    let leak: f64 = alloc
        .scheduled(n)
        .into_iter()
        .filter(|&(s, _)| s != own)
        .map(|(_, v)| ch.gain(tx, v.serving_rx(), n))
        .sum();
    cfg.p_max(tx.class()) * leak
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Moves users whose inflicted interference exceeds `ia_threshold_factor`
/// times their cell-and-class median to the subcarrier where they would
/// interfere least, swapping with its holder. Slots and subcarriers are visited
/// in ascending order, `ia_passes` times. Returns the new allocation and the
/// number of moves.
pub fn avoid_interference(ch: &ChannelSet, cfg: &NetworkConfig, start: &Allocation) -> (Allocation, usize) {
    let d = start.dims();
    let mut alloc = start.clone();
    let mut moves = 0;
    for _ in 0..cfg.ia_passes {
        for s in 0..slot_count(&d) {
            let inflicted: Vec<f64> = (0..d.n)
                .filter_map(|n| alloc.get(n, s).map(|u| inflicted_interference(ch, cfg, &alloc, u, n)))
                .collect();
            if inflicted.len() < 2 {
                continue;
            }
            let threshold = cfg.ia_threshold_factor * median(inflicted);
            for n in 0..d.n {
                let Some(u) = alloc.get(n, s) else { continue };
                let here = inflicted_interference(ch, cfg, &alloc, u, n);
                if here <= threshold {
                    continue;
                }
                let best = (0..d.n)
                    .filter(|&m| m != n && alloc.get(m, s) != Some(u))
                    .map(|m| (m, inflicted_interference(ch, cfg, &alloc, u, m)))
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((m, there)) = best {
                    if there < here {
                        let other = alloc.get(m, s);
                        alloc.assign(m, u);
                        match other {
                            Some(o) => alloc.assign(n, o),
                            None => alloc.set_slot(n, s, None),
                        }
                        moves += 1;
                    }
                }
            }
        }
    }
    (alloc, moves)
}

pub fn interference_avoidance(ch: &ChannelSet, cfg: &NetworkConfig) -> BaselineResult {
    let (alloc, _) = avoid_interference(ch, cfg, &allocate_heuristic(ch, cfg));
    let power = PowerProfile::fixed(&alloc, cfg, 1.0);
    BaselineResult::evaluated(Scheme::InterferenceAvoidance, ch, cfg, alloc, power)
}

/// Subcarriers per class (HUE, LUE, DUE). With `N >= 3` every class gets
/// one and the rest is split in proportion to the class populations
/// `(H, LM, LK)` by largest remainder; with `N = 2` the whole split is by
/// largest remainder. Remainder ties go to the larger class, then to the
/// earlier one.
pub fn orthogonal_partition(d: &Dims) -> Result<[usize; 3]> {
    if d.n < 2 {
        return Err(Error::Refused(format!("orthogonal allocation needs at least 2 subcarriers, got {}", d.n)));
    }
    let w = [d.h, d.l * d.m, d.l * d.k];
    let total: usize = w.iter().sum();
    let mut parts = if d.n >= 3 { [1, 1, 1] } else { [0, 0, 0] };
    let rest = d.n - parts.iter().sum::<usize>();
    let mut frac = [(0.0, 0usize, 0usize); 3];
    for c in 0..3 {
        let q = rest as f64 * w[c] as f64 / total as f64;
        parts[c] += q.floor() as usize;
        frac[c] = (q - q.floor(), w[c], c);
    }
    frac.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let left = d.n - parts.iter().sum::<usize>();
    for &(_, _, c) in frac.iter().take(left) {
        parts[c] += 1;
    }
    Ok(parts)
}

/// Disjoint subcarrier blocks per class, round-robin inside each block.
pub fn orthogonal_alloc(d: &Dims) -> Result<Allocation> {
    let [nh, nl, _] = orthogonal_partition(d)?;
    let mut a = Allocation::empty(*d);
    for n in 0..d.n {
        if n < nh {
            a.assign(n, Tx::Hue(n % d.h));
        } else if n < nh + nl {
            let i = n - nh;
            (0..d.l).for_each(|l| a.assign(n, Tx::Lue(l, i % d.m)));
        } else {
            let i = n - nh - nl;
            (0..d.l).for_each(|l| a.assign(n, Tx::Due(l, i % d.k)));
        }
    }
    Ok(a)
}

pub fn orthogonal_allocation(ch: &ChannelSet, cfg: &NetworkConfig) -> Result<BaselineResult> {
    let alloc = orthogonal_alloc(&ch.dims())?;
    let power = PowerProfile::fixed(&alloc, cfg, 1.0);
    Ok(BaselineResult::evaluated(Scheme::Orthogonal, ch, cfg, alloc, power))
}

/// Heuristic allocation, every user at `fixed_power_fraction * p_max`.
pub fn fixed_power(ch: &ChannelSet, cfg: &NetworkConfig) -> BaselineResult {
    let alloc = allocate_heuristic(ch, cfg);
    let power = PowerProfile::fixed(&alloc, cfg, cfg.fixed_power_fraction);
    BaselineResult::evaluated(Scheme::FixedPower, ch, cfg, alloc, power)
}

pub fn run_scheme(scheme: Scheme, ch: &ChannelSet, cfg: &NetworkConfig, params: &SolverParams) -> Result<BaselineResult> {
    match scheme {
        Scheme::UpperBound => upper_bound(ch, cfg, params),
        Scheme::Proposed => proposed(ch, cfg, params),
        Scheme::InterferenceAvoidance => Ok(interference_avoidance(ch, cfg)),
        Scheme::Orthogonal => orthogonal_allocation(ch, cfg),
        Scheme::FixedPower => Ok(fixed_power(ch, cfg)),
    }
}

/// Classes that own at least one subcarrier under orthogonal allocation.
pub fn orthogonal_classes(d: &Dims) -> Result<Vec<UserClass>> {
    let parts = orthogonal_partition(d)?;
    Ok(UserClass::ALL.into_iter().zip(parts).filter(|(_, p)| *p > 0).map(|(c, _)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{snapshot, Rx};

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("nope".parse::<Scheme>().is_err());
    }

    #[test]
    fn partition_rules() {
        let d = |h, l, m, k, n| Dims { h, l, m, k, n };
        assert_eq!(orthogonal_partition(&d(2, 3, 5, 5, 8)).unwrap(), [1, 4, 3]);
        assert_eq!(orthogonal_partition(&d(2, 2, 2, 1, 2)).unwrap(), [1, 1, 0]);
        assert_eq!(orthogonal_partition(&d(2, 2, 2, 2, 4)).unwrap(), [1, 2, 1]);
        assert!(matches!(orthogonal_partition(&d(1, 1, 1, 1, 1)), Err(Error::Refused(_))));
        for n in 2..20 {
            assert_eq!(orthogonal_partition(&d(2, 3, 5, 5, n)).unwrap().iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn orthogonal_has_no_cross_class_interference() {
        let cfg = NetworkConfig::desk();
        let (_, ch) = snapshot(&cfg, 2).unwrap();
        let r = orthogonal_allocation(&ch, &cfg).unwrap();
        for n in 0..cfg.subcarriers {
            let classes: Vec<UserClass> = r.alloc.scheduled(n).iter().map(|(_, u)| u.class()).collect();
            assert!(classes.windows(2).all(|w| w[0] == w[1]));
        }
        // LUEs of both LPNs share their block
        let n = (0..cfg.subcarriers).find(|&n| r.alloc.lue(n, 0).is_some()).unwrap();
        assert!(r.alloc.lue(n, 1).is_some());
    }

    #[test]
    fn zero_fixed_power_gives_zero_secrecy() {
        let mut cfg = NetworkConfig::desk();
        cfg.fixed_power_fraction = 0.0;
        let (_, ch) = snapshot(&cfg, 5).unwrap();
        assert_eq!(fixed_power(&ch, &cfg).total_bps(), 0.0);
    }

    #[test]
    fn no_mover_when_threshold_is_huge() {
        let mut cfg = NetworkConfig::desk();
        cfg.ia_threshold_factor = 1e30;
        let (_, ch) = snapshot(&cfg, 5).unwrap();
        let base = allocate_heuristic(&ch, &cfg);
        let (a, moves) = avoid_interference(&ch, &cfg, &base);
        assert_eq!(moves, 0);
        assert_eq!(a, base);
    }

    #[test]
    fn dominant_interferer_is_relocated() {
        let cfg = NetworkConfig::paper().resized(1, 2, 1, 1, 3);
        let d = Dims::of(&cfg);
        // flat channels except LUE (0,0), which floods LPN 1 on subcarrier 0
        let ch = ChannelSet::from_fn(d, |t, r, n| {
            if r == Rx::Eve {
                1e-16
            } else if r == t.serving_rx() {
                1e-9
            } else if t == Tx::Lue(0, 0) && r == Rx::Lpn(1) && n == 0 {
                1e-8
            } else if t == Tx::Lue(0, 0) && r == Rx::Lpn(1) {
                1e-15
            } else {
                1e-14
            }
        });
        let mut base = Allocation::empty(d);
        for n in 0..3 {
            base.assign(n, Tx::Hue(0));
            for l in 0..2 {
                base.assign(n, Tx::Lue(l, 0));
                base.assign(n, Tx::Due(l, 0));
            }
        }
        let (moved, moves) = avoid_interference(&ch, &cfg, &base);
        // with a single LUE per cell there is nobody to swap with
        assert_eq!(moves, 0);
        assert_eq!(moved, base);

        let cfg = NetworkConfig::paper().resized(1, 2, 2, 1, 3);
        let d = Dims::of(&cfg);
        let ch = ChannelSet::from_fn(d, |t, r, n| {
            if r == Rx::Eve {
                1e-16
            } else if r == t.serving_rx() {
                1e-9
            } else if t == Tx::Lue(0, 0) && r == Rx::Lpn(1) && n == 0 {
                1e-8
            } else {
                1e-14
            }
        });
        let mut base = Allocation::empty(d);
        for n in 0..3 {
            base.assign(n, Tx::Hue(0));
            base.assign(n, Tx::Lue(0, if n == 0 { 0 } else { 1 }));
            base.assign(n, Tx::Lue(1, 0));
            base.assign(n, Tx::Due(0, 0));
            base.assign(n, Tx::Due(1, 0));
        }
        let (moved, moves) = avoid_interference(&ch, &cfg, &base);
        assert!(moves >= 1);
        assert_ne!(moved.lue(0, 0), Some(0));
        let eval = |a: &Allocation| network_secrecy(&ch, a, &PowerProfile::fixed(a, &cfg, 1.0), &cfg).total_clipped();
        assert!(eval(&moved) >= eval(&base));
    }

    #[test]
    fn single_allocation_upper_bound_equals_proposed() {
        let cfg = NetworkConfig::paper().resized(1, 1, 1, 1, 2);
        let (_, ch) = snapshot(&cfg, 3).unwrap();
        let p = SolverParams::default();
        let ub = upper_bound(&ch, &cfg, &p).unwrap();
        let pr = proposed(&ch, &cfg, &p).unwrap();
        assert_eq!(ub.alloc, pr.alloc);
        assert_eq!(ub.total_bps(), pr.total_bps());
    }
}
