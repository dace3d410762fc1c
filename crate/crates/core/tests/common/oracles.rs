//! Single randomized oracle cases. Each returns the measured discrepancy (or
//! an agreement flag) so callers can choose counts and thresholds.

use d2d_secrecy::config::NetworkConfig;
use d2d_secrecy::netmodel::{snapshot, Tx};
use d2d_secrecy::solver::{grad_f, lagrangian, outer_solve, DualState, RateState, SolverParams, QOS_SLACK};
use d2d_secrecy::spectral::{constraint_matrices_lenient, normalize, recover_power, spectral_radius, SubcarrierProblem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{dense_spectral_radius, random_nonnegative, random_problem};

/// `|rho_pf - rho_dense|` on a random matrix up to 6x6; every other case is sparse.
pub fn pf_vs_dense(rng: &mut impl Rng, k: usize) -> f64 {
    let n = rng.random_range(1..=6);
    let a = random_nonnegative(rng, n, if k % 2 == 0 { 0.0 } else { 0.4 });
    (spectral_radius(&a).unwrap() - dense_spectral_radius(&a)).abs()
}

/// Relative error of the analytic gradient of the spectral terms against
/// central differences, at random rates with positive cap multipliers.
pub fn grad_vs_fd(rng: &mut impl Rng) -> f64 {
    let j = rng.random_range(1..=4);
    let sp = random_problem(rng, j);
    let ns = normalize(&sp).unwrap();
    let cm = constraint_matrices_lenient(&ns, &sp.p_max).unwrap();
    let rs = RateState {
        c: DVector::from_fn(j, |_, _| rng.random_range(0.05..3.0)),
        c_e: DVector::from_fn(j, |_, _| rng.random_range(0.05..3.0)),
    };
    let ds = DualState {
        lambda: DVector::zeros(j),
        beta: DVector::from_fn(j, |_, _| rng.random_range(0.1..2.0)),
        mu: DVector::from_fn(j, |_, _| rng.random_range(0.1..2.0)),
        iter: 0,
    };
    let zero = DVector::zeros(j);
    // The spectral part alone: the Lagrangian minus its linear secrecy term.
    let spectral = |rs: &RateState| lagrangian(rs, &ds, &cm, &zero).unwrap() - (&rs.c - &rs.c_e).sum();
    let (dc, dce) = grad_f(&rs, &ds, &cm).unwrap();
    let h = 1e-5;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for side in 0..2 {
        for i in 0..j {
            let bump = |s: f64| {
                let mut r = rs.clone();
                if side == 0 {
                    r.c[i] += s;
                } else {
                    r.c_e[i] += s;
                }
                r
            };
            let fd = (spectral(&bump(h)) - spectral(&bump(-h))) / (2.0 * h);
            let an = if side == 0 { dc[i] } else { dce[i] };
            num = num.max((an - fd).abs());
            den = den.max(fd.abs());
        }
    }
    num / den.max(1e-8)
}

/// Relative error of rates -> powers -> rates.
pub fn power_roundtrip(rng: &mut impl Rng) -> f64 {
    let j = rng.random_range(1..=5);
    let sp = random_problem(rng, j);
    let ns = normalize(&sp).unwrap();
    let p = DVector::from_fn(j, |i, _| sp.p_max[i] * rng.random_range(0.01..1.0));
    let back = recover_power(&ns.rates(&p), &ns).unwrap();
    (&back - &p).amax() / p.amax()
}

/// Whether `B_j diag(e^C) q <= (I + B_j) q` agrees with `p_j <= p_max_j` for
/// every user of a random instance with `J <= 3`. Users within `1e-6` of
/// their cap are not judged.
pub fn matrix_cap_agrees(rng: &mut impl Rng) -> (bool, [usize; 2]) {
    let j = rng.random_range(1..=3);
    let sp = random_problem(rng, j);
    let ns = normalize(&sp).unwrap();
    let cm = constraint_matrices_lenient(&ns, &sp.p_max).unwrap();
    let p = DVector::from_fn(j, |i, _| sp.p_max[i] * rng.random_range(0.0..1.6));
    let q = &ns.f * &p + &ns.v;
    let eq = ns.rates(&p).map(f64::exp).component_mul(&q);
    let mut ok = true;
    let mut seen = [0; 2];
    for jj in 0..j {
        let ratio = p[jj] / sp.p_max[jj];
        if (ratio - 1.0).abs() < 1e-6 {
            continue;
        }
        let lhs = &cm.legit.b[jj] * &eq;
        let rhs = &cm.legit.b[jj] * &q + &q;
        let holds = (0..j).all(|i| lhs[i] <= rhs[i] * (1.0 + 1e-12));
        ok &= holds == (ratio <= 1.0);
        seen[holds as usize] += 1;
    }
    (ok, seen)
}

/// Whether `max_j log rho_j(C) <= 0` agrees with the rates being reachable
/// within the caps. `None` when some `log rho` is within `1e-7` of zero.
pub fn spectral_cap_agrees(rng: &mut impl Rng) -> Option<(bool, bool)> {
    let j = rng.random_range(1..=3);
    let sp = random_problem(rng, j);
    let ns = normalize(&sp).unwrap();
    let cm = constraint_matrices_lenient(&ns, &sp.p_max).unwrap();
    let p = DVector::from_fn(j, |i, _| sp.p_max[i] * rng.random_range(0.0..1.4));
    let c = ns.rates(&p);
    let logs: Vec<f64> = (0..j).map(|jj| cm.legit.log_rho(jj, &c).unwrap()).collect();
    if logs.iter().any(|l| l.abs() < 1e-7) {
        return None;
    }
    let caps_hold = logs.iter().all(|&l| l <= 0.0);
    let within = recover_power(&c, &ns).is_ok_and(|q| (0..j).all(|i| q[i] >= 0.0 && q[i] <= sp.p_max[i]));
    Some((caps_hold == within, caps_hold))
}

/// `log rho(A diag(e^x))` at a convex combination minus the chord; should be <= 0.
pub fn log_convexity_gap(rng: &mut impl Rng) -> f64 {
    let n = rng.random_range(1..=4);
    let a = random_nonnegative(rng, n, 0.0);
    let x1 = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    let x2 = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
    let t: f64 = rng.random_range(0.01..0.99);
    let lr = |x: &DVector<f64>| {
        let e = x.map(f64::exp);
        spectral_radius(&DMatrix::from_fn(n, n, |r, c| a[(r, c)] * e[c])).unwrap().ln()
    };
    lr(&(&x1 * t + &x2 * (1.0 - t))) - (t * lr(&x1) + (1.0 - t) * lr(&x2))
}

/// Best total secrecy (nats/s/Hz) over a 200x200 grid per user: zero plus
/// 199 levels log-spaced over the top eight decades of `[0, p_max]`.
pub fn grid_search_j2(sp: &SubcarrierProblem) -> f64 {
    let level = |m: f64, k: usize| if k == 0 { 0.0 } else { m * 10f64.powf(-8.0 * (199 - k) as f64 / 198.0) };
    let mut best = f64::NEG_INFINITY;
    for a in 0..200 {
        for b in 0..200 {
            let p = DVector::from_vec(vec![level(sp.p_max[0], a), level(sp.p_max[1], b)]);
            let s = sp.legit_rates(&p) - sp.eve_rates(&p);
            if (0..2).all(|i| s[i] >= sp.c_min[i] - QOS_SLACK) && s.sum() > best {
                best = s.sum();
            }
        }
    }
    best
}

/// A two-user subcarrier problem built from two random transmitters of a
/// desk snapshot, and the solver's objective on it.
pub fn desk_pair(rng: &mut impl Rng, k: u64) -> (SubcarrierProblem, f64) {
    let cfg = NetworkConfig::desk();
    let (_, ch) = snapshot(&cfg, 1000 + k).unwrap();
    let all = Tx::all(&ch.dims());
    let a = rng.random_range(0..all.len());
    let mut b = rng.random_range(0..all.len() - 1);
    if b >= a {
        b += 1;
    }
    let n = rng.random_range(0..cfg.subcarriers);
    let sp = SubcarrierProblem::from_users(&ch, &cfg, n, vec![all[a], all[b]]);
    let obj = outer_solve(&sp, &SolverParams::default()).unwrap().secrecy.sum();
    (sp, obj)
}

/// `true` when the solver is within 1% (plus `1e-6` nats absolute) of the grid optimum, or above it.
pub fn solver_matches_grid(obj: f64, best: f64) -> bool {
    obj >= best - (0.01 * best.abs() + 1e-6)
}
