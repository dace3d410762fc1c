//! Per-subcarrier power allocation by dual decomposition.
//!
//! The outer loop runs projected sub-gradient steps on the multipliers
//! `lambda` (secrecy QoS), `beta` (legitimate power caps in spectral form)
//! and `mu` (wiretap power caps). For fixed multipliers the inner loop
//! maximises the Lagrangian
//!
//! ```text
//! L = sum (1 + lambda_i)(C_i - Ce_i) - sum lambda_i c_min_i
//!     - sum beta_j log rho_j(C) - sum mu_j log rho_j^E(Ce)
//! ```
//!
//! over the powers, with `C` and `Ce` the rates those powers actually
//! produce. It is a projected gradient ascent in `y = ln p` on the box
//! `[p_max * floor_ratio, p_max]` with Armijo backtracking and Barzilai-Borwein
//! trial steps. Because the box already enforces the caps, `beta` and `mu`
//! start at 0 and stay there unless a nonzero start is requested; a started
//! multiplier decays along its (non-positive) sub-gradient.
//!
//! Only positive QoS targets get a multiplier; a zero target is met by
//! switching the user off, which the repair below does. A user switched off
//! sits where the gradient in `y` vanishes, so while it is short of its target
//! each outer step also tries a start with it raised to the least power that
//! meets the target. The primal answer is the outer iterate with the least
//! total shortfall, then the highest objective, not the last one.
//!
//! The problem is not concave in the powers, and the dual loop can settle
//! where some user transmits at a secrecy loss just to jam the eavesdropper
//! of another. After the dual loop such users are pushed back by a growing
//! quadratic shortfall penalty and, failing that, switched off one at a time.
//! `converged` reports the dual stop rule only.
//!
//! The literal componentwise map [`prox_g`] is kept for reference; its fixed
//! point does not maximise anything useful, so the inner loop does not use it.
//!
//! Work is `O(S J^2)` per inner solve for `S` steps, so a network solve costs
//! `O(N J^2 (H + LM + LK))`-ish in the population sizes.

use nalgebra::{DMatrix, DVector};

use crate::config::NetworkConfig;
use crate::error::Result;
use crate::linkmetrics::{network_secrecy, qos_feasible, slot_of, Allocation, PowerProfile, SecrecyBreakdown};
use crate::netmodel::{ChannelSet, Tx};
use crate::spectral::{constraint_matrices_lenient, normalize, recover_power, ConstraintMatrices, SubcarrierProblem};

/// Per-user secrecy slack accepted when flagging QoS, nats/s/Hz.
pub const QOS_SLACK: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
/// Cap slack attributed to eigenvalue rounding, in `log rho`.
pub const CAP_TOL: f64 = 1e-6;
/// Depth, as a fraction of `p_max`, of the interior multistart points.
const INTERIOR_START: f64 = 1e-3;
/// Secrecy above target, nats, aimed for when restarting a short user.
const QOS_START_MARGIN: f64 = 1e-3;
/// Powers within this factor of the floor count as switched off.
const FLOOR_BAND: f64 = 1e3;
const REPAIR_ROUNDS: usize = 12;
const REPAIR_WEIGHT0: f64 = 1e2;
const REPAIR_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub max_outer: usize,
    /// Outer stop: `max_j (|d lambda_j| + |d beta_j| + |d mu_j|) <= delta`.
    pub delta: f64,
    pub max_inner: usize,
    /// Inner stop: `|dC|_1 + |dCe|_1 <= eta`.
    pub eta: f64,
    pub xi_lambda: f64,
    pub xi_beta: f64,
    pub xi_mu: f64,
    pub lambda_cap: f64,
    /// Initial QoS multipliers.
    pub lambda0: f64,
    /// Initial `beta` and `mu`.
    pub cap_multiplier0: f64,
    /// Lower edge of the power box as a fraction of `p_max`; powers there are reported as 0.
    pub floor_ratio: f64,
    /// Start the first inner solve from several corners and keep the best.
    pub multistart: bool,
    pub trace: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_outer: 200,
            delta: 1e-3,
            max_inner: 500,
            eta: 1e-6,
            xi_lambda: 0.5,
            xi_beta: 0.2,
            xi_mu: 0.2,
            lambda_cap: 1e3,
            lambda0: 0.0,
            cap_multiplier0: 0.0,
            floor_ratio: 1e-8,
            multistart: true,
            trace: false,
        }
    }
}

/// Legitimate and wiretap rates, nats/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateState {
    pub c: DVector<f64>,
    pub c_e: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: DVector<f64>,
    pub beta: DVector<f64>,
    pub mu: DVector<f64>,
    pub iter: usize,
}

impl DualState {
    pub fn zeros(j: usize) -> Self {
        Self {
            lambda: DVector::zeros(j),
            beta: DVector::zeros(j),
            mu: DVector::zeros(j),
            iter: 0,
        }
    }
}

/// One outer iteration, for the convergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub subcarrier: usize,
    /// Lagrangian at the inner solution (the dual function value).
    pub objective_nats: f64,
    pub lambda_norm: f64,
    pub beta_norm: f64,
    pub mu_norm: f64,
    pub max_log_rho: f64,
    pub movement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierSolution {
    pub n: usize,
    pub users: Vec<Tx>,
    pub rates: RateState,
    pub power: DVector<f64>,
    /// `C - Ce` per user, nats/s/Hz, unclipped.
    pub secrecy: DVector<f64>,
    pub qos_ok: Vec<bool>,
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub duals: DualState,
    pub trace: Vec<TraceRow>,
}

impl SubcarrierSolution {
    pub fn objective(&self) -> f64 {
        self.secrecy.sum()
    }

    pub fn feasible(&self) -> bool {
        self.qos_ok.iter().all(|&b| b)
    }
}

/// `sum (C - Ce) + sum lambda (C - Ce - c_min) - sum beta log rho_j(C) - sum mu log rho_j^E(Ce)`.
/// Spectral terms with a zero multiplier are skipped.
pub fn lagrangian(rs: &RateState, ds: &DualState, cm: &ConstraintMatrices, c_min: &DVector<f64>) -> Result<f64> {
    let gap = &rs.c - &rs.c_e;
    let mut l = gap.sum() + ds.lambda.dot(&(&gap - c_min));
    for j in 0..gap.len() {
        if ds.beta[j] > 0.0 {
            l -= ds.beta[j] * cm.legit.log_rho(j, &rs.c)?;
        }
        if ds.mu[j] > 0.0 {
            l -= ds.mu[j] * cm.eve.log_rho(j, &rs.c_e)?;
        }
    }
    Ok(l)
}

/// Gradient of the spectral part `-sum beta log rho_j(C) - sum mu log rho_j^E(Ce)`
/// with respect to `C` and `Ce`.
pub fn grad_f(rs: &RateState, ds: &DualState, cm: &ConstraintMatrices) -> Result<(DVector<f64>, DVector<f64>)> {
    let j = rs.c.len();
    let mut dc = DVector::zeros(j);
    let mut dce = DVector::zeros(j);
    for jj in 0..j {
        if ds.beta[jj] > 0.0 {
            dc -= cm.legit.eval(jj, &rs.c)?.grad * ds.beta[jj];
        }
        if ds.mu[jj] > 0.0 {
            dce -= cm.eve.eval(jj, &rs.c_e)?.grad * ds.mu[jj];
        }
    }
    Ok((dc, dce))
}

/// The componentwise map `(1 + lambda_j)(C_j - Ce_j - 1)`.
pub fn prox_g(rs: &RateState, lambda: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(rs.c.len(), |j, _| (1.0 + lambda[j]) * (rs.c[j] - rs.c_e[j] - 1.0))
}

/// Rates and their Jacobians with respect to the powers.
struct RateJac {
    rates: RateState,
    jc: DMatrix<f64>,
    jce: DMatrix<f64>,
}

fn rate_jacobians(sp: &SubcarrierProblem, p: &DVector<f64>) -> RateJac {
    let j = sp.dim();
    let nz = sp.noise;
    let t = &sp.g * p;
    let te = sp.g_e.dot(p);
    let mut jc = DMatrix::zeros(j, j);
    let mut jce = DMatrix::zeros(j, j);
    let mut c = DVector::zeros(j);
    let mut c_e = DVector::zeros(j);
    for i in 0..j {
        let tot = t[i] + nz;
        let intf = t[i] - sp.g[(i, i)] * p[i] + nz;
        c[i] = (sp.g[(i, i)] * p[i] / intf).ln_1p();
        let tot_e = te + nz;
        let intf_e = te - sp.g_e[i] * p[i] + nz;
        c_e[i] = (sp.g_e[i] * p[i] / intf_e).ln_1p();
        for k in 0..j {
            let cross = if k == i { 0.0 } else { 1.0 };
            jc[(i, k)] = sp.g[(i, k)] / tot - cross * sp.g[(i, k)] / intf;
            jce[(i, k)] = sp.g_e[k] / tot_e - cross * sp.g_e[k] / intf_e;
        }
    }
    RateJac {
        rates: RateState { c, c_e },
        jc,
        jce,
    }
}

/// Inner problem data shared across steps.
struct Inner<'a> {
    sp: &'a SubcarrierProblem,
    cm: Option<&'a ConstraintMatrices>,
    ds: &'a DualState,
    pen: &'a Penalty,
    lo: DVector<f64>,
    hi: DVector<f64>,
}

/// Quadratic penalty `-sum w_i / 2 * max(0, floor_i - (C_i - Ce_i))^2`.
/// It charges a shortfall without rewarding any excess.
struct Penalty {
    weight: DVector<f64>,
    floor: DVector<f64>,
}

impl Penalty {
    fn none(j: usize) -> Self {
        Self {
            weight: DVector::zeros(j),
            floor: DVector::zeros(j),
        }
    }

    /// Per-user shortfall times weight, the slope of the penalty in `C_i - Ce_i`.
    fn slope(&self, gap: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(gap.len(), |i, _| self.weight[i] * (self.floor[i] - gap[i]).max(0.0))
    }

    fn value(&self, gap: &DVector<f64>) -> f64 {
        (0..gap.len())
            .map(|i| 0.5 * self.weight[i] * (self.floor[i] - gap[i]).max(0.0).powi(2))
            .sum()
    }
}

struct Point {
    y: DVector<f64>,
    rates: RateState,
    l: f64,
    grad: DVector<f64>,
}

impl Inner<'_> {
    fn spectral_active(&self) -> bool {
        self.cm.is_some() && (self.ds.beta.iter().any(|&b| b > 0.0) || self.ds.mu.iter().any(|&m| m > 0.0))
    }

    fn value(&self, rs: &RateState) -> Result<f64> {
        let gap = &rs.c - &rs.c_e;
        let mut l = gap.sum() + self.ds.lambda.dot(&(&gap - &self.sp.c_min));
        if self.spectral_active() {
            l = lagrangian(rs, self.ds, self.cm.unwrap(), &self.sp.c_min)?;
        }
        Ok(l - self.pen.value(&gap))
    }

    fn point(&self, y: DVector<f64>) -> Result<Point> {
        let p = y.map(f64::exp);
        let rj = rate_jacobians(self.sp, &p);
        let l = self.value(&rj.rates)?;
        let one_l = self.ds.lambda.add_scalar(1.0) + self.pen.slope(&(&rj.rates.c - &rj.rates.c_e));
        let (mut wc, mut wce) = (one_l.clone(), -one_l);
        if self.spectral_active() {
            let (dc, dce) = grad_f(&rj.rates, self.ds, self.cm.unwrap())?;
            wc += dc;
            wce += dce;
        }
        let dp = rj.jc.tr_mul(&wc) + rj.jce.tr_mul(&wce);
        let grad = dp.component_mul(&p);
        Ok(Point {
            y,
            rates: rj.rates,
            l,
            grad,
        })
    }

    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(y.len(), |i, _| y[i].clamp(self.lo[i], self.hi[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// Log-powers.
    pub y: DVector<f64>,
    pub rates: RateState,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Maximises the Lagrangian over log-powers `y` for fixed multipliers, from `y0`.
pub fn inner_solve(
    sp: &SubcarrierProblem,
    cm: Option<&ConstraintMatrices>,
    ds: &DualState,
    y0: &DVector<f64>,
    params: &SolverParams,
) -> Result<InnerOutcome> {
    inner_solve_with(sp, cm, ds, y0, params, &vec![false; sp.dim()], &Penalty::none(sp.dim()))
}

/// [`inner_solve`] with the users flagged in `off` pinned to the box floor and
/// a shortfall penalty added to the Lagrangian.
fn inner_solve_with(
    sp: &SubcarrierProblem,
    cm: Option<&ConstraintMatrices>,
    ds: &DualState,
    y0: &DVector<f64>,
    params: &SolverParams,
    off: &[bool],
    pen: &Penalty,
) -> Result<InnerOutcome> {
    let lo = sp.p_max.map(|p| p.ln() + params.floor_ratio.ln());
    let hi = DVector::from_fn(sp.dim(), |i, _| if off[i] { lo[i] } else { sp.p_max[i].ln() });
    let inner = Inner { sp, cm, ds, pen, lo, hi };
    let mut cur = inner.point(inner.project(y0))?;
    let mut tau = 1.0;
    let mut converged = false;
    let mut iters = 0;
    while iters < params.max_inner {
        iters += 1;
        let mut accepted = None;
        while tau > 1e-12 {
            let y_new = inner.project(&(&cur.y + &cur.grad * tau));
            let step = &y_new - &cur.y;
            let pred = cur.grad.dot(&step);
            if pred <= 0.0 {
                break;
            }
            let cand = inner.point(y_new)?;
            if cand.l >= cur.l + ARMIJO * pred {
                accepted = Some(cand);
                break;
            }
            tau *= 0.5;
        }
        let Some(next) = accepted else {
            converged = true;
            break;
        };
        let moved = (&next.rates.c - &cur.rates.c).lp_norm(1) + (&next.rates.c_e - &cur.rates.c_e).lp_norm(1);
        // Barzilai-Borwein step for the next trial; curvature of an ascent problem is negative.
        let s = &next.y - &cur.y;
        let sy = s.dot(&(&next.grad - &cur.grad));
        tau = if sy < 0.0 { (s.norm_squared() / -sy).clamp(1e-10, 1e6) } else { (tau * 2.0).min(1e6) };
        cur = next;
        if moved <= params.eta {
            converged = true;
            break;
        }
    }
    Ok(InnerOutcome {
        y: cur.y,
        rates: cur.rates,
        value: cur.l,
        iters,
        converged,
    })
}

fn starts(sp: &SubcarrierProblem, params: &SolverParams) -> Vec<DVector<f64>> {
    let hi = sp.p_max.map(f64::ln);
    let mut v = vec![hi.clone()];
    if params.multistart {
        v.push(hi.add_scalar(-std::f64::consts::LN_2));
        let lo = hi.add_scalar(params.floor_ratio.ln());
        for j in 0..sp.dim() {
            for depth in [params.floor_ratio.ln(), INTERIOR_START.ln()] {
                let mut y = hi.clone();
                y[j] += depth;
                v.push(y);
            }
            if sp.dim() > 2 {
                let mut y = lo.clone();
                y[j] = hi[j];
                v.push(y);
            }
        }
    }
    v
}

/// `y` with every short priced user raised to the least power that meets its
/// target given the others, `None` if nobody is short. A user that was
/// switched off sits where the gradient in `ln p` vanishes, so no multiplier
/// brings it back from there. A few sweeps, since raising one user costs the
/// others.
fn qos_start(sp: &SubcarrierProblem, y: &DVector<f64>, priced: &[bool], params: &SolverParams) -> Option<DVector<f64>> {
    let j = sp.dim();
    let short = |p: &DVector<f64>| -> Vec<usize> {
        let s = sp.legit_rates(p) - sp.eve_rates(p);
        (0..j)
            .filter(|&i| priced[i] && s[i] < sp.c_min[i] - QOS_SLACK && p[i] <= FLOOR_BAND * params.floor_ratio * sp.p_max[i])
            .collect()
    };
    let mut p = y.map(f64::exp);
    if short(&p).is_empty() {
        return None;
    }
    for _ in 0..3 {
        for i in short(&p) {
            let others = |g: &dyn Fn(usize) -> f64| sp.noise + (0..j).filter(|&k| k != i).map(|k| g(k) * p[k]).sum::<f64>();
            // Own secrecy is ln((1 + a p) / (1 + b p)), increasing in p when a > b.
            let a = sp.g[(i, i)] / others(&|k| sp.g[(i, k)]);
            let b = sp.g_e[i] / others(&|k| sp.g_e[k]);
            let e = (sp.c_min[i] + QOS_START_MARGIN).exp();
            p[i] = if a > b * e { ((e - 1.0) / (a - b * e)).min(sp.p_max[i]) } else { sp.p_max[i] };
        }
    }
    Some(p.zip_map(&sp.p_max, |x, m| x.clamp(m * params.floor_ratio, m).ln()))
}

/// `log rho` of a cap constraint with rounding at the cap treated as equality:
/// positive values up to [`CAP_TOL`] come from the eigen-solve, not from a violation.
fn cap_violation(log_rho: f64) -> f64 {
    if log_rho > CAP_TOL {
        log_rho
    } else {
        log_rho.min(0.0)
    }
}

fn max_log_rho(cm: Option<&ConstraintMatrices>, rs: &RateState) -> Result<f64> {
    let Some(cm) = cm else { return Ok(f64::NAN) };
    let mut m = f64::NEG_INFINITY;
    for j in 0..rs.c.len() {
        m = m.max(cm.legit.log_rho(j, &rs.c)?);
        m = m.max(cm.eve.log_rho(j, &rs.c_e)?);
    }
    Ok(m)
}

/// Upper bound on the secrecy rate (nats/s/Hz) user `i` can reach on this
/// subcarrier: its legitimate link free of interference, every other user
/// jamming the eavesdropper at full power.
pub fn secrecy_upper_bound(sp: &SubcarrierProblem, i: usize) -> f64 {
    let jam: f64 = (0..sp.dim()).filter(|&k| k != i).map(|k| sp.g_e[k] * sp.p_max[k]).sum();
    let a = sp.g[(i, i)] / sp.noise;
    let c = sp.g_e[i] / (sp.noise + jam);
    let p = sp.p_max[i];
    ((a * p).ln_1p() - (c * p).ln_1p()).max(0.0)
}

/// Runs the dual outer loop on one subcarrier and returns physically consistent
/// powers, rates and secrecy.
pub fn outer_solve(sp: &SubcarrierProblem, params: &SolverParams) -> Result<SubcarrierSolution> {
    let j = sp.dim();
    let ns = normalize(sp).ok();
    let cm = match &ns {
        Some(ns) => Some(constraint_matrices_lenient(ns, &sp.p_max)?),
        None => None,
    };
    let cm = cm.as_ref();

    // A QoS multiplier is live only for a positive target the user could
    // reach at all. Targets above the secrecy bound can never be met, and a
    // target of zero or below is met by switching the user off, which the
    // repair below does; pricing it only makes lambda chatter between the
    // user jamming and the user staying silent.
    let priced: Vec<bool> = (0..j)
        .map(|i| sp.c_min[i] > 0.0 && secrecy_upper_bound(sp, i) >= sp.c_min[i] - QOS_SLACK)
        .collect();
    let mut ds = DualState::zeros(j);
    for i in (0..j).filter(|&i| priced[i]) {
        ds.lambda[i] = params.lambda0;
    }
    ds.beta.fill(params.cap_multiplier0);
    ds.mu.fill(params.cap_multiplier0);
    let mut trace = Vec::new();
    let mut y = DVector::zeros(j);
    let mut last = RateState {
        c: DVector::zeros(j),
        c_e: DVector::zeros(j),
    };
    // Outer iterate with the least total shortfall on priced targets, then
    // the highest objective: (shortfall, objective, y, rates).
    let mut best_iterate: Option<(f64, f64, DVector<f64>, RateState)> = None;
    let mut inner_iters = 0;
    let mut converged = false;
    let mut outer = 0;

    while outer < params.max_outer {
        outer += 1;
        ds.iter = outer;
        let mut candidates = if outer == 1 { starts(sp, params) } else { vec![y.clone()] };
        if outer > 1 {
            candidates.extend(qos_start(sp, &y, &priced, params));
        }
        let mut best: Option<InnerOutcome> = None;
        for y0 in candidates {
            let r = inner_solve(sp, cm, &ds, &y0, params)?;
            inner_iters += r.iters;
            if best.as_ref().is_none_or(|b| r.value > b.value) {
                best = Some(r);
            }
        }
        let inner = best.expect("at least one start");
        y = inner.y.clone();
        last = inner.rates.clone();
        let rs = &inner.rates;
        let sec = &rs.c - &rs.c_e;
        let short: f64 = (0..j)
            .filter(|&i| priced[i])
            .map(|i| (sp.c_min[i] - QOS_SLACK - sec[i]).max(0.0))
            .sum();
        if best_iterate.as_ref().is_none_or(|b| short < b.0 || (short == b.0 && sec.sum() > b.1)) {
            best_iterate = Some((short, sec.sum(), y.clone(), last.clone()));
        }

        let step = (outer as f64).sqrt().recip();
        let gap = &rs.c - &rs.c_e - &sp.c_min;
        let mut movement: f64 = 0.0;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..j {
            let lam = if priced[i] {
                (ds.lambda[i] - params.xi_lambda * step * gap[i]).clamp(0.0, params.lambda_cap)
            } else {
                0.0
            };
            let (mut bet, mut mu) = (0.0, 0.0);
            // Powers never leave the box, so both constraints hold up to
            // rounding and a zero multiplier stays zero. The eigen-solves are
            // only needed for a live multiplier or for the trace.
            if let Some(cm) = cm {
                if ds.beta[i] > 0.0 || params.trace {
                    let h = cm.legit.log_rho(i, &rs.c)?;
                    worst = worst.max(h);
                    if ds.beta[i] > 0.0 {
                        bet = (ds.beta[i] + params.xi_beta * step * cap_violation(h)).max(0.0);
                    }
                }
                if ds.mu[i] > 0.0 || params.trace {
                    let he = cm.eve.log_rho(i, &rs.c_e)?;
                    worst = worst.max(he);
                    if ds.mu[i] > 0.0 {
                        mu = (ds.mu[i] + params.xi_mu * step * cap_violation(he)).max(0.0);
                    }
                }
            }
            movement = movement.max((lam - ds.lambda[i]).abs() + (bet - ds.beta[i]).abs() + (mu - ds.mu[i]).abs());
            ds.lambda[i] = lam;
            ds.beta[i] = bet;
            ds.mu[i] = mu;
        }
        if params.trace {
            trace.push(TraceRow {
                iter: outer,
                subcarrier: sp.n,
                objective_nats: inner.value,
                lambda_norm: ds.lambda.norm(),
                beta_norm: ds.beta.norm(),
                mu_norm: ds.mu.norm(),
                max_log_rho: if cm.is_some() { worst } else { f64::NAN },
                movement,
            });
        }
        if movement <= params.delta {
            converged = true;
            break;
        }
    }

    // When the multipliers oscillate, or grow on targets nothing can meet,
    // the last iterate can miss targets that an earlier one met.
    if let Some((_, _, by, bl)) = best_iterate {
        y = by;
        last = bl;
    }

    // The dual iterates can settle on a point where a user runs at negative
    // secrecy because the others gain more than it loses (it jams their
    // eavesdropper). Such a user is pushed back to zero secrecy: first by a
    // growing shortfall penalty, then by switching it off and re-solving the
    // rest. Shortfalls above zero are left to the QoS flags.
    let mut off = vec![false; j];
    let mut pen = Penalty {
        weight: DVector::zeros(j),
        floor: sp.c_min.map(|c| c.min(0.0)),
    };
    // Users at the box floor are reported silent, so their sign does not matter.
    let at_floor = sp.p_max.map(|p| (p * params.floor_ratio).ln() + 1e-9);
    let negative = |rs: &RateState, y: &DVector<f64>, off: &[bool]| -> Vec<usize> {
        (0..j)
            .filter(|&i| !off[i] && y[i] > at_floor[i] && rs.c[i] - rs.c_e[i] < pen.floor[i] - QOS_SLACK)
            .collect()
    };
    for _ in 0..REPAIR_ROUNDS {
        let s = negative(&last, &y, &off);
        if s.is_empty() {
            break;
        }
        for i in s {
            pen.weight[i] = (pen.weight[i] * REPAIR_GROWTH).max(REPAIR_WEIGHT0);
        }
        let r = inner_solve_with(sp, cm, &ds, &y, params, &off, &pen)?;
        inner_iters += r.iters;
        y = r.y;
        last = r.rates;
    }
    for _ in 0..j {
        let s = negative(&last, &y, &off);
        if s.is_empty() {
            break;
        }
        for i in s {
            off[i] = true;
        }
        let r = inner_solve_with(sp, cm, &ds, &y, params, &off, &pen)?;
        inner_iters += r.iters;
        y = r.y;
        last = r.rates;
    }

    let floor = sp.p_max.map(|p| p * params.floor_ratio * (1.0 + 1e-9));
    let mut p = y.map(f64::exp);
    for i in 0..j {
        if p[i] <= floor[i] {
            p[i] = 0.0;
        }
        p[i] = p[i].min(sp.p_max[i]);
    }
    if let Some(ns) = &ns {
        if let Ok(q) = recover_power(&sp.legit_rates(&p), ns) {
            if q.iter().zip(sp.p_max.iter()).all(|(a, b)| *a <= b * (1.0 + 1e-9)) {
                p = q.zip_map(&sp.p_max, f64::min);
            }
        }
    }
    let rates = RateState {
        c: sp.legit_rates(&p),
        c_e: sp.eve_rates(&p),
    };
    let secrecy = &rates.c - &rates.c_e;
    let qos_ok = (0..j).map(|i| secrecy[i] >= sp.c_min[i] - QOS_SLACK).collect();
    if params.trace {
        if let Some(last) = trace.last_mut() {
            last.max_log_rho = max_log_rho(cm, &rates).unwrap_or(last.max_log_rho);
        }
    }
    Ok(SubcarrierSolution {
        n: sp.n,
        users: sp.users.clone(),
        rates,
        power: p,
        secrecy,
        qos_ok,
        converged,
        outer_iters: outer,
        inner_iters,
        duals: ds,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    /// `None` for subcarriers with nobody scheduled.
    pub subcarriers: Vec<Option<SubcarrierSolution>>,
    pub power: PowerProfile,
    pub breakdown: SecrecyBreakdown,
    /// Per-user flags in `Tx::all` order.
    pub qos: Vec<bool>,
}

impl NetworkSolution {
    pub fn converged(&self) -> bool {
        self.subcarriers.iter().flatten().all(|s| s.converged)
    }

    pub fn max_outer_iters(&self) -> usize {
        self.subcarriers.iter().flatten().map(|s| s.outer_iters).max().unwrap_or(0)
    }

    pub fn trace(&self) -> impl Iterator<Item = &TraceRow> {
        self.subcarriers.iter().flatten().flat_map(|s| s.trace.iter())
    }
}

/// Solves every subcarrier independently and evaluates the network at the
/// resulting powers.
pub fn solve_network(ch: &ChannelSet, alloc: &Allocation, cfg: &NetworkConfig, params: &SolverParams) -> Result<NetworkSolution> {
    let d = alloc.dims();
    let mut power = PowerProfile::zeros(&d);
    let mut subcarriers = Vec::with_capacity(d.n);
    for n in 0..d.n {
        let users: Vec<Tx> = alloc.scheduled(n).into_iter().map(|(_, u)| u).collect();
        if users.is_empty() {
            subcarriers.push(None);
            continue;
        }
        let sp = SubcarrierProblem::from_users(ch, cfg, n, users);
        let sol = outer_solve(&sp, params)?;
        for (i, &u) in sol.users.iter().enumerate() {
            power.set(n, slot_of(&d, u), sol.power[i]);
        }
        subcarriers.push(Some(sol));
    }
    let breakdown = network_secrecy(ch, alloc, &power, cfg);
    let qos = qos_feasible(&breakdown, cfg);
    Ok(NetworkSolution {
        subcarriers,
        power,
        breakdown,
        qos,
    })
}
