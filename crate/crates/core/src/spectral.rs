//! Per-subcarrier matrix form of the power problem and Perron-Frobenius eigenpairs.
//!
//! With `q = F p + v` the SINR of user `i` is `p_i / q_i`, so a rate vector
//! `C` (nats) is reached by the powers solving `(I - D F) p = D v` with
//! `D = diag(e^C - 1)`. The power cap of user `j` becomes a spectral-radius
//! condition on `B_j = F + v e_j^T / p_max_j`:
//!
//! * `rho(diag(e^C - 1) B_j) <= 1` always characterises `p_j <= p_max_j`;
//! * `rho(B~_j diag(e^C)) <= 1`, with `B~_j = (I + B_j)^-1 B_j`, does so too
//!   and is log-convex in `C`, but only when `B~_j` is entrywise nonnegative.
//!
//! `B~_j` does not depend on `C`, so each constraint picks its form once
//! ([`ConstraintForm`]). With cyclic interference `B~_j` usually has negative
//! entries and the exact form is used.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linkmetrics::Allocation;
use crate::netmodel::{ChannelSet, Rx, Tx};

pub const PF_TOL: f64 = 1e-12;
pub const PF_MAX_ITER: usize = 100_000;
/// Spectral radii below this are treated as this value when taking logs.
pub const RHO_FLOOR: f64 = 1e-30;
const INVERSE_RESIDUAL_TOL: f64 = 1e-10;

/// Gains among the users scheduled on one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierProblem {
    pub n: usize,
    /// Scheduled users: the HUE, then LUEs by LPN, then DUE pairs by LPN.
    pub users: Vec<Tx>,
    /// `g[(i, j)]`: gain from the transmitter of user `j` to the receiver of user `i`.
    pub g: DMatrix<f64>,
    /// Gain from each user's transmitter to the subcarrier's eavesdropper.
    pub g_e: DVector<f64>,
    pub p_max: DVector<f64>,
    /// Per-user secrecy threshold, nats/s/Hz.
    pub c_min: DVector<f64>,
    pub noise: f64,
}

impl SubcarrierProblem {
    /// Builds the problem for an explicit user list, in the given order.
    pub fn from_users(ch: &ChannelSet, cfg: &NetworkConfig, n: usize, users: Vec<Tx>) -> Self {
        let j = users.len();
        let g = DMatrix::from_fn(j, j, |r, c| ch.gain(users[c], users[r].serving_rx(), n));
        let g_e = DVector::from_iterator(j, users.iter().map(|&u| ch.gain(u, Rx::Eve, n)));
        let p_max = DVector::from_iterator(j, users.iter().map(|u| cfg.p_max(u.class())));
        let c_min = DVector::from_iterator(j, users.iter().map(|u| cfg.c_min_nats(u.class())));
        Self {
            n,
            users,
            g,
            g_e,
            p_max,
            c_min,
            noise: cfg.noise_w(),
        }
    }

    /// A problem not tied to any network; users are labelled `Hue(0..J)`.
    pub fn synthetic(g: DMatrix<f64>, g_e: DVector<f64>, p_max: DVector<f64>, c_min: DVector<f64>, noise: f64) -> Self {
        let j = g.nrows();
        assert!(g.is_square() && g_e.len() == j && p_max.len() == j && c_min.len() == j);
        Self {
            n: 0,
            users: (0..j).map(Tx::Hue).collect(),
            g,
            g_e,
            p_max,
            c_min,
            noise,
        }
    }

    pub fn dim(&self) -> usize {
        self.users.len()
    }

    /// Legitimate rates `ln(1 + SINR)` for powers `p`, from raw gains.
    pub fn legit_rates(&self, p: &DVector<f64>) -> DVector<f64> {
        let total = &self.g * p;
        DVector::from_fn(self.dim(), |i, _| {
            let s = self.g[(i, i)] * p[i];
            (s / (total[i] - s + self.noise)).ln_1p()
        })
    }

    /// Eavesdropper rates `ln(1 + SINR_e)` for powers `p`.
    pub fn eve_rates(&self, p: &DVector<f64>) -> DVector<f64> {
        let total = self.g_e.dot(p);
        DVector::from_fn(self.dim(), |i, _| {
            let s = self.g_e[i] * p[i];
            (s / (total - s + self.noise)).ln_1p()
        })
    }
}

/// Builds the subproblem of subcarrier `n`; every slot must be occupied.
pub fn build_subproblem(ch: &ChannelSet, alloc: &Allocation, cfg: &NetworkConfig, n: usize) -> Result<SubcarrierProblem> {
    let sched = alloc.scheduled(n);
    if sched.len() != crate::linkmetrics::slot_count(&alloc.dims()) {
        return Err(Error::Invariant(format!(
            "subcarrier {n} schedules {} users, expected one per class and cell",
            sched.len()
        )));
    }
    Ok(SubcarrierProblem::from_users(ch, cfg, n, sched.into_iter().map(|(_, u)| u).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSystem {
    /// `f[(i, j)] = g[(i, j)] / g[(i, i)]`, zero diagonal.
    pub f: DMatrix<f64>,
    pub v: DVector<f64>,
    /// `f_e[(i, j)] = g_e[j] / g_e[i]`, zero diagonal.
    pub f_e: DMatrix<f64>,
    pub v_e: DVector<f64>,
}

impl NormalizedSystem {
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `p / (F p + v)`.
    pub fn sinr(&self, p: &DVector<f64>) -> DVector<f64> {
        p.component_div(&(&self.f * p + &self.v))
    }

    pub fn eve_sinr(&self, p: &DVector<f64>) -> DVector<f64> {
        p.component_div(&(&self.f_e * p + &self.v_e))
    }

    pub fn rates(&self, p: &DVector<f64>) -> DVector<f64> {
        self.sinr(p).map(f64::ln_1p)
    }

    pub fn eve_rates(&self, p: &DVector<f64>) -> DVector<f64> {
        self.eve_sinr(p).map(f64::ln_1p)
    }
}

pub fn normalize(sp: &SubcarrierProblem) -> Result<NormalizedSystem> {
    let j = sp.dim();
    for i in 0..j {
        if !(sp.g[(i, i)] > 0.0) {
            return Err(Error::DegenerateChannel(format!("direct gain of user {i} is {}", sp.g[(i, i)])));
        }
        if !(sp.g_e[i] > 0.0) {
            return Err(Error::DegenerateChannel(format!("eavesdropper gain of user {i} is {}", sp.g_e[i])));
        }
    }
    let f = DMatrix::from_fn(j, j, |r, c| if r == c { 0.0 } else { sp.g[(r, c)] / sp.g[(r, r)] });
    let v = DVector::from_fn(j, |i, _| sp.noise / sp.g[(i, i)]);
    let f_e = DMatrix::from_fn(j, j, |r, c| if r == c { 0.0 } else { sp.g_e[c] / sp.g_e[r] });
    let v_e = DVector::from_fn(j, |i, _| sp.noise / sp.g_e[i]);
    Ok(NormalizedSystem { f, v, f_e, v_e })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintForm {
    /// `log rho(B~_j diag(e^C))`, used when `B~_j >= 0`.
    LogConvex,
    /// `log rho(diag(e^C - 1) B_j)`.
    Exact,
}

/// The `J` power-cap constraints of one channel (legitimate or wiretap).
#[derive(Debug, Clone, PartialEq)]
pub struct CapConstraints {
    pub b: Vec<DMatrix<f64>>,
    /// `None` when `I + B_j` is singular.
    pub b_tilde: Vec<Option<DMatrix<f64>>>,
    pub form: Vec<ConstraintForm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrices {
    pub legit: CapConstraints,
    pub eve: CapConstraints,
}

/// Value and gradient (w.r.t. the rate vector) of one constraint `log rho(.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintEval {
    pub log_rho: f64,
    pub grad: DVector<f64>,
}

impl CapConstraints {
    fn build(f: &DMatrix<f64>, v: &DVector<f64>, p_max: &DVector<f64>) -> Self {
        let j = v.len();
        let mut b = Vec::with_capacity(j);
        let mut b_tilde = Vec::with_capacity(j);
        let mut form = Vec::with_capacity(j);
        for jj in 0..j {
            let mut bj = f.clone();
            for i in 0..j {
                bj[(i, jj)] += v[i] / p_max[jj];
            }
            let bt = tilde(&bj);
            let nonneg = bt.as_ref().map(|m| {
                let scale = m.amax();
                m.iter().all(|&x| x >= -1e-12 * scale)
            });
            form.push(if nonneg == Some(true) { ConstraintForm::LogConvex } else { ConstraintForm::Exact });
            b_tilde.push(bt.map(|m| if nonneg == Some(true) { m.map(|x| x.max(0.0)) } else { m }));
            b.push(bj);
        }
        Self { b, b_tilde, form }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `log rho` of constraint `j` at rates `c`, in its chosen form, with gradient.
    pub fn eval(&self, j: usize, c: &DVector<f64>) -> Result<ConstraintEval> {
        self.eval_as(j, c, self.form[j])
    }

    /// The matrix whose spectral radius constraint `j` bounds, in `form`.
    fn matrix(&self, j: usize, c: &DVector<f64>, form: ConstraintForm) -> Result<DMatrix<f64>> {
        let dim = c.len();
        match form {
            ConstraintForm::LogConvex => {
                let bt = self.b_tilde[j]
                    .as_ref()
                    .ok_or_else(|| Error::Numerical(format!("I + B_{j} is singular")))?;
                let e = c.map(f64::exp);
                Ok(DMatrix::from_fn(dim, dim, |r, k| bt[(r, k)] * e[k]))
            }
            ConstraintForm::Exact => {
                let d = c.map(f64::exp_m1);
                if d.iter().any(|&x| x < 0.0) {
                    return Err(Error::Domain("rates must be non-negative".into()));
                }
                Ok(DMatrix::from_fn(dim, dim, |r, k| d[r] * self.b[j][(r, k)]))
            }
        }
    }

    /// `log rho` of constraint `j` without the gradient.
    pub fn log_rho(&self, j: usize, c: &DVector<f64>) -> Result<f64> {
        let rho = spectral_radius(&self.matrix(j, c, self.form[j])?)?;
        Ok(rho.max(RHO_FLOOR).ln())
    }

    pub fn eval_as(&self, j: usize, c: &DVector<f64>, form: ConstraintForm) -> Result<ConstraintEval> {
        let dim = c.len();
        let pf = pf_eigenpair(&self.matrix(j, c, form)?, PF_TOL, PF_MAX_ITER)?;
        if pf.rho < RHO_FLOOR {
            return Ok(ConstraintEval {
                log_rho: RHO_FLOOR.ln(),
                grad: DVector::zeros(dim),
            });
        }
        let grad = match form {
            ConstraintForm::LogConvex => pf.x.component_mul(&pf.y),
            ConstraintForm::Exact => {
                let bx = &self.b[j] * &pf.x;
                DVector::from_fn(dim, |k, _| pf.y[k] * c[k].exp() * bx[k] / pf.rho)
            }
        };
        Ok(ConstraintEval {
            log_rho: pf.rho.ln(),
            grad,
        })
    }
}

/// `(I + B)^-1 B` by dense LU, `None` if singular or inaccurate.
fn tilde(b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let j = b.nrows();
    let ipb = DMatrix::identity(j, j) + b;
    let bt = ipb.clone().lu().solve(b)?;
    let resid = (&ipb * &bt - b).amax();
    if bt.iter().all(|x| x.is_finite()) && resid <= INVERSE_RESIDUAL_TOL * b.amax().max(1.0) {
        Some(bt)
    } else {
        None
    }
}

/// Builds `B_j`, `B~_j` for both channels. Fails if some legitimate `I + B_j`
/// cannot be inverted.
///
/// On the wiretap side `I + F_e` has rank one (`(I + F_e)[(i, j)] = g_e[j] / g_e[i]`),
/// so `I + B_j^E` is singular as soon as `J >= 3`; those constraints get no
/// `B~` and use the exact form.
pub fn constraint_matrices(ns: &NormalizedSystem, p_max: &DVector<f64>) -> Result<ConstraintMatrices> {
    let cm = constraint_matrices_lenient(ns, p_max)?;
    if let Some(j) = cm.legit.b_tilde.iter().position(Option::is_none) {
        return Err(Error::Numerical(format!("I + B_{j} is singular")));
    }
    Ok(cm)
}

/// Like [`constraint_matrices`], but a singular `I + B_j` just forces the exact form.
pub fn constraint_matrices_lenient(ns: &NormalizedSystem, p_max: &DVector<f64>) -> Result<ConstraintMatrices> {
    if p_max.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Domain("p_max must be positive".into()));
    }
    Ok(ConstraintMatrices {
        legit: CapConstraints::build(&ns.f, &ns.v, p_max),
        eve: CapConstraints::build(&ns.f_e, &ns.v_e, p_max),
    })
}

/// Spectral radius with right (`x`) and left (`y`) Perron vectors,
/// `|x|_1 = 1`, `y^T x = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PfEigenpair {
    pub rho: f64,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub iterations: usize,
}

type Iterate = std::result::Result<(f64, DVector<f64>, usize), (f64, DVector<f64>, f64)>;

/// Power iterations before falling back to inverse iteration.
const POWER_PHASE: usize = 16;
/// Relative Collatz-Wielandt gap accepted once inverse iteration stops improving.
const STALL_TOL: f64 = 1e-9;
const STALL_STEPS: usize = 3;

fn power_iterate(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Iterate {
    let n = a.nrows();
    let rows: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let lo = rows.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().copied().fold(0.0, f64::max);
    // The shift separates rho from any other eigenvalue of modulus rho.
    let shift = 0.25 * (lo + hi);
    let floor = 100.0 * f64::EPSILON * hi;
    let x = DVector::from_element(n, 1.0 / n as f64);
    let x = match shifted_power(a, x, shift, tol, floor, max_iter.min(POWER_PHASE)) {
        Ok(done) => return Ok(done),
        Err((_, x, _)) if max_iter > POWER_PHASE => x,
        Err(e) => return Err(e),
    };
    let rest = max_iter - POWER_PHASE;
    match inverse_iterate(a, x.clone(), tol, floor, rest) {
        Ok((r, x, it)) => Ok((r, x, it + POWER_PHASE)),
        // Inverse iteration can lose the cone on nearly reducible input; the
        // power method is slow there but cannot fail.
        Err(_) => shifted_power(a, x, shift, tol, floor, rest).map(|(r, x, it)| (r, x, it + POWER_PHASE)),
    }
}

fn shifted_power(a: &DMatrix<f64>, mut x: DVector<f64>, shift: f64, tol: f64, floor: f64, steps: usize) -> Iterate {
    let mut rho = 0.0;
    let mut resid = f64::INFINITY;
    for it in 1..=steps {
        let ax = a * &x;
        rho = ax.sum();
        resid = (&ax - &x * rho).amax();
        if resid <= (tol * rho).max(floor) {
            return Ok((rho, x, it));
        }
        let next = ax + &x * shift;
        x = &next / next.sum();
    }
    Err((rho, x, resid))
}

/// Noda iteration: inverse iteration shifted by the upper Collatz-Wielandt
/// bound `max_i (Ax)_i / x_i >= rho`, for matrices whose spectral gap stalls
/// the power method. `(sI - A)^{-1}` is nonnegative for `s > rho`, so the
/// iterates stay in the positive cone. Stops once the Collatz-Wielandt bracket
/// or the residual meets the tolerance.
fn inverse_iterate(a: &DMatrix<f64>, mut x: DVector<f64>, tol: f64, floor: f64, max_iter: usize) -> Iterate {
    let n = a.nrows();
    let mut rho = 0.0;
    let mut resid = f64::INFINITY;
    let mut best_gap = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=max_iter {
        let ax = a * &x;
        rho = ax.sum();
        resid = (&ax - &x * rho).amax();
        let ratios = ax.component_div(&x);
        let hi = ratios.max();
        let gap = hi - ratios.min();
        if resid <= (tol * rho).max(floor) || gap <= tol * hi {
            return Ok((rho, x, it));
        }
        // In exact arithmetic the bracket shrinks every step; once it stops,
        // rounding dominates.
        if gap < best_gap {
            best_gap = gap;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_STEPS && gap <= STALL_TOL * hi {
                return Ok((rho, x, it));
            }
        }
        let z = (DMatrix::identity(n, n) * hi - a).lu().solve(&x);
        match z {
            Some(z) if z.iter().all(|&v| v > 0.0 && v.is_finite()) => x = &z / z.sum(),
            // A singular or sign-losing solve means the shift sits on rho to rounding.
            _ if gap <= STALL_TOL * hi => return Ok((rho, x, it)),
            _ => break,
        }
    }
    Err((rho, x, resid))
}

/// Relative positive perturbation that makes every input irreducible.
const PERTURB: f64 = 1e-12;
/// `max(A) / rho` above which the perturbation is applied to the balanced matrix.
const REBALANCE_RATIO: f64 = 10.0;

fn check_nonnegative(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Domain("matrix must be square and non-empty".into()));
    }
    if a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain("matrix must be finite and nonnegative".into()));
    }
    Ok(())
}

fn no_convergence(n: usize, iterations: usize, (rho, x, residual): (f64, DVector<f64>, f64)) -> Error {
    Error::NoConvergence {
        iterations,
        residual,
        last: Box::new(PfEigenpair {
            rho,
            x,
            y: DVector::from_element(n, 1.0),
            iterations,
        }),
    }
}

/// The matrix actually iterated and the diagonal similarity it carries.
struct Prepared {
    m: DMatrix<f64>,
    /// `m = S^-1 (A + E) S` with `S = diag(scale)`, or `m = A + eps 1 1^T` if `None`.
    scale: Option<DVector<f64>>,
    rho: f64,
    x: DVector<f64>,
    iterations: usize,
}

/// Right Perron pair of `A + eps 1 1^T`, `eps = 1e-12 max(A)`. When `max(A)`
/// dwarfs `rho` that perturbation would shift `rho` noticeably, so a second
/// pass perturbs the balanced matrix `S^-1 A S`, `S = diag(x)`, whose entries
/// are at most about `rho`.
fn prepare(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<Option<Prepared>> {
    check_nonnegative(a)?;
    let n = a.nrows();
    let amax = a.max();
    if amax == 0.0 {
        return Ok(None);
    }
    let m = a.add_scalar(PERTURB * amax);
    let (rho, x, it) = power_iterate(&m, tol, max_iter).map_err(|e| no_convergence(n, max_iter, e))?;
    if amax <= REBALANCE_RATIO * rho {
        return Ok(Some(Prepared {
            m,
            scale: None,
            rho,
            x,
            iterations: it,
        }));
    }
    let bal = DMatrix::from_fn(n, n, |r, k| a[(r, k)] * x[k] / x[r]);
    let m = bal.add_scalar(PERTURB * bal.max());
    let (rho, x2, it2) = power_iterate(&m, tol, max_iter).map_err(|e| no_convergence(n, max_iter, e))?;
    let xs = x2.component_mul(&x);
    Ok(Some(Prepared {
        m,
        rho,
        x: &xs / xs.sum(),
        scale: Some(x),
        iterations: it + it2,
    }))
}

/// Index sets of the irreducible diagonal blocks of `a`: the strongly
/// connected components of its nonzero pattern.
fn irreducible_blocks(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for r in 0..n {
        for k in 0..n {
            if a[(r, k)] > 0.0 {
                g.add_edge(nodes[r], nodes[k], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v.index()).collect())
        .collect()
}

/// `rho` as the largest radius over the irreducible blocks, each found on its
/// own. Perturbing a reducible matrix as a whole would move a zero radius by
/// up to `eps^(1/k)` for a nilpotent block of size `k`.
fn block_radius(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<f64> {
    let mut rho: f64 = 0.0;
    for b in irreducible_blocks(a) {
        let r = if b.len() == 1 {
            a[(b[0], b[0])]
        } else {
            let sub = a.select_rows(&b).select_columns(&b);
            prepare(&sub, tol, max_iter)?.map_or(0.0, |p| p.rho)
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

fn is_irreducible(a: &DMatrix<f64>) -> bool {
    a.nrows() == 1 || irreducible_blocks(a).len() == 1
}

/// Perron-Frobenius eigenpair of a nonnegative square matrix by shifted power
/// iteration (with an inverse-iteration fallback) on a slightly positive
/// perturbation of `A`. For irreducible `A` the reported `rho` is that of the
/// perturbed matrix, within about `1e-12 n rho` of the true one. For reducible
/// `A` it is the exact block maximum, and the vectors are the (positive) limits
/// taken from the perturbed matrix.
pub fn pf_eigenpair(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<PfEigenpair> {
    let n = a.nrows();
    let Some(pr) = prepare(a, tol, max_iter)? else {
        return Ok(PfEigenpair {
            rho: 0.0,
            x: DVector::from_element(n, 1.0 / n as f64),
            y: DVector::from_element(n, 1.0),
            iterations: 0,
        });
    };
    let (_, y, it_l) = power_iterate(&pr.m.transpose(), tol, max_iter).map_err(|e| no_convergence(n, max_iter, e))?;
    // Left vectors transform with S^-1.
    let y = match &pr.scale {
        Some(s) => y.component_div(s),
        None => y,
    };
    let y = &y / y.dot(&pr.x);
    let rho = if is_irreducible(a) { pr.rho } else { block_radius(a, tol, max_iter)? };
    Ok(PfEigenpair {
        rho,
        x: pr.x,
        y,
        iterations: pr.iterations.max(it_l),
    })
}

/// Spectral radius only; skips the left eigenvector.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    check_nonnegative(a)?;
    if is_irreducible(a) {
        Ok(prepare(a, PF_TOL, PF_MAX_ITER)?.map_or(0.0, |p| p.rho))
    } else {
        block_radius(a, PF_TOL, PF_MAX_ITER)
    }
}

/// Powers achieving rates `c` (nats): solves `(I - D F) p = D v`, `D = diag(e^C - 1)`.
pub fn recover_power(c: &DVector<f64>, ns: &NormalizedSystem) -> Result<DVector<f64>> {
    let j = ns.dim();
    if c.len() != j {
        return Err(Error::Domain("rate vector has the wrong length".into()));
    }
    if c.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain("rates must be finite and non-negative".into()));
    }
    let d = c.map(f64::exp_m1);
    let df = DMatrix::from_fn(j, j, |r, k| d[r] * ns.f[(r, k)]);
    let rho = spectral_radius(&df)?;
    if rho >= 1.0 {
        return Err(Error::InfeasibleRate(format!("spectral radius of D F is {rho}")));
    }
    let m = DMatrix::identity(j, j) - &df;
    let rhs = d.component_mul(&ns.v);
    let p = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InfeasibleRate("I - D F is singular".into()))?;
    let scale = p.amax();
    if p.iter().any(|&x| x < -1e-12 * scale) {
        return Err(Error::InfeasibleRate("recovered power has a negative component".into()));
    }
    let p = p.map(|x| x.max(0.0));
    let back = ns.rates(&p);
    for i in 0..j {
        if (back[i] - c[i]).abs() > 1e-9 * c[i].max(1.0) {
            return Err(Error::InfeasibleRate(format!(
                "rate round trip of user {i}: asked {}, got {}",
                c[i], back[i]
            )));
        }
    }
    Ok(p)
}
