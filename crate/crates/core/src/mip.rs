//! Best-bound branch and bound over [`crate::lp`], plus an enumeration
//! oracle for small pure-integer boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::lp::{self, dot, LpOptions, LpProblem, LpStatus};

pub const INT_TOL: f64 = 1e-6;
/// Largest box the oracle will scan.
pub const ORACLE_LIMIT: f64 = 1e7;

#[derive(Clone, Debug)]
pub struct MipProblem {
    pub lp: LpProblem,
    pub integer: Vec<bool>,
}

impl MipProblem {
    pub fn pure_integer(lp: LpProblem) -> Self {
        let n = lp.num_vars();
        MipProblem { lp, integer: vec![true; n] }
    }

    /// Checks rows, bounds and integrality of `x` within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        let p = &self.lp;
        x.len() == p.num_vars()
            && (0..x.len()).all(|j| {
                x[j] >= p.lower[j] - tol
                    && x[j] <= p.upper[j] + tol
                    && (!self.integer[j] || (x[j] - x[j].round()).abs() <= tol)
            })
            && p.rows.iter().zip(&p.rhs).all(|(r, b)| dot(r, x) <= b + tol * (1.0 + b.abs()))
    }
}

#[derive(Clone, Debug, Default)]
pub struct MipOptions {
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Absolute deadline; combined with `time_limit` by taking the earlier.
    pub deadline: Option<Instant>,
    /// A known feasible point used as the starting incumbent.
    pub incumbent: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MipStatus {
    Optimal,
    /// Budget exhausted with an incumbent in hand.
    Feasible,
    Infeasible,
    /// Budget exhausted before any feasible point was found.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct MipSolution {
    pub status: MipStatus,
    pub x: Option<Vec<f64>>,
    /// Incumbent value (lower bound); `-inf` without an incumbent.
    pub objective: f64,
    /// Best bound (upper bound).
    pub bound: f64,
    pub nodes: usize,
}

impl MipSolution {
    pub fn gap_pct(&self) -> f64 {
        gap_pct(self.objective, self.bound)
    }
}

/// `100·|UB − LB| / max(|LB|, 1e-12)`.
pub fn gap_pct(lb: f64, ub: f64) -> f64 {
    if !lb.is_finite() || !ub.is_finite() {
        return f64::INFINITY;
    }
    100.0 * (ub - lb).abs() / lb.abs().max(1e-12)
}

pub type Heuristic<'a> = dyn FnMut(&[f64]) -> Option<Vec<f64>> + 'a;

pub fn solve_mip(p: &MipProblem) -> MipSolution {
    solve_mip_with(p, &MipOptions::default(), None)
}

struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    bound: f64,
    depth: usize,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: higher bound, then deeper, then earlier.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Branch and bound. `heuristic` sees every fractional node LP point and may
/// propose a candidate; candidates are verified before use.
pub fn solve_mip_with(p: &MipProblem, opts: &MipOptions, mut heuristic: Option<&mut Heuristic<'_>>) -> MipSolution {
    let n = p.lp.num_vars();
    assert_eq!(p.integer.len(), n, "integrality flags must match variables");
    let deadline = match (opts.deadline, opts.time_limit) {
        (Some(d), Some(t)) => Some(d.min(Instant::now() + t)),
        (Some(d), None) => Some(d),
        (None, Some(t)) => Some(Instant::now() + t),
        (None, None) => None,
    };
    let lp_opts = LpOptions { deadline, max_iterations: None };

    let mut lo = p.lp.lower.clone();
    let mut hi = p.lp.upper.clone();
    for j in 0..n {
        if p.integer[j] {
            lo[j] = (lo[j] - INT_TOL).ceil();
            hi[j] = (hi[j] + INT_TOL).floor();
        }
    }

    let mut best_x: Option<Vec<f64>> = None;
    let mut best = f64::NEG_INFINITY;
    let consider = |cand: Vec<f64>, best: &mut f64, best_x: &mut Option<Vec<f64>>| {
        let snapped = snap(p, cand);
        if p.is_feasible(&snapped, INT_TOL) {
            let v = dot(&p.lp.objective, &snapped);
            if v > *best {
                *best = v;
                *best_x = Some(snapped);
            }
        }
    };
    if let Some(x0) = &opts.incumbent {
        consider(x0.clone(), &mut best, &mut best_x);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
        heap.push(Node { lo, hi, bound: f64::INFINITY, depth: 0, seq });
    }
    let mut nodes = 0usize;
    let mut ub = f64::INFINITY;
    let mut stopped = false;

    let mut work = p.lp.clone();
    while let Some(node) = heap.pop() {
        if prunable(node.bound, best) {
            continue;
        }
        if opts.node_limit.is_some_and(|l| nodes >= l) || deadline.is_some_and(|d| Instant::now() >= d) {
            ub = ub.min(node.bound);
            heap.push(node);
            stopped = true;
            break;
        }
        ub = ub.min(node.bound);
        nodes += 1;
        work.lower.clone_from(&node.lo);
        work.upper.clone_from(&node.hi);
        let sol = lp::solve_with(&work, &lp_opts);
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Interrupted => {
                heap.push(node);
                stopped = true;
                break;
            }
            LpStatus::Unbounded => panic!("boxed LP reported unbounded"),
            LpStatus::Optimal => {}
        }
        let bound = sol.objective.min(node.bound);
        if prunable(bound, best) {
            continue;
        }
        let branch = most_fractional(p, &sol.x);
        let Some(j) = branch else {
            consider(sol.x, &mut best, &mut best_x);
            continue;
        };
        if let Some(h) = heuristic.as_mut() {
            if let Some(cand) = h(&sol.x) {
                consider(cand, &mut best, &mut best_x);
            }
        }
        let v = sol.x[j];
        let mut down_hi = node.hi.clone();
        down_hi[j] = v.floor();
        let mut up_lo = node.lo.clone();
        up_lo[j] = v.ceil();
        seq += 1;
        heap.push(Node { lo: node.lo.clone(), hi: down_hi, bound, depth: node.depth + 1, seq });
        seq += 1;
        heap.push(Node { lo: up_lo, hi: node.hi, bound, depth: node.depth + 1, seq });
    }

    let open_bound = heap
        .iter()
        .filter(|nd| !prunable(nd.bound, best))
        .map(|nd| nd.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = if stopped { ub.min(open_bound.max(best)).max(best) } else { best };
    let status = match (&best_x, stopped && open_bound > best) {
        (None, false) => MipStatus::Infeasible,
        (None, true) => MipStatus::Unknown,
        (Some(_), false) => MipStatus::Optimal,
        (Some(_), true) if gap_pct(best, bound) <= 1e-6 => MipStatus::Optimal,
        (Some(_), true) => MipStatus::Feasible,
    };
    MipSolution { status, x: best_x, objective: best, bound, nodes }
}

fn prunable(bound: f64, best: f64) -> bool {
    best.is_finite() && bound <= best + 1e-9 * best.abs().max(1.0)
}

fn snap(p: &MipProblem, mut x: Vec<f64>) -> Vec<f64> {
    for (v, &int) in x.iter_mut().zip(&p.integer) {
        if int {
            *v = v.round();
        }
    }
    x
}

/// Most fractional integer variable, lowest index on ties.
fn most_fractional(p: &MipProblem, x: &[f64]) -> Option<usize> {
    let mut pick = None;
    let mut score = INT_TOL;
    for (j, &v) in x.iter().enumerate() {
        if !p.integer[j] {
            continue;
        }
        let f = (v - v.floor()).min(v.ceil() - v);
        if f > score + 1e-12 {
            score = f;
            pick = Some(j);
        }
    }
    pick
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration needs all variables integral")]
    NotPureInteger,
    #[error("box of {0:.3e} points exceeds the enumeration limit")]
    TooLarge(f64),
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub best: Option<f64>,
    pub argmax: Option<Vec<i64>>,
    pub points: Vec<Vec<i64>>,
}

/// Scans every integer point of the box and keeps those satisfying all rows.
pub fn enumerate_oracle(p: &MipProblem) -> Result<Enumeration, OracleError> {
    if !p.integer.iter().all(|&b| b) {
        return Err(OracleError::NotPureInteger);
    }
    let n = p.lp.num_vars();
    let lo: Vec<i64> = p.lp.lower.iter().map(|v| (v - INT_TOL).ceil() as i64).collect();
    let hi: Vec<i64> = p.lp.upper.iter().map(|v| (v + INT_TOL).floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(Enumeration { best: None, argmax: None, points: Vec::new() });
    }
    let size: f64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as f64).product();
    if size > ORACLE_LIMIT {
        return Err(OracleError::TooLarge(size));
    }
    let mut y = lo.clone();
    let mut yf = vec![0.0; n];
    let mut out = Enumeration { best: None, argmax: None, points: Vec::new() };
    loop {
        for j in 0..n {
            yf[j] = y[j] as f64;
        }
        let ok = p.lp.rows.iter().zip(&p.lp.rhs).all(|(r, b)| dot(r, &yf) <= b + 1e-9);
        if ok {
            let v = dot(&p.lp.objective, &yf);
            if out.best.is_none_or(|b| v > b) {
                out.best = Some(v);
                out.argmax = Some(y.clone());
            }
            out.points.push(y.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            if y[k] < hi[k] {
                y[k] += 1;
                break;
            }
            y[k] = lo[k];
            k += 1;
        }
    }
}
