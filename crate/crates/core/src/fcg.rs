//! Fenchel cut generation by alternating a separation LP and an inner IP.
//!
//! For an LP point `ŷ` the most violated inequality `βᵀy ≤ g(β)`, with
//! `g(β) = max{βᵀy : y ∈ F_v}`, is found by a cutting-plane exchange:
//! the inner IP evaluates `g` at the current `β` (lower bound on the best
//! violation) and the master LP over the collected points bounds it from
//! above.

use serde::Serialize;

use crate::lp::{self, dot, LpProblem, LpStatus};
use crate::mip::{solve_mip_with, MipOptions, MipProblem, MipStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BetaDomain {
    /// `0 ≤ β ≤ 1`.
    Box,
    /// `‖β‖₁ ≤ 1`, split into positive and negative parts.
    L1Ball,
}

#[derive(Clone, Debug)]
pub struct FcgConfig {
    pub domain: BetaDomain,
    pub eps: f64,
    pub max_iterations: usize,
    /// Budget for each inner IP; hitting it abandons the cut.
    pub inner: MipOptions,
}

impl Default for FcgConfig {
    fn default() -> Self {
        FcgConfig { domain: BetaDomain::Box, eps: 1e-6, max_iterations: 200, inner: MipOptions::default() }
    }
}

/// `{y integer : Wy ≤ τ, lower ≤ y ≤ u}`.
#[derive(Clone, Debug)]
pub struct IntegerSet<'a> {
    pub w: &'a [Vec<f64>],
    pub tau: &'a [f64],
    pub u: &'a [i64],
    pub lower: Vec<i64>,
}

impl<'a> IntegerSet<'a> {
    pub fn full(w: &'a [Vec<f64>], tau: &'a [f64], u: &'a [i64]) -> Self {
        IntegerSet { w, tau, u, lower: vec![0; u.len()] }
    }

    pub fn reduced(w: &'a [Vec<f64>], tau: &'a [f64], u: &'a [i64], lower: &[i64]) -> Self {
        IntegerSet { w, tau, u, lower: lower.to_vec() }
    }

    pub fn problem(&self, objective: &[f64]) -> MipProblem {
        let lower = self.lower.iter().map(|&v| v as f64).collect();
        let upper = self.u.iter().map(|&v| v as f64).collect();
        let mut lp = LpProblem::new(objective.to_vec(), lower, upper);
        for (row, &t) in self.w.iter().zip(self.tau) {
            lp.add_row(row.clone(), t);
        }
        MipProblem::pure_integer(lp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FenchelCut {
    pub beta: Vec<f64>,
    pub g: f64,
    /// `βᵀŷ − g` at generation time.
    pub violation: f64,
    pub scenario: usize,
    pub iteration: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FcgStop {
    Tolerance,
    IterationCap,
    InnerBudget,
    EmptySet,
}

#[derive(Clone, Debug)]
pub struct FcgOutcome {
    pub cut: Option<FenchelCut>,
    /// `(l, u)` after every iteration.
    pub trajectory: Vec<(f64, f64)>,
    pub stop: FcgStop,
    pub inner_solves: usize,
    pub best_violation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalError {
    Empty,
    Budget,
}

/// `g(β)` and a maximizer over `set`, solved exactly.
pub fn eval_g(beta: &[f64], set: &IntegerSet, budget: &MipOptions) -> Result<(f64, Vec<f64>), EvalError> {
    let s = solve_mip_with(&set.problem(beta), budget, None);
    match s.status {
        MipStatus::Optimal => {
            let y = s.x.expect("optimal MIP has a point");
            Ok((dot(beta, &y), y))
        }
        MipStatus::Infeasible => Err(EvalError::Empty),
        MipStatus::Feasible | MipStatus::Unknown => Err(EvalError::Budget),
    }
}

/// `max θ  s.t.  θ ≤ (ŷ − y^ν)ᵀβ  ∀ν,  β ∈ Π`.
pub fn separation_master(points: &[Vec<f64>], y_hat: &[f64], domain: BetaDomain) -> (f64, Vec<f64>) {
    assert!(!points.is_empty(), "separation master needs at least one point");
    let n = y_hat.len();
    let spread: f64 = (0..n)
        .map(|i| points.iter().map(|y| (y_hat[i] - y[i]).abs()).fold(0.0, f64::max))
        .sum();
    let nb = match domain {
        BetaDomain::Box => n,
        BetaDomain::L1Ball => 2 * n,
    };
    let mut obj = vec![0.0; 1 + nb];
    obj[0] = 1.0;
    let mut lower = vec![0.0; 1 + nb];
    lower[0] = -1.0;
    let mut upper = vec![1.0; 1 + nb];
    upper[0] = spread + 1.0;
    let mut p = LpProblem::new(obj, lower, upper);
    for y in points {
        let mut row = vec![0.0; 1 + nb];
        row[0] = 1.0;
        for i in 0..n {
            row[1 + i] = -(y_hat[i] - y[i]);
            if domain == BetaDomain::L1Ball {
                row[1 + n + i] = y_hat[i] - y[i];
            }
        }
        p.add_row(row, 0.0);
    }
    if domain == BetaDomain::L1Ball {
        let mut row = vec![1.0; 1 + nb];
        row[0] = 0.0;
        p.add_row(row, 1.0);
    }
    let s = lp::solve(&p);
    assert_eq!(s.status, LpStatus::Optimal, "separation master is always feasible and bounded");
    let beta = match domain {
        BetaDomain::Box => s.x[1..].to_vec(),
        BetaDomain::L1Ball => (0..n).map(|i| s.x[1 + i] - s.x[1 + n + i]).collect(),
    };
    (s.x[0], beta)
}

/// Fractional parts of `ŷ` scaled to max-norm one, or all ones.
pub fn initial_beta(y_hat: &[f64], domain: BetaDomain) -> Vec<f64> {
    let frac: Vec<f64> = y_hat.iter().map(|v| v - v.floor()).map(|f| if !(1e-9..=1.0 - 1e-9).contains(&f) { 0.0 } else { f }).collect();
    let top = frac.iter().cloned().fold(0.0, f64::max);
    let mut beta = if top > 0.0 { frac.iter().map(|f| f / top).collect() } else { vec![1.0; y_hat.len()] };
    if domain == BetaDomain::L1Ball {
        let s: f64 = beta.iter().sum();
        beta.iter_mut().for_each(|b| *b /= s);
    }
    beta
}

pub fn generate_cut(y_hat: &[f64], set: &IntegerSet, cfg: &FcgConfig) -> FcgOutcome {
    let mut beta = initial_beta(y_hat, cfg.domain);
    let mut l = f64::NEG_INFINITY;
    let mut u = f64::INFINITY;
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut trajectory = Vec::new();
    let mut inner_solves = 0;
    let mut stop = FcgStop::IterationCap;
    for t in 0..cfg.max_iterations {
        inner_solves += 1;
        let (g, y) = match eval_g(&beta, set, &cfg.inner) {
            Ok(v) => v,
            Err(e) => {
                stop = if e == EvalError::Empty { FcgStop::EmptySet } else { FcgStop::InnerBudget };
                best = None;
                break;
            }
        };
        let d = dot(&beta, y_hat) - g;
        if d > l {
            l = d;
            best = Some((beta.clone(), g, t));
        }
        points.push(y);
        let (theta, next) = separation_master(&points, y_hat, cfg.domain);
        u = u.min(theta);
        trajectory.push((l, u));
        if u - l <= cfg.eps {
            stop = FcgStop::Tolerance;
            break;
        }
        beta = next;
    }
    let cut = best.and_then(|(beta, g, iteration)| {
        let violation = dot(&beta, y_hat) - g;
        (violation > cfg.eps).then_some(FenchelCut { beta, g, violation, scenario: 0, iteration })
    });
    FcgOutcome { cut, trajectory, stop, inner_solves, best_violation: l }
}

/// `l` nondecreasing, `u` nonincreasing, `l ≤ u + 1e-9`, and a terminal
/// gap within `eps` when the run stopped on tolerance.
pub fn check_sandwich(trajectory: &[(f64, f64)], stop: FcgStop, eps: f64) -> bool {
    let ordered = trajectory.iter().all(|&(l, u)| l <= u + 1e-9);
    let monotone = trajectory.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 <= w[0].1);
    let closed = stop != FcgStop::Tolerance || trajectory.last().is_some_and(|&(l, u)| u - l <= eps);
    ordered && monotone && closed
}
