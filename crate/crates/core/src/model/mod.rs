//! Two-stage problem data, validation, and the deterministic equivalent.
//!
//! ```text
//! max  cᵀx + Σ_ω p_ω Φ(x, ω)        Ax ≤ b, x ∈ {0,1}^n1
//! Φ(x, ω) = max q_ωᵀy  s.t.  Wy ≤ h_ω − T_ω x,  0 ≤ y ≤ u,  y integer
//! ```

mod sipx;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lp::{dot, LpProblem};
use crate::mip::MipProblem;

pub use sipx::{parse_instance, read_instance, to_sipx, write_instance, ParseError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstStage {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl FirstStage {
    pub fn n1(&self) -> usize {
        self.c.len()
    }

    pub fn m1(&self) -> usize {
        self.b.len()
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.a.iter().zip(&self.b).all(|(r, b)| dot(r, x) <= b + 1e-9)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub p: f64,
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub t: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoStageInstance {
    pub name: String,
    pub first: FirstStage,
    pub n2: usize,
    pub m2: usize,
    pub w: Vec<Vec<f64>>,
    pub u: Vec<i64>,
    pub scenarios: Vec<Scenario>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    /// Assumption tag (`A1`..`A4`) or `dims`.
    pub tag: &'static str,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.severity, self.tag, self.message)
    }
}

#[derive(Debug, Error)]
#[error("invalid instance: {0}")]
pub struct InvalidInstance(pub String);

/// Checks dimensions and the structural assumptions. Recourse feasibility
/// for the all-zeros and all-ones first stage is reported as a warning.
pub fn validate(inst: &TwoStageInstance) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut err = |tag, message: String| out.push(Finding { severity: Severity::Error, tag, message });
    let (n1, m1, n2, m2) = (inst.first.n1(), inst.first.m1(), inst.n2, inst.m2);
    if n1 == 0 {
        err("dims", "no first-stage variables".into());
    }
    if inst.first.a.len() != m1 || inst.first.a.iter().any(|r| r.len() != n1) {
        err("dims", format!("A must be {m1}x{n1}"));
    }
    if inst.w.len() != m2 || inst.w.iter().any(|r| r.len() != n2) {
        err("dims", format!("W must be {m2}x{n2}"));
    }
    if inst.u.len() != n2 {
        err("dims", format!("u must have {n2} entries"));
    }
    if inst.scenarios.is_empty() {
        err("dims", "no scenarios".into());
    }
    for (s, sc) in inst.scenarios.iter().enumerate() {
        if sc.q.len() != n2 || sc.h.len() != m2 || sc.t.len() != m2 || sc.t.iter().any(|r| r.len() != n1) {
            err("dims", format!("scenario {s} has inconsistent dimensions"));
        }
        if !(sc.p > 0.0) {
            err("A1", format!("scenario {s} has probability {}", sc.p));
        }
    }
    let total: f64 = inst.scenarios.iter().map(|s| s.p).sum();
    if !inst.scenarios.is_empty() && (total - 1.0).abs() > 1e-9 {
        err("A1", format!("probabilities sum to {total}"));
    }
    if inst.w.iter().flatten().any(|&v| v < 0.0 || !v.is_finite()) {
        err("A3", "W has a negative or non-finite entry".into());
    }
    if inst.u.iter().any(|&v| v < 1) {
        err("A4", "every upper bound must be at least 1".into());
    }
    if !out.is_empty() {
        return out;
    }
    for x in [vec![0.0; n1], vec![1.0; n1]] {
        for s in 0..inst.scenarios.len() {
            let (_, tau) = subproblem_data(inst, &x, s);
            if tau.iter().any(|&v| v < -1e-9) {
                out.push(Finding {
                    severity: Severity::Warning,
                    tag: "A4",
                    message: format!("y = 0 infeasible in scenario {s} at x = {}", x[0]),
                });
                break;
            }
        }
    }
    out
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

/// `(q_ω, h_ω − T_ω x)`.
pub fn subproblem_data(inst: &TwoStageInstance, x: &[f64], s: usize) -> (Vec<f64>, Vec<f64>) {
    let sc = &inst.scenarios[s];
    let tau = sc.h.iter().zip(&sc.t).map(|(h, row)| h - dot(row, x)).collect();
    (sc.q.clone(), tau)
}

impl TwoStageInstance {
    pub fn n1(&self) -> usize {
        self.first.n1()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    /// `cᵀx + Σ p_ω q_ωᵀ y_ω`.
    pub fn objective(&self, x: &[f64], ys: &[Vec<f64>]) -> f64 {
        dot(&self.first.c, x) + self.scenarios.iter().zip(ys).map(|(s, y)| s.p * dot(&s.q, y)).sum::<f64>()
    }

    /// Integer scenario problem `max qᵀy, Wy ≤ τ, lower ≤ y ≤ u`.
    pub fn scenario_ip(&self, q: &[f64], tau: &[f64], lower: &[f64]) -> MipProblem {
        let mut lp = LpProblem::new(q.to_vec(), lower.to_vec(), self.u.iter().map(|&v| v as f64).collect());
        for (row, &t) in self.w.iter().zip(tau) {
            lp.add_row(row.clone(), t);
        }
        MipProblem::pure_integer(lp)
    }
}

/// The deterministic equivalent with columns `[x | y_1 | … | y_S]`.
#[derive(Clone, Debug)]
pub struct DepModel {
    pub mip: MipProblem,
    pub n1: usize,
    pub n2: usize,
    pub scenarios: usize,
}

impl DepModel {
    pub fn num_cols(&self) -> usize {
        self.mip.lp.num_vars()
    }

    pub fn num_rows(&self) -> usize {
        self.mip.lp.num_rows()
    }

    pub fn y_offset(&self, s: usize) -> usize {
        self.n1 + s * self.n2
    }

    pub fn split<'a>(&self, v: &'a [f64]) -> (&'a [f64], Vec<&'a [f64]>) {
        let ys = (0..self.scenarios).map(|s| &v[self.y_offset(s)..self.y_offset(s) + self.n2]).collect();
        (&v[..self.n1], ys)
    }
}

pub fn build_dep(inst: &TwoStageInstance) -> Result<DepModel, InvalidInstance> {
    if let Some(f) = validate(inst).into_iter().find(|f| f.severity == Severity::Error) {
        return Err(InvalidInstance(f.to_string()));
    }
    let (n1, n2, ns) = (inst.n1(), inst.n2, inst.num_scenarios());
    let ncol = n1 + ns * n2;
    let mut obj = inst.first.c.clone();
    let mut lower = vec![0.0; n1];
    let mut upper = vec![1.0; n1];
    for sc in &inst.scenarios {
        obj.extend(sc.q.iter().map(|q| sc.p * q));
        lower.extend(std::iter::repeat_n(0.0, n2));
        upper.extend(inst.u.iter().map(|&v| v as f64));
    }
    let mut lp = LpProblem::new(obj, lower, upper);
    for (row, &b) in inst.first.a.iter().zip(&inst.first.b) {
        let mut r = row.clone();
        r.resize(ncol, 0.0);
        lp.add_row(r, b);
    }
    for (s, sc) in inst.scenarios.iter().enumerate() {
        let off = n1 + s * n2;
        for k in 0..inst.m2 {
            let mut r = vec![0.0; ncol];
            r[..n1].copy_from_slice(&sc.t[k]);
            r[off..off + n2].copy_from_slice(&inst.w[k]);
            lp.add_row(r, sc.h[k]);
        }
    }
    Ok(DepModel { mip: MipProblem::pure_integer(lp), n1, n2, scenarios: ns })
}
