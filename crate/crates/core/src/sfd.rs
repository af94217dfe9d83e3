//! Stage-wise Fenchel decomposition and the direct deterministic-equivalent
//! baseline.
//!
//! The master is `max cᵀx + θ` over binary `x` with optimality cuts
//! `θ + ηᵀx ≤ γ`; each scenario keeps an LP relaxation of its recourse
//! problem that is tightened with Fenchel cuts until its solution is
//! integral. Master values are upper bounds. Scenario LP points rounded
//! down stay feasible (`W ≥ 0`), so every iterate also yields a lower bound.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::fcg::{self, BetaDomain, FcgConfig, FcgOutcome, IntegerSet};
use crate::isg::{run_isg, IsgInput};
use crate::lp::{self, dot, LpOptions, LpProblem, LpSolution, LpStatus};
use crate::mip::{gap_pct, solve_mip_with, MipOptions, MipProblem, MipStatus, INT_TOL};
use crate::model::{build_dep, subproblem_data, TwoStageInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    #[serde(rename = "SFD")]
    Sfd,
    #[serde(rename = "SFD-R")]
    SfdR,
    #[serde(rename = "DIRECT")]
    Direct,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Sfd => "SFD",
            Algorithm::SfdR => "SFD-R",
            Algorithm::Direct => "DIRECT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Optimal,
    TimeLimit,
    IterationLimit,
    /// No further progress is possible with the available cuts.
    Stalled,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub instance: String,
    pub algorithm: Algorithm,
    pub scenarios: usize,
    pub mips_solved: usize,
    pub fenchel_cuts: usize,
    pub lb: f64,
    pub ub: f64,
    pub gap_pct: f64,
    pub iterations: usize,
    pub wall_s: f64,
    pub status: RunStatus,
    pub per_scenario_cuts: Vec<usize>,
    pub lshaped_iterations: usize,
    pub fcg_runs: usize,
    /// FCG runs whose `(l, u)` trajectory broke the bound sandwich.
    pub sandwich_failures: usize,
    /// Reduced-set cuts whose right-hand side grew when checked on the full set.
    pub certified_raises: usize,
    pub escalations: usize,
    pub exact_solves: usize,
    pub incumbent: Option<Vec<f64>>,
}

impl SolveReport {
    fn new(inst: &TwoStageInstance, algorithm: Algorithm) -> Self {
        SolveReport {
            instance: inst.name.clone(),
            algorithm,
            scenarios: inst.num_scenarios(),
            mips_solved: 0,
            fenchel_cuts: 0,
            lb: f64::NEG_INFINITY,
            ub: f64::INFINITY,
            gap_pct: f64::INFINITY,
            iterations: 0,
            wall_s: 0.0,
            status: RunStatus::Optimal,
            per_scenario_cuts: vec![0; inst.num_scenarios()],
            lshaped_iterations: 0,
            fcg_runs: 0,
            sandwich_failures: 0,
            certified_raises: 0,
            escalations: 0,
            exact_solves: 0,
            incumbent: None,
        }
    }

    fn close(&mut self, start: Instant) {
        self.gap_pct = gap_pct(self.lb, self.ub);
        self.wall_s = start.elapsed().as_secs_f64();
    }
}

#[derive(Clone, Debug)]
pub struct SfdConfig {
    /// Run integer set generation before each cut.
    pub reduction: bool,
    pub eps: f64,
    pub time_limit: Option<Duration>,
    /// Budget on main-loop iterations (deterministic runs).
    pub max_iterations: Option<usize>,
    pub lshaped_max_iterations: usize,
    pub fcg: FcgConfig,
    /// Recompute `g` of reduced-set cuts over the full set.
    pub certify: bool,
}

impl Default for SfdConfig {
    fn default() -> Self {
        SfdConfig {
            reduction: true,
            eps: 1e-6,
            time_limit: None,
            max_iterations: None,
            lshaped_max_iterations: 10_000,
            fcg: FcgConfig::default(),
            certify: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SfdError {
    #[error("{0}")]
    Invalid(String),
    #[error("scenario {0} LP is infeasible; recourse is not relatively complete")]
    Infeasible(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityCut {
    pub eta: Vec<f64>,
    pub gamma: f64,
    pub iteration: usize,
}

impl OptimalityCut {
    /// Upper bound the cut places on `θ` at `x`.
    pub fn theta_bound(&self, x: &[f64]) -> f64 {
        self.gamma - dot(&self.eta, x)
    }
}

/// A Fenchel cut `βᵀy ≤ g` found at `x̂`, lifted so it binds only there:
/// `βᵀy + λᵀx ≤ rhs` with `rhs − λᵀx = g + M·‖x − x̂‖₁` on binary `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedCut {
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rhs: f64,
    pub g: f64,
    pub at: Vec<f64>,
    pub scenario: usize,
    pub iteration: usize,
}

impl LiftedCut {
    pub fn lift(beta: Vec<f64>, g: f64, x_hat: &[f64], u: &[i64], scenario: usize, iteration: usize) -> Self {
        let reach: f64 = beta.iter().zip(u).map(|(b, &u)| b.max(0.0) * u as f64).sum();
        let big = (reach - g).max(0.0);
        let lambda: Vec<f64> = x_hat.iter().map(|&v| if v > 0.5 { big } else { -big }).collect();
        let ones = x_hat.iter().filter(|&&v| v > 0.5).count() as f64;
        LiftedCut { beta, lambda, rhs: g + big * ones, g, at: x_hat.to_vec(), scenario, iteration }
    }

    pub fn rhs_at(&self, x: &[f64]) -> f64 {
        self.rhs - dot(&self.lambda, x)
    }
}

/// Row and bound multipliers of one scenario LP.
#[derive(Clone, Debug, Default)]
pub struct ScenarioDuals {
    pub base: Vec<f64>,
    pub cuts: Vec<f64>,
    /// Positive parts of reduced costs (upper-bound multipliers).
    pub bounds: Vec<f64>,
}

impl ScenarioDuals {
    pub fn from_solution(sol: &LpSolution, m2: usize) -> Self {
        ScenarioDuals {
            base: sol.duals[..m2].iter().map(|v| v.max(0.0)).collect(),
            cuts: sol.duals[m2..].iter().map(|v| v.max(0.0)).collect(),
            bounds: sol.reduced_costs.iter().map(|v| v.max(0.0)).collect(),
        }
    }
}

/// `η = Σ p (π_baseᵀT + π_cutᵀΛ)`, `γ = Σ p (π_baseᵀh + π_cutᵀrhs + σᵀu)`.
pub fn optimality_cut_from_duals(
    inst: &TwoStageInstance,
    duals: &[ScenarioDuals],
    cuts: &[Vec<LiftedCut>],
    iteration: usize,
) -> OptimalityCut {
    let n1 = inst.n1();
    let mut eta = vec![0.0; n1];
    let mut gamma = 0.0;
    for (s, sc) in inst.scenarios.iter().enumerate() {
        let d = &duals[s];
        let mut piece = 0.0;
        for (k, &pi) in d.base.iter().enumerate() {
            if pi != 0.0 {
                piece += pi * sc.h[k];
                for i in 0..n1 {
                    eta[i] += sc.p * pi * sc.t[k][i];
                }
            }
        }
        for (c, &pi) in d.cuts.iter().enumerate() {
            if pi != 0.0 {
                let cut = &cuts[s][c];
                piece += pi * cut.rhs;
                for i in 0..n1 {
                    eta[i] += sc.p * pi * cut.lambda[i];
                }
            }
        }
        piece += d.bounds.iter().zip(&inst.u).map(|(s, &u)| s * u as f64).sum::<f64>();
        gamma += sc.p * piece;
    }
    OptimalityCut { eta, gamma, iteration }
}

/// Scenario LP at `x` with the scenario's Fenchel cuts.
pub fn scenario_lp(inst: &TwoStageInstance, s: usize, x: &[f64], cuts: &[LiftedCut]) -> LpProblem {
    let (q, tau) = subproblem_data(inst, x, s);
    let mut p = LpProblem::new(q, vec![0.0; inst.n2], inst.u.iter().map(|&v| v as f64).collect());
    for (row, t) in inst.w.iter().zip(tau) {
        p.add_row(row.clone(), t);
    }
    for c in cuts {
        p.add_row(c.beta.clone(), c.rhs_at(x));
    }
    p
}

fn is_integral(y: &[f64]) -> bool {
    y.iter().all(|v| (v - v.round()).abs() <= INT_TOL)
}

/// Everything the solver accumulated, for inspection after a run.
#[derive(Clone, Debug)]
pub struct SfdOutcome {
    pub report: SolveReport,
    pub optimality_cuts: Vec<OptimalityCut>,
    pub fenchel_cuts: Vec<Vec<LiftedCut>>,
    /// First-stage point of the best lower bound and the recourse used.
    pub incumbent: Option<(Vec<f64>, Vec<Vec<f64>>)>,
    /// `(LB, UB)` after every bound update.
    pub bounds: Vec<(f64, f64)>,
}

struct Master {
    lp: LpProblem,
    n1: usize,
}

impl Master {
    fn new(inst: &TwoStageInstance) -> Self {
        let n1 = inst.n1();
        let mut theta_hi = 0.0;
        let mut theta_lo = 0.0;
        for sc in &inst.scenarios {
            for (q, &u) in sc.q.iter().zip(&inst.u) {
                theta_hi += sc.p * q.max(0.0) * u as f64;
                theta_lo += sc.p * q.min(0.0) * u as f64;
            }
        }
        let mut obj = inst.first.c.clone();
        obj.push(1.0);
        let mut lower = vec![0.0; n1];
        lower.push(theta_lo);
        let mut upper = vec![1.0; n1];
        upper.push(theta_hi);
        let mut lp = LpProblem::new(obj, lower, upper);
        for (row, &b) in inst.first.a.iter().zip(&inst.first.b) {
            let mut r = row.clone();
            r.push(0.0);
            lp.add_row(r, b);
        }
        Master { lp, n1 }
    }

    fn add(&mut self, cut: &OptimalityCut) {
        let mut r = cut.eta.clone();
        r.push(1.0);
        self.lp.add_row(r, cut.gamma);
    }

    /// `(x̂, value, bound)`; `None` if the budget ran out without a point.
    fn solve(&self, deadline: Option<Instant>) -> Option<(Vec<f64>, f64, f64)> {
        let mut integer = vec![true; self.n1];
        integer.push(false);
        let p = MipProblem { lp: self.lp.clone(), integer };
        let s = solve_mip_with(&p, &MipOptions { deadline, ..Default::default() }, None);
        match s.status {
            MipStatus::Optimal | MipStatus::Feasible => {
                let x = s.x.expect("incumbent");
                Some((x[..self.n1].to_vec(), s.objective, s.bound))
            }
            MipStatus::Infeasible => panic!("first-stage constraints are infeasible"),
            MipStatus::Unknown => None,
        }
    }
}

struct ScenarioStep {
    duals: ScenarioDuals,
    lp_value: f64,
    /// Value of a feasible integer recourse at the current `x̂`.
    lower: f64,
    y_lower: Vec<f64>,
    new_cut: Option<LiftedCut>,
}

struct Run<'a> {
    inst: &'a TwoStageInstance,
    cfg: &'a SfdConfig,
    deadline: Option<Instant>,
    report: SolveReport,
    scenario: usize,
}

impl Run<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn solve_lp(&self, p: &LpProblem, s: usize) -> Result<Option<LpSolution>, SfdError> {
        let sol = lp::solve_with(p, &LpOptions { deadline: self.deadline, max_iterations: None });
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol)),
            LpStatus::Infeasible => Err(SfdError::Infeasible(s)),
            LpStatus::Interrupted => Ok(None),
            LpStatus::Unbounded => unreachable!("scenario LPs are boxed"),
        }
    }

    fn fcg(&mut self, y_hat: &[f64], set: &IntegerSet, domain: BetaDomain) -> FcgOutcome {
        let mut cfg = self.cfg.fcg.clone();
        cfg.domain = domain;
        cfg.inner.deadline = self.deadline;
        let out = fcg::generate_cut(y_hat, set, &cfg);
        self.report.fcg_runs += 1;
        self.report.mips_solved += out.inner_solves;
        if !fcg::check_sandwich(&out.trajectory, out.stop, cfg.eps) {
            self.report.sandwich_failures += 1;
        }
        out
    }

    fn budget(&self) -> MipOptions {
        MipOptions { deadline: self.deadline, ..Default::default() }
    }

    /// Separates `ŷ` from the scenario's integer hull at `x̂`. Each stage that
    /// yields no cut hands over to a more expensive one, ending in an exact solve.
    fn separate(&mut self, rows: &[Vec<f64>], tau: &[f64], y_hat: &[f64]) -> Separation {
        let u = &self.inst.u;
        let eps = self.cfg.fcg.eps;
        let full = IntegerSet::full(rows, tau, u);
        if self.cfg.reduction {
            let y_bar = run_isg(&IsgInput::new(rows, tau, u, y_hat)).y_bar;
            let reduced = IntegerSet::reduced(rows, tau, u, &y_bar);
            if let Some(cut) = self.fcg(y_hat, &reduced, BetaDomain::Box).cut {
                let mut g = cut.g;
                if self.cfg.certify && y_bar.iter().any(|&v| v > 0) {
                    self.report.mips_solved += 1;
                    match fcg::eval_g(&cut.beta, &full, &self.budget()) {
                        Ok((g_full, _)) if g_full > g + 1e-9 * g.abs().max(1.0) => {
                            self.report.certified_raises += 1;
                            g = g_full;
                        }
                        Ok(_) => {}
                        Err(_) => return Separation::Budget,
                    }
                }
                if dot(&cut.beta, y_hat) - g > eps {
                    return Separation::Cut(cut.beta, g);
                }
            }
            if self.out_of_time() {
                return Separation::Budget;
            }
            self.report.escalations += 1;
        }
        for domain in [BetaDomain::Box, BetaDomain::L1Ball] {
            if domain == BetaDomain::L1Ball {
                self.report.escalations += 1;
            }
            if let Some(cut) = self.fcg(y_hat, &full, domain).cut {
                return Separation::Cut(cut.beta, cut.g);
            }
            if self.out_of_time() {
                return Separation::Budget;
            }
        }
        self.report.escalations += 1;
        self.report.exact_solves += 1;
        self.report.mips_solved += 1;
        let ip = full.problem(&self.inst.scenarios[self.scenario].q);
        let r = solve_mip_with(&ip, &self.budget(), None);
        match (r.status, r.x) {
            (MipStatus::Optimal, Some(y)) => Separation::Exact(r.objective, y),
            _ => Separation::Budget,
        }
    }

    fn scenario_step(
        &mut self,
        s: usize,
        x: &[f64],
        cuts: &[LiftedCut],
        iteration: usize,
        generate: bool,
    ) -> Result<Option<ScenarioStep>, SfdError> {
        let inst = self.inst;
        self.scenario = s;
        let mut p = scenario_lp(inst, s, x, cuts);
        let Some(mut sol) = self.solve_lp(&p, s)? else { return Ok(None) };
        let mut new_cut = None;
        let mut exact = None;
        if generate && !is_integral(&sol.x) && !self.out_of_time() {
            let (rows, tau) = (p.rows.clone(), p.rhs.clone());
            match self.separate(&rows, &tau, &sol.x) {
                Separation::Cut(beta, g) => {
                    let cut = LiftedCut::lift(beta, g, x, &inst.u, s, iteration);
                    p.add_row(cut.beta.clone(), cut.rhs_at(x));
                    new_cut = Some(cut);
                    match self.solve_lp(&p, s)? {
                        Some(next) => sol = next,
                        None => return Ok(None),
                    }
                }
                Separation::Exact(v, y) => exact = Some((v, y)),
                Separation::Budget => {}
            }
        }
        let duals = ScenarioDuals::from_solution(&sol, inst.m2);
        let q = &inst.scenarios[s].q;
        let y_lower: Vec<f64> = match exact {
            _ if is_integral(&sol.x) => sol.x.iter().map(|v| v.round()).collect(),
            Some((_, y)) => y,
            None => sol.x.iter().map(|v| (v + INT_TOL).floor().max(0.0)).collect(),
        };
        let lower = dot(q, &y_lower);
        Ok(Some(ScenarioStep { duals, lp_value: sol.objective, lower, y_lower, new_cut }))
    }
}

enum Separation {
    Cut(Vec<f64>, f64),
    /// No cut, but the scenario IP was solved: value and solution.
    Exact(f64, Vec<f64>),
    Budget,
}

/// Converged point of the partial relaxation (binary `x`, relaxed recourse).
#[derive(Clone, Debug)]
pub struct LShapedStart {
    pub x: Vec<f64>,
    pub master_value: f64,
    /// `Φ_LP` per scenario at `x`.
    pub scenario_values: Vec<f64>,
    pub optimality_cuts: Vec<OptimalityCut>,
    pub iterations: usize,
}

/// L-shaped method on the scenario LP relaxations.
pub fn lshaped_init(inst: &TwoStageInstance, eps: f64) -> Result<LShapedStart, SfdError> {
    let cfg = SfdConfig { eps, ..Default::default() };
    let mut state = State::new(inst, &cfg)?;
    let start = state.lshaped()?.expect("no budget");
    Ok(LShapedStart {
        x: start.0,
        master_value: start.1,
        scenario_values: start.2,
        optimality_cuts: state.opt_cuts,
        iterations: state.run.report.lshaped_iterations,
    })
}

struct State<'a> {
    run: Run<'a>,
    master: Master,
    opt_cuts: Vec<OptimalityCut>,
    cuts: Vec<Vec<LiftedCut>>,
    incumbent: Option<(Vec<f64>, Vec<Vec<f64>>)>,
    lb: f64,
    ub: f64,
    history: Vec<(f64, f64)>,
}

impl<'a> State<'a> {
    fn new(inst: &'a TwoStageInstance, cfg: &'a SfdConfig) -> Result<Self, SfdError> {
        if let Some(f) = crate::model::validate(inst).into_iter().find(|f| f.severity == crate::model::Severity::Error) {
            return Err(SfdError::Invalid(f.to_string()));
        }
        let algorithm = if cfg.reduction { Algorithm::SfdR } else { Algorithm::Sfd };
        let deadline = cfg.time_limit.map(|t| Instant::now() + t);
        Ok(State {
            run: Run { inst, cfg, deadline, report: SolveReport::new(inst, algorithm), scenario: 0 },
            master: Master::new(inst),
            opt_cuts: Vec::new(),
            cuts: vec![Vec::new(); inst.num_scenarios()],
            incumbent: None,
            lb: f64::NEG_INFINITY,
            ub: f64::INFINITY,
            history: Vec::new(),
        })
    }

    fn converged(&self) -> bool {
        self.lb.is_finite() && self.ub - self.lb <= self.run.cfg.eps * self.lb.abs().max(1e-12)
    }

    /// One master solve; tightens `UB`.
    fn solve_master(&mut self) -> Option<(Vec<f64>, f64)> {
        let (x, value, bound) = self.master.solve(self.run.deadline)?;
        self.ub = self.ub.min(bound);
        self.history.push((self.lb, self.ub));
        Some((x, value))
    }

    fn add_optimality_cut(&mut self, steps: Vec<ScenarioStep>, iteration: usize) {
        let duals: Vec<ScenarioDuals> = steps.into_iter().map(|s| s.duals).collect();
        let cut = optimality_cut_from_duals(self.run.inst, &duals, &self.cuts, iteration);
        self.master.add(&cut);
        self.opt_cuts.push(cut);
    }

    fn record_lower(&mut self, x: &[f64], steps: &[ScenarioStep]) {
        let inst = self.run.inst;
        let value = dot(&inst.first.c, x) + inst.scenarios.iter().zip(steps).map(|(sc, st)| sc.p * st.lower).sum::<f64>();
        if value > self.lb {
            self.lb = value;
            self.incumbent = Some((x.to_vec(), steps.iter().map(|s| s.y_lower.clone()).collect()));
        }
        self.history.push((self.lb, self.ub));
    }

    /// Returns `(x, master value, Φ_LP per scenario)`, or `None` on budget.
    fn lshaped(&mut self) -> Result<Option<(Vec<f64>, f64, Vec<f64>)>, SfdError> {
        let inst = self.run.inst;
        let eps = self.run.cfg.eps;
        loop {
            let Some((x, z)) = self.solve_master() else { return Ok(None) };
            self.run.report.lshaped_iterations += 1;
            let mut steps = Vec::with_capacity(inst.num_scenarios());
            for s in 0..inst.num_scenarios() {
                match self.run.scenario_step(s, &x, &self.cuts[s], 0, false)? {
                    Some(st) => steps.push(st),
                    None => return Ok(None),
                }
            }
            self.record_lower(&x, &steps);
            let values: Vec<f64> = steps.iter().map(|s| s.lp_value).collect();
            let relaxed = dot(&inst.first.c, &x) + inst.scenarios.iter().zip(&values).map(|(sc, v)| sc.p * v).sum::<f64>();
            if z - relaxed <= eps * relaxed.abs().max(1.0) || self.run.report.lshaped_iterations >= self.run.cfg.lshaped_max_iterations {
                return Ok(Some((x, z, values)));
            }
            self.add_optimality_cut(steps, 0);
            if self.run.out_of_time() {
                return Ok(None);
            }
        }
    }

    fn fenchel(&mut self, mut x_hat: Vec<f64>, mut z: f64) -> Result<RunStatus, SfdError> {
        let inst = self.run.inst;
        let ns = inst.num_scenarios();
        let mut k = 0;
        loop {
            if self.converged() {
                return Ok(RunStatus::Optimal);
            }
            if self.run.out_of_time() {
                return Ok(RunStatus::TimeLimit);
            }
            if self.run.cfg.max_iterations.is_some_and(|m| k >= m) {
                return Ok(RunStatus::IterationLimit);
            }
            k += 1;
            self.run.report.iterations = k;
            let mut added = 0;
            let mut steps = Vec::with_capacity(ns);
            for s in 0..ns {
                let Some(st) = self.run.scenario_step(s, &x_hat, &self.cuts[s], k, true)? else { return Ok(RunStatus::TimeLimit) };
                if let Some(c) = &st.new_cut {
                    self.cuts[s].push(c.clone());
                    self.run.report.fenchel_cuts += 1;
                    self.run.report.per_scenario_cuts[s] += 1;
                    added += 1;
                }
                steps.push(st);
            }
            self.record_lower(&x_hat, &steps);
            if self.converged() {
                return Ok(RunStatus::Optimal);
            }
            self.add_optimality_cut(steps, k);
            let Some((x, value)) = self.solve_master() else { return Ok(RunStatus::TimeLimit) };
            // Same point, no new cut and no drop in the master value: the next
            // iteration would repeat this one exactly.
            if x == x_hat && added == 0 && z - value <= 1e-9 * z.abs().max(1.0) {
                return Ok(if self.converged() { RunStatus::Optimal } else { RunStatus::Stalled });
            }
            (x_hat, z) = (x, value);
        }
    }
}

/// Stage-wise Fenchel decomposition with optional integer set reduction.
pub fn sfd_solve(inst: &TwoStageInstance, cfg: &SfdConfig) -> Result<SfdOutcome, SfdError> {
    let start = Instant::now();
    let mut state = State::new(inst, cfg)?;
    let status = match state.lshaped()? {
        Some((x, z, _)) => state.fenchel(x, z)?,
        None => RunStatus::TimeLimit,
    };
    let mut report = state.run.report;
    report.lb = state.lb;
    report.ub = state.ub.max(state.lb);
    report.status = status;
    report.incumbent = state.incumbent.as_ref().map(|(x, _)| x.clone());
    report.close(start);
    Ok(SfdOutcome {
        report,
        optimality_cuts: state.opt_cuts,
        fenchel_cuts: state.cuts,
        incumbent: state.incumbent,
        bounds: state.history,
    })
}

/// Rounds the first stage of a DEP point and completes each scenario with
/// its LP solution rounded down.
fn dep_rounding(inst: &TwoStageInstance, v: &[f64]) -> Option<Vec<f64>> {
    let n1 = inst.n1();
    let mut x: Vec<f64> = v[..n1].iter().map(|&t| if t >= 0.5 { 1.0 } else { 0.0 }).collect();
    if !inst.first.is_feasible(&x) {
        x = v[..n1].iter().map(|&t| (t + INT_TOL).floor()).collect();
        if !inst.first.is_feasible(&x) {
            return None;
        }
    }
    let mut out = x.clone();
    for s in 0..inst.num_scenarios() {
        let p = scenario_lp(inst, s, &x, &[]);
        let sol = lp::solve(&p);
        if sol.status != LpStatus::Optimal {
            return None;
        }
        out.extend(sol.x.iter().map(|y| (y + INT_TOL).floor().max(0.0)));
    }
    Some(out)
}

/// Branch and bound on the deterministic equivalent.
pub fn direct_solve(inst: &TwoStageInstance, time_limit: Option<Duration>, node_limit: Option<usize>) -> Result<SolveReport, SfdError> {
    let start = Instant::now();
    let dep = build_dep(inst).map_err(|e| SfdError::Invalid(e.to_string()))?;
    let mut report = SolveReport::new(inst, Algorithm::Direct);
    let zero = vec![0.0; dep.num_cols()];
    let opts = MipOptions {
        time_limit,
        node_limit,
        incumbent: inst.first.is_feasible(&zero[..inst.n1()]).then(|| zero.clone()),
        ..Default::default()
    };
    let mut heuristic = |v: &[f64]| dep_rounding(inst, v);
    let s = solve_mip_with(&dep.mip, &opts, Some(&mut heuristic));
    report.mips_solved = 1;
    report.iterations = s.nodes;
    report.lb = s.objective;
    report.ub = s.bound;
    report.status = match s.status {
        MipStatus::Optimal | MipStatus::Infeasible => RunStatus::Optimal,
        _ if node_limit.is_some_and(|l| s.nodes >= l) => RunStatus::IterationLimit,
        _ => RunStatus::TimeLimit,
    };
    report.incumbent = s.x.map(|v| v[..inst.n1()].to_vec());
    report.close(start);
    Ok(report)
}

/// Runs one algorithm under a wall-clock and/or iteration budget.
pub fn solve(
    inst: &TwoStageInstance,
    algorithm: Algorithm,
    eps: f64,
    time_limit: Option<Duration>,
    max_iterations: Option<usize>,
) -> Result<SolveReport, SfdError> {
    match algorithm {
        Algorithm::Direct => direct_solve(inst, time_limit, max_iterations),
        Algorithm::Sfd | Algorithm::SfdR => {
            let cfg = SfdConfig { reduction: algorithm == Algorithm::SfdR, eps, time_limit, max_iterations, ..Default::default() };
            Ok(sfd_solve(inst, &cfg)?.report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenConfig};
    use crate::mip::enumerate_oracle;

    fn small(seed: u64) -> TwoStageInstance {
        let mut cfg = GenConfig::knapsack(3, 2, 3, seed, 'a');
        cfg.m1 = 2;
        cfg.v_ub = 3;
        generate(&cfg)
    }

    fn dep_optimum(inst: &TwoStageInstance) -> f64 {
        enumerate_oracle(&build_dep(inst).unwrap().mip).unwrap().best.unwrap()
    }

    #[test]
    fn lifted_cut_binds_only_at_its_point() {
        let c = LiftedCut::lift(vec![1.0, 0.5], 2.0, &[1.0, 0.0, 1.0], &[3, 4], 0, 1);
        assert!((c.rhs_at(&[1.0, 0.0, 1.0]) - 2.0).abs() < 1e-12);
        // M = 3 + 2 - 2 = 3 per flipped coordinate.
        assert!((c.rhs_at(&[1.0, 1.0, 1.0]) - 5.0).abs() < 1e-12);
        assert!((c.rhs_at(&[0.0, 1.0, 1.0]) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration_on_small_instances() {
        for seed in 0..6 {
            let inst = small(seed);
            let best = dep_optimum(&inst);
            for reduction in [false, true] {
                let out = sfd_solve(&inst, &SfdConfig { reduction, ..Default::default() }).unwrap();
                let r = &out.report;
                assert_eq!(r.status, RunStatus::Optimal, "seed {seed} reduction {reduction}: {r:?}");
                assert!((r.lb - best).abs() <= 1e-6 * best.abs().max(1.0), "seed {seed}: {} vs {best}", r.lb);
                let (x, ys) = out.incumbent.as_ref().unwrap();
                assert!((inst.objective(x, ys) - r.lb).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn direct_matches_enumeration() {
        for seed in 0..4 {
            let inst = small(seed);
            let r = direct_solve(&inst, None, None).unwrap();
            assert_eq!(r.status, RunStatus::Optimal);
            assert!((r.lb - dep_optimum(&inst)).abs() < 1e-6);
        }
    }

    #[test]
    fn iteration_budget_is_honored() {
        let inst = generate(&GenConfig::knapsack(4, 4, 4, 11, 'a'));
        let cfg = SfdConfig { max_iterations: Some(1), ..Default::default() };
        let r = sfd_solve(&inst, &cfg).unwrap().report;
        assert!(r.iterations <= 1);
        assert!(r.lb <= r.ub + 1e-9);
    }
}
