//! Dense bounded-variable primal simplex.
//!
//! Solves `max cᵀx  s.t.  Ax ≤ b,  l ≤ x ≤ u` with finite bounds. Row
//! duals come out nonnegative; bound multipliers are reported as reduced
//! costs.

use std::time::Instant;

use serde::Serialize;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced-cost (optimality) tolerance.
pub const OPT_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_SWITCH: usize = 50;
const MAX_REFACTOR: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        LpProblem { objective, rows: Vec::new(), rhs: Vec::new(), lower, upper }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, row: Vec<f64>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Returns a description of the first dimension or bound problem found.
    pub fn check(&self) -> Result<(), String> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(format!("bounds have length {}/{} for {} variables", self.lower.len(), self.upper.len(), n));
        }
        if self.rhs.len() != self.rows.len() {
            return Err(format!("{} rows but {} right-hand sides", self.rows.len(), self.rhs.len()));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != n) {
            return Err(format!("row {i} has {} entries, expected {n}", self.rows[i].len()));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(format!("variable {j} has an infinite bound"));
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Deadline or iteration limit reached before optimality.
    Interrupted,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// One multiplier per row, `≥ 0` at optimality.
    pub duals: Vec<f64>,
    /// `c_j − πᵀA_j`; positive at an upper bound, negative at a lower bound.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `πᵀb + Σ_j d_j x_j`, which equals the objective on an optimal basis.
    pub fn dual_objective(&self, p: &LpProblem) -> f64 {
        dot(&self.duals, &p.rhs) + dot(&self.reduced_costs, &self.x)
    }
}

#[derive(Clone, Debug, Default)]
pub struct LpOptions {
    pub deadline: Option<Instant>,
    pub max_iterations: Option<usize>,
}

pub fn solve(p: &LpProblem) -> LpSolution {
    solve_with(p, &LpOptions::default())
}

pub fn solve_with(p: &LpProblem, opts: &LpOptions) -> LpSolution {
    if let Err(e) = p.check() {
        panic!("malformed LP: {e}");
    }
    Simplex::new(p).run(p, opts)
}

/// Appends `row·x ≤ rhs` to `p` and re-solves.
pub fn add_row_resolve(p: &mut LpProblem, row: Vec<f64>, rhs: f64) -> LpSolution {
    p.add_row(row, rhs);
    solve(p)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Simplex {
    m: usize,
    n: usize,
    ncol: usize,
    /// Row-major `m × ncol` tableau `B⁻¹[A I −E]`.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Value of each nonbasic column (basic entries are stale).
    val: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    /// Row owning each artificial column.
    art_row: Vec<usize>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    Interrupted,
}

impl Simplex {
    fn new(p: &LpProblem) -> Self {
        let m = p.num_rows();
        let n = p.num_vars();
        let mut val: Vec<f64> = p.lower.clone();
        let slack: Vec<f64> = (0..m).map(|r| p.rhs[r] - dot(&p.rows[r], &val)).collect();
        let art_row: Vec<usize> = (0..m).filter(|&r| slack[r] < -FEAS_TOL).collect();
        let na = art_row.len();
        let ncol = n + m + na;

        let mut lo = p.lower.clone();
        let mut hi = p.upper.clone();
        lo.extend(std::iter::repeat_n(0.0, m + na));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m + na));
        val.extend(std::iter::repeat_n(0.0, m + na));

        let mut t = vec![0.0; m * ncol];
        let mut basis = vec![0; m];
        let mut beta = vec![0.0; m];
        let mut art_of_row = vec![None; m];
        for (a, &r) in art_row.iter().enumerate() {
            art_of_row[r] = Some(a);
        }
        for r in 0..m {
            let row = &mut t[r * ncol..(r + 1) * ncol];
            row[..n].copy_from_slice(&p.rows[r]);
            row[n + r] = 1.0;
            match art_of_row[r] {
                Some(a) => {
                    // Artificial has column −e_r; basis inverse negates the row.
                    row[n + m + a] = -1.0;
                    for v in row.iter_mut() {
                        *v = -*v;
                    }
                    basis[r] = n + m + a;
                    beta[r] = -slack[r];
                }
                None => {
                    basis[r] = n + r;
                    beta[r] = slack[r].max(0.0);
                }
            }
        }
        let mut pos = vec![None; ncol];
        for (r, &b) in basis.iter().enumerate() {
            pos[b] = Some(r);
        }
        Simplex {
            m,
            n,
            ncol,
            t,
            beta,
            basis,
            pos,
            lo,
            hi,
            val,
            cost: vec![0.0; ncol],
            d: vec![0.0; ncol],
            art_row,
            iterations: 0,
        }
    }

    fn run(mut self, p: &LpProblem, opts: &LpOptions) -> LpSolution {
        let (n, m) = (self.n, self.m);
        if !self.art_row.is_empty() {
            self.cost = vec![0.0; self.ncol];
            for c in &mut self.cost[n + m..] {
                *c = -1.0;
            }
            self.price();
            match self.iterate(opts) {
                Outcome::Interrupted => return self.finish(p, LpStatus::Interrupted),
                Outcome::Unbounded => unreachable!("phase one is bounded"),
                Outcome::Optimal => {}
            }
            let infeas: f64 = (n + m..self.ncol).map(|j| self.value(j)).sum();
            if infeas > FEAS_TOL * (1.0 + p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()))) {
                return self.finish(p, LpStatus::Infeasible);
            }
            for j in n + m..self.ncol {
                self.hi[j] = 0.0;
                if self.pos[j].is_none() {
                    self.val[j] = 0.0;
                }
            }
        }
        self.cost = vec![0.0; self.ncol];
        self.cost[..n].copy_from_slice(&p.objective);
        let mut refactors = 0;
        loop {
            self.price();
            match self.iterate(opts) {
                Outcome::Interrupted => return self.finish(p, LpStatus::Interrupted),
                Outcome::Unbounded => return self.finish(p, LpStatus::Unbounded),
                Outcome::Optimal => {}
            }
            if refactors >= MAX_REFACTOR || self.residual(p) <= 1e-9 * (1.0 + self.scale()) {
                break;
            }
            refactors += 1;
            if !self.refactor(p) {
                break;
            }
        }
        self.price();
        self.finish(p, LpStatus::Optimal)
    }

    fn value(&self, j: usize) -> f64 {
        match self.pos[j] {
            Some(r) => self.beta[r],
            None => self.val[j],
        }
    }

    fn scale(&self) -> f64 {
        self.beta.iter().fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// Recomputes reduced costs `d_j = c_j − c_Bᵀ T_j` from the tableau.
    fn price(&mut self) {
        let ncol = self.ncol;
        self.d.copy_from_slice(&self.cost);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * ncol..(r + 1) * ncol];
                for (dj, tj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn iterate(&mut self, opts: &LpOptions) -> Outcome {
        let ncol = self.ncol;
        let mut degenerate = 0usize;
        loop {
            if let Some(limit) = opts.max_iterations {
                if self.iterations >= limit {
                    return Outcome::Interrupted;
                }
            }
            if let Some(dl) = opts.deadline {
                if self.iterations.is_multiple_of(16) && Instant::now() >= dl {
                    return Outcome::Interrupted;
                }
            }
            let bland = degenerate >= DEGENERATE_SWITCH;

            let mut enter: Option<usize> = None;
            let mut best = 0.0;
            for j in 0..ncol {
                if self.pos[j].is_some() || self.hi[j] - self.lo[j] <= PIVOT_TOL {
                    continue;
                }
                let dj = self.d[j];
                let at_lower = self.val[j] <= self.lo[j];
                let score = if at_lower && dj > OPT_TOL {
                    dj
                } else if !at_lower && dj < -OPT_TOL {
                    -dj
                } else {
                    continue;
                };
                if bland {
                    enter = Some(j);
                    break;
                }
                if score > best {
                    best = score;
                    enter = Some(j);
                }
            }
            let Some(q) = enter else { return Outcome::Optimal };
            let dir = if self.val[q] <= self.lo[q] { 1.0 } else { -1.0 };

            let mut step = self.hi[q] - self.lo[q];
            let mut leave: Option<usize> = None;
            let mut leave_alpha = 0.0f64;
            for r in 0..self.m {
                let a = self.t[r * ncol + q] * dir;
                let b = self.basis[r];
                let lim = if a > PIVOT_TOL {
                    (self.beta[r] - self.lo[b]) / a
                } else if a < -PIVOT_TOL && self.hi[b].is_finite() {
                    (self.hi[b] - self.beta[r]) / -a
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                let better = if lim < step - 1e-12 {
                    true
                } else if lim <= step + 1e-12 {
                    // Ties: stable pivot normally, lowest index under Bland.
                    match leave {
                        Some(l) if bland => b < self.basis[l],
                        Some(_) => a.abs() > leave_alpha,
                        None => false,
                    }
                } else {
                    false
                };
                if better {
                    step = lim;
                    leave = Some(r);
                    leave_alpha = a.abs();
                }
            }
            if !step.is_finite() {
                return Outcome::Unbounded;
            }
            self.iterations += 1;
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            if step > 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * ncol + q];
                    if a != 0.0 {
                        self.beta[r] -= dir * step * a;
                    }
                }
            }
            match leave {
                None => {
                    self.val[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some(p) => {
                    let out = self.basis[p];
                    let a = self.t[p * ncol + q] * dir;
                    self.val[out] = if a > 0.0 { self.lo[out] } else { self.hi[out] };
                    let entered = self.val[q] + dir * step;
                    self.pivot(p, q);
                    self.beta[p] = entered;
                }
            }
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.t[p * ncol + q];
        {
            let row = &mut self.t[p * ncol..(p + 1) * ncol];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let prow: Vec<f64> = self.t[p * ncol..(p + 1) * ncol].to_vec();
        let nz: Vec<usize> = (0..ncol).filter(|&j| prow[j] != 0.0).collect();
        for r in 0..self.m {
            if r == p {
                continue;
            }
            let f = self.t[r * ncol + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[r * ncol..(r + 1) * ncol];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[q] = 0.0;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in &nz {
                self.d[j] -= dq * prow[j];
            }
            self.d[q] = 0.0;
        }
        let out = self.basis[p];
        self.pos[out] = None;
        self.pos[q] = Some(p);
        self.basis[p] = q;
    }

    fn original_column(&self, p: &LpProblem, j: usize, r: usize) -> f64 {
        let (n, m) = (self.n, self.m);
        if j < n {
            p.rows[r][j]
        } else if j < n + m {
            if j - n == r { 1.0 } else { 0.0 }
        } else if self.art_row[j - n - m] == r {
            -1.0
        } else {
            0.0
        }
    }

    /// Max absolute residual of `Ax + s − Ea − b` at the current point.
    fn residual(&self, p: &LpProblem) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.m {
            let mut lhs = 0.0;
            for j in 0..self.ncol {
                let c = self.original_column(p, j, r);
                if c != 0.0 {
                    lhs += c * self.value(j);
                }
            }
            worst = worst.max((lhs - p.rhs[r]).abs());
        }
        worst
    }

    /// Rebuilds the tableau and basic values from the original data.
    fn refactor(&mut self, p: &LpProblem) -> bool {
        let (m, ncol) = (self.m, self.ncol);
        let mut a = vec![0.0; m * ncol];
        let mut rhs = p.rhs.clone();
        for r in 0..m {
            for j in 0..ncol {
                let c = self.original_column(p, j, r);
                a[r * ncol + j] = c;
                if c != 0.0 && self.pos[j].is_none() {
                    rhs[r] -= c * self.val[j];
                }
            }
        }
        let cols = self.basis.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &q in &cols {
            let mut best = None;
            let mut mag = PIVOT_TOL;
            for r in 0..m {
                if !assigned[r] && a[r * ncol + q].abs() > mag {
                    mag = a[r * ncol + q].abs();
                    best = Some(r);
                }
            }
            let Some(pr) = best else { return false };
            assigned[pr] = true;
            new_basis[pr] = q;
            let piv = a[pr * ncol + q];
            for j in 0..ncol {
                a[pr * ncol + j] /= piv;
            }
            rhs[pr] /= piv;
            for r in 0..m {
                if r == pr {
                    continue;
                }
                let f = a[r * ncol + q];
                if f != 0.0 {
                    for j in 0..ncol {
                        a[r * ncol + j] -= f * a[pr * ncol + j];
                    }
                    rhs[r] -= f * rhs[pr];
                }
            }
        }
        self.t = a;
        self.beta = rhs;
        self.basis = new_basis;
        self.pos = vec![None; ncol];
        for (r, &b) in self.basis.iter().enumerate() {
            self.pos[b] = Some(r);
        }
        true
    }

    fn finish(&self, p: &LpProblem, status: LpStatus) -> LpSolution {
        let n = self.n;
        let x: Vec<f64> = (0..n)
            .map(|j| self.value(j).clamp(self.lo[j], self.hi[j]))
            .collect();
        let objective = dot(&p.objective, &x);
        let (duals, reduced_costs) = if status == LpStatus::Optimal {
            let duals = (0..self.m).map(|r| -self.d[n + r]).collect();
            (duals, self.d[..n].to_vec())
        } else {
            (vec![0.0; self.m], vec![0.0; n])
        };
        LpSolution { status, x, duals, reduced_costs, objective, iterations: self.iterations }
    }
}
