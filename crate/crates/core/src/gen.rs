//! Seeded two-stage multidimensional knapsack instances.
//!
//! First stage: one cardinality row `Σx ≤ ⌈n1/2⌉` plus `m1 − 1` knapsack
//! rows over `x`. Second stage: the first `⌈m2/2⌉` rows couple to `x`
//! (`Σ w y ≤ Σ m·t_i x_i`, written with `h = 0`, `T = −m·t`); the rest are
//! knapsack rows with `h ~ U(2 + 2·W_max·v_ub, 4·W_max·v_ub)`.
//!
//! Randomness comes from ChaCha8 with one stream per `(kind, scenario, row)`,
//! so adding scenarios or rows never perturbs earlier draws. A uniform draw
//! is `a + (b − a)·(next_u64 >> 11)·2⁻⁵³`; a coin is the top bit of
//! `next_u64`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{FirstStage, Scenario, TwoStageInstance};

const COST: u8 = 0;
const FIRST_ROW: u8 = 1;
const RECOURSE_ROW: u8 = 2;
const SCEN_COST: u8 = 3;
const SCEN_ROW: u8 = 4;
const SUBPROBLEM: u8 = 5;
const TOY: u8 = 6;

pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, kind: u8, scenario: u32, row: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((kind as u64) << 56) | ((scenario as u64) << 24) | row as u64);
        Stream(rng)
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.unit()
    }

    pub fn coin(&mut self) -> bool {
        self.0.next_u64() >> 63 == 1
    }

    /// Integer in `lo..=hi` (modulo draw; the bias is negligible here).
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as i64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GenConfig {
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
    pub scenarios: usize,
    pub v_ub: i64,
    pub m_const: f64,
    pub seed: u64,
    pub rep: char,
}

impl GenConfig {
    /// The `k.n1.n2.S` family with ten first-stage rows and `m2 = n2`.
    pub fn knapsack(n1: usize, n2: usize, scenarios: usize, seed: u64, rep: char) -> Self {
        GenConfig { n1, n2, m1: 10, m2: n2, scenarios, v_ub: 5, m_const: 10.0, seed, rep }
    }

    pub fn name(&self) -> String {
        format!("k.{}.{}.{}{}", self.n1, self.n2, self.scenarios, self.rep)
    }

    pub fn file_name(&self) -> String {
        format!("{}.sipx", self.name())
    }

    /// Seed for replication `r` (0-based) of a family.
    pub fn replication_seed(seed: u64, r: usize) -> u64 {
        seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

pub fn generate(cfg: &GenConfig) -> TwoStageInstance {
    assert!(cfg.n1 >= 1 && cfg.n2 >= 1 && cfg.m1 >= 1 && cfg.m2 >= 1 && cfg.scenarios >= 1 && cfg.v_ub >= 1);
    let seed = cfg.seed;
    let mut s = Stream::new(seed, COST, 0, 0);
    let c: Vec<f64> = (0..cfg.n1).map(|_| s.uniform(0.0, 1500.0)).collect();

    let mut a = vec![vec![1.0; cfg.n1]];
    let mut b = vec![cfg.n1.div_ceil(2) as f64];
    for r in 1..cfg.m1 {
        let mut s = Stream::new(seed, FIRST_ROW, 0, r as u32);
        let row: Vec<f64> = (0..cfg.n1).map(|_| s.uniform(2.0, 8.0)).collect();
        let wmax = row.iter().cloned().fold(0.0, f64::max);
        b.push(s.uniform(2.0 + 2.0 * wmax, 4.0 * wmax));
        a.push(row);
    }

    let w: Vec<Vec<f64>> = (0..cfg.m2)
        .map(|k| {
            let mut s = Stream::new(seed, RECOURSE_ROW, 0, k as u32);
            (0..cfg.n2).map(|_| s.uniform(2.0, 8.0)).collect()
        })
        .collect();
    let coupling = cfg.m2.div_ceil(2);
    let vub = cfg.v_ub as f64;

    let p = 1.0 / cfg.scenarios as f64;
    let scenarios = (0..cfg.scenarios)
        .map(|sc| {
            let mut s = Stream::new(seed, SCEN_COST, sc as u32, 0);
            let q: Vec<f64> = (0..cfg.n2).map(|_| s.uniform(10.0, 20.0)).collect();
            let mut h = Vec::with_capacity(cfg.m2);
            let mut t = Vec::with_capacity(cfg.m2);
            for k in 0..cfg.m2 {
                let mut s = Stream::new(seed, SCEN_ROW, sc as u32, k as u32);
                if k < coupling {
                    let pick = loop {
                        let pick: Vec<bool> = (0..cfg.n1).map(|_| s.coin()).collect();
                        if pick.iter().any(|&v| v) {
                            break pick;
                        }
                    };
                    h.push(0.0);
                    t.push(pick.iter().map(|&v| if v { -cfg.m_const } else { 0.0 }).collect());
                } else {
                    let wmax = w[k].iter().cloned().fold(0.0, f64::max);
                    h.push(s.uniform(2.0 + 2.0 * wmax * vub, 4.0 * wmax * vub));
                    t.push(vec![0.0; cfg.n1]);
                }
            }
            Scenario { p, q, h, t }
        })
        .collect();

    TwoStageInstance {
        name: cfg.name(),
        first: FirstStage { c, a, b },
        n2: cfg.n2,
        m2: cfg.m2,
        w,
        u: vec![cfg.v_ub; cfg.n2],
        scenarios,
    }
}

/// Small knapsack instance `index` of a toy family: `n1 ∈ 2..=4`,
/// `n2, m2, S, u ∈ 1..=3`, small enough for enumeration of the DEP.
pub fn toy(seed: u64, index: u32) -> TwoStageInstance {
    let mut s = Stream::new(seed, TOY, index, 0);
    let n1 = s.int(2, 4) as usize;
    let n2 = s.int(1, 3) as usize;
    let scenarios = s.int(1, 3) as usize;
    let mut cfg = GenConfig::knapsack(n1, n2, scenarios, s.0.next_u64(), 't');
    cfg.m1 = s.int(1, 2) as usize;
    cfg.m2 = s.int(1, 3) as usize;
    cfg.v_ub = s.int(1, 3);
    let mut inst = generate(&cfg);
    inst.name = format!("toy.{seed}.{index}");
    inst
}

/// A single integer subproblem `max ρᵀy, Wy ≤ τ, 0 ≤ y ≤ u`.
#[derive(Clone, Debug, Serialize)]
pub struct Subproblem {
    pub w: Vec<Vec<f64>>,
    pub tau: Vec<f64>,
    pub u: Vec<i64>,
    pub rho: Vec<f64>,
}

/// Shape of random subproblems for sweeps.
#[derive(Clone, Debug)]
pub struct SubproblemShape {
    pub n: (usize, usize),
    pub m_max: usize,
    pub u_max: i64,
    /// `τ_k = U(lo, hi)·Σ_j w_kj u_j`.
    pub tightness: (f64, f64),
}

impl Default for SubproblemShape {
    fn default() -> Self {
        SubproblemShape { n: (2, 5), m_max: 3, u_max: 6, tightness: (0.25, 0.75) }
    }
}

pub fn random_subproblem(seed: u64, index: u32, shape: &SubproblemShape) -> Subproblem {
    let mut s = Stream::new(seed, SUBPROBLEM, index, 0);
    let n = s.int(shape.n.0 as i64, shape.n.1 as i64) as usize;
    let m = s.int(1, shape.m_max as i64) as usize;
    let u: Vec<i64> = (0..n).map(|_| s.int(1, shape.u_max)).collect();
    let w: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| s.uniform(2.0, 8.0)).collect()).collect();
    let tau = w
        .iter()
        .map(|row| {
            let cap: f64 = row.iter().zip(&u).map(|(a, &b)| a * b as f64).sum();
            s.uniform(shape.tightness.0, shape.tightness.1) * cap
        })
        .collect();
    let rho = (0..n).map(|_| s.uniform(10.0, 20.0)).collect();
    Subproblem { w, tau, u, rho }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_dep, subproblem_data, to_sipx, validate};

    #[test]
    fn table_shape() {
        let i = generate(&GenConfig::knapsack(10, 20, 50, 7, 'a'));
        let d = build_dep(&i).unwrap();
        assert_eq!(d.num_cols(), 1010);
        assert_eq!(d.num_rows(), 1010);
        assert_eq!(i.name, "k.10.20.50a");
        assert!(validate(&i).is_empty());
    }

    #[test]
    fn deterministic_bytes() {
        let cfg = GenConfig::knapsack(4, 6, 5, 99, 'b');
        assert_eq!(to_sipx(&generate(&cfg)), to_sipx(&generate(&cfg)));
    }

    #[test]
    fn adding_scenarios_keeps_earlier_ones() {
        let a = generate(&GenConfig::knapsack(4, 6, 3, 5, 'a'));
        let b = generate(&GenConfig::knapsack(4, 6, 5, 5, 'a'));
        for s in 0..3 {
            assert_eq!(a.scenarios[s].q, b.scenarios[s].q);
            assert_eq!(a.scenarios[s].h, b.scenarios[s].h);
            assert_eq!(a.scenarios[s].t, b.scenarios[s].t);
        }
    }

    #[test]
    fn ranges_hold() {
        let i = generate(&GenConfig::knapsack(10, 20, 10, 3, 'c'));
        assert!(i.w.iter().flatten().all(|&v| (2.0..=8.0).contains(&v)));
        assert!(i.scenarios.iter().flat_map(|s| &s.q).all(|&v| (10.0..=20.0).contains(&v)));
        assert!(i.first.c.iter().all(|&v| (0.0..=1500.0).contains(&v)));
        let ones = vec![1.0; 10];
        for s in 0..10 {
            assert!(subproblem_data(&i, &ones, s).1.iter().all(|&t| t >= 0.0));
        }
    }

    #[test]
    fn toy_shapes_stay_small() {
        for i in 0..50 {
            let t = toy(4, i);
            assert!((2..=4).contains(&t.n1()) && (1..=3).contains(&t.n2) && (1..=3).contains(&t.num_scenarios()));
            assert!(t.u.iter().all(|&u| (1..=3).contains(&u)));
            assert!(validate(&t).is_empty());
        }
    }

    #[test]
    fn uniform_mean() {
        let mut s = Stream::new(1, 9, 0, 0);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| s.uniform(2.0, 8.0)).sum::<f64>() / n as f64;
        // σ of U(2,8) is 6/√12; 3σ/√n of the mean.
        let tol = 3.0 * (6.0 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!((mean - 5.0).abs() < tol, "{mean}");
    }
}
