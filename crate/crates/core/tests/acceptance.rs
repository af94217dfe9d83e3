//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N PASS|FAIL` line to stderr (bypassing output capture) and
//! then asserts the verdict.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fendec::fcg::{check_sandwich, generate_cut, FcgConfig, FcgStop, IntegerSet};
use fendec::gen::{generate, random_subproblem, toy, GenConfig, Stream, SubproblemShape};
use fendec::isg::{run_isg, run_isg_with, IsgInput};
use fendec::lp::{self, LpProblem};
use fendec::mip::{enumerate_oracle, solve_mip, MipProblem, MipStatus};
use fendec::model::build_dep;
use fendec::sfd::{solve, sfd_solve, Algorithm, SfdConfig, SolveReport};

const SEED: u64 = 2024;

const SWEEP_SIZE: u32 = 500;
const VALIDITY_TOL: f64 = 1e-7;
const SEPARATION_TOL: f64 = 1e-6;

const TOYS: u32 = 50;
const DEP_REL_TOL: f64 = 1e-6;
const ARMS_REL_TOL: f64 = 1e-9;

const BENCH_INSTANCES: usize = 5;
const ARM_BUDGET: Duration = Duration::from_secs(60);
const EPS: f64 = 1e-6;

const LP_TOL: f64 = 1e-6;
const RANDOM_IPS: u32 = 200;
const DUALITY_TOL: f64 = 1e-6;

const SANDWICH_EPS: f64 = 1e-6;

fn verdict(id: u32, ok: bool, detail: &str) {
    let line = format!("criterion {id} {}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn isg(w: &[Vec<f64>], tau: &[f64], u: &[i64], y_hat: &[f64], jump: bool) -> Vec<i64> {
    run_isg_with(&IsgInput::new(w, tau, u, y_hat), jump).y_bar
}

fn lp_of(w: &[Vec<f64>], tau: &[f64], u: &[i64], obj: &[f64]) -> LpProblem {
    let mut p = LpProblem::new(obj.to_vec(), vec![0.0; u.len()], u.iter().map(|&v| v as f64).collect());
    for (r, &t) in w.iter().zip(tau) {
        p.add_row(r.clone(), t);
    }
    p
}

fn ip1() -> (Vec<Vec<f64>>, Vec<f64>, Vec<i64>) {
    (vec![vec![0.4, 1.0]], vec![3.4], vec![3, 3])
}

fn ip2() -> (Vec<Vec<f64>>, Vec<f64>, Vec<i64>) {
    (vec![vec![0.4, 1.0], vec![1.0, 0.4]], vec![3.4, 3.4], vec![3, 3])
}

fn ip3() -> (Vec<Vec<f64>>, Vec<f64>, Vec<i64>) {
    (vec![vec![6.0, 5.0]], vec![37.4], vec![5, 5])
}

#[test]
fn criterion_1_isg_worked_examples() {
    let start = Instant::now();
    let (w, t, u) = ip1();
    let a = isg(&w, &t, &u, &[3.0, 2.2], true);
    let (w, t, u) = ip2();
    let v = 3.4 / 1.4;
    let b = isg(&w, &t, &u, &[v, v], true);
    let (w, t, u) = ip3();
    let c_ref = isg(&w, &t, &u, &[5.0, 1.48], false);
    let c = isg(&w, &t, &u, &[5.0, 1.48], true);
    let secs = start.elapsed().as_secs_f64();
    let ok = a == [1, 2] && b == [1, 2] && c_ref == [4, 0] && c == [2, 0] && secs < 1.0;
    verdict(
        1,
        ok,
        &format!("IP1 {a:?} (want [1, 2]); IP2 {b:?} (want [1, 2]); IP3 unit steps {c_ref:?} (want [4, 0]), final {c:?} (want [2, 0]); {secs:.3}s"),
    );
}

struct SweepResult {
    fractional: usize,
    violations: usize,
    no_cut: usize,
    trajectories: Vec<(Vec<(f64, f64)>, FcgStop)>,
    secs: f64,
}

fn sweep() -> &'static SweepResult {
    static CELL: OnceLock<SweepResult> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let cfg = FcgConfig::default();
        let mut r = SweepResult { fractional: 0, violations: 0, no_cut: 0, trajectories: Vec::new(), secs: 0.0 };
        for i in 0..SWEEP_SIZE {
            let sp = random_subproblem(SEED, i, &SubproblemShape::default());
            let y_hat = lp::solve(&lp_of(&sp.w, &sp.tau, &sp.u, &sp.rho)).x;
            if y_hat.iter().all(|v| (v - v.round()).abs() <= 1e-6) {
                continue;
            }
            r.fractional += 1;
            let y_bar = run_isg(&IsgInput::new(&sp.w, &sp.tau, &sp.u, &y_hat)).y_bar;
            let out = generate_cut(&y_hat, &IntegerSet::reduced(&sp.w, &sp.tau, &sp.u, &y_bar), &cfg);
            r.trajectories.push((out.trajectory.clone(), out.stop));
            let Some(cut) = out.cut else {
                r.no_cut += 1;
                continue;
            };
            let full = enumerate_oracle(&IntegerSet::full(&sp.w, &sp.tau, &sp.u).problem(&sp.rho)).unwrap();
            let dot = |y: &[f64]| cut.beta.iter().zip(y).map(|(b, v)| b * v).sum::<f64>();
            let invalid = full.points.iter().any(|p| {
                let y: Vec<f64> = p.iter().map(|&v| v as f64).collect();
                dot(&y) > cut.g + VALIDITY_TOL
            });
            if invalid || dot(&y_hat) - cut.g <= SEPARATION_TOL {
                r.violations += 1;
            }
        }
        r.secs = start.elapsed().as_secs_f64();
        r
    })
}

#[test]
fn criterion_2_cut_validity_sweep() {
    let r = sweep();
    let ok = r.violations == 0 && r.no_cut == 0 && r.secs < 60.0;
    verdict(
        2,
        ok,
        &format!(
            "seed {SEED}, {SWEEP_SIZE} subproblems, {} fractional; {} invalid or non-separating cuts, {} without a cut; {:.1}s",
            r.fractional, r.violations, r.no_cut, r.secs
        ),
    );
}

#[test]
fn criterion_3_integer_point_check_is_needed() {
    let (w, t, u) = ip3();
    let y_hat = [5.0, 1.48];
    let out = generate_cut(&y_hat, &IntegerSet::reduced(&w, &t, &u, &[4, 0]), &FcgConfig::default());
    let (ok, detail) = match out.cut {
        Some(c) => {
            let lhs = 2.0 * c.beta[0] + 5.0 * c.beta[1];
            (lhs > c.g + VALIDITY_TOL, format!("cut {:?}·y ≤ {:.4}; at (2,5) lhs {lhs:.4}", c.beta, c.g))
        }
        None => (false, "no cut generated".to_string()),
    };
    verdict(3, ok, &detail);
}

#[test]
fn criterion_4_end_to_end_on_toys() {
    let start = Instant::now();
    let mut bad = Vec::new();
    for i in 0..TOYS {
        let inst = toy(SEED, i);
        let best = enumerate_oracle(&build_dep(&inst).unwrap().mip).unwrap().best.unwrap();
        let a = sfd_solve(&inst, &SfdConfig { reduction: false, ..Default::default() }).unwrap().report.lb;
        let b = sfd_solve(&inst, &SfdConfig { reduction: true, ..Default::default() }).unwrap().report.lb;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        if rel(a, best) > DEP_REL_TOL || rel(b, best) > DEP_REL_TOL || rel(a, b) > ARMS_REL_TOL {
            bad.push(format!("{}: DEP {best}, SFD {a}, SFD-R {b}", inst.name));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(4, bad.is_empty() && secs < 120.0, &format!("{TOYS} toys, mismatches {bad:?}; {secs:.1}s"));
}

fn bench() -> &'static Vec<[SolveReport; 3]> {
    static CELL: OnceLock<Vec<[SolveReport; 3]>> = OnceLock::new();
    CELL.get_or_init(|| {
        (0..BENCH_INSTANCES)
            .map(|r| {
                let rep = (b'a' + r as u8) as char;
                let inst = generate(&GenConfig::knapsack(10, 20, 50, GenConfig::replication_seed(SEED, r), rep));
                [Algorithm::Sfd, Algorithm::SfdR, Algorithm::Direct].map(|a| solve(&inst, a, EPS, Some(ARM_BUDGET), None).unwrap())
            })
            .collect()
    })
}

#[test]
fn criterion_5_directional_benchmark() {
    let runs = bench();
    let more_cuts = runs.iter().filter(|[s, r, _]| r.fenchel_cuts >= s.fenchel_cuts).count();
    let mean = |k: usize| runs.iter().map(|a| a[k].gap_pct).sum::<f64>() / runs.len() as f64;
    let (g_sfd, g_sfdr, g_direct) = (mean(0), mean(1), mean(2));
    let rows: Vec<String> = runs
        .iter()
        .map(|[s, r, d]| {
            format!(
                "{} cuts {}/{} gaps {:.4}/{:.4}/{:.4}",
                s.instance, s.fenchel_cuts, r.fenchel_cuts, s.gap_pct, r.gap_pct, d.gap_pct
            )
        })
        .collect();
    let ok = more_cuts >= 4 && g_sfdr <= g_sfd && g_sfd <= g_direct;
    verdict(
        5,
        ok,
        &format!(
            "SFD-R cuts ≥ SFD on {more_cuts}/{BENCH_INSTANCES}; mean gap SFD-R {g_sfdr:.4} SFD {g_sfd:.4} DIRECT {g_direct:.4}; [{}]",
            rows.join("; ")
        ),
    );
}

#[test]
fn criterion_6_solver_oracles() {
    let start = Instant::now();
    let mut problems = Vec::new();
    let (w, t, u) = ip1();
    let s1 = lp::solve(&lp_of(&w, &t, &u, &[1.0, 1.0]));
    if (s1.x[0] - 3.0).abs() > LP_TOL || (s1.x[1] - 2.2).abs() > LP_TOL {
        problems.push(format!("first example LP gave {:?}", s1.x));
    }
    let (w, t, u) = ip2();
    let s2 = lp::solve(&lp_of(&w, &t, &u, &[1.0, 1.0]));
    let v = 3.4 / 1.4;
    if s2.x.iter().any(|x| (x - v).abs() > LP_TOL) {
        problems.push(format!("second example LP gave {:?}", s2.x));
    }
    let mut worst_duality: f64 = 0.0;
    for (p, s) in [(lp_of(&ip1().0, &ip1().1, &ip1().2, &[1.0, 1.0]), &s1), (lp_of(&ip2().0, &ip2().1, &ip2().2, &[1.0, 1.0]), &s2)] {
        worst_duality = worst_duality.max((s.objective - s.dual_objective(&p)).abs());
    }
    let mut mismatches = 0;
    for i in 0..RANDOM_IPS {
        let mut s = Stream::new(SEED, 200, i, 0);
        let n = s.int(1, 6) as usize;
        let m = s.int(0, 4) as usize;
        let c: Vec<f64> = (0..n).map(|_| s.int(-3, 9) as f64).collect();
        let ub: Vec<f64> = (0..n).map(|_| s.int(1, 6) as f64).collect();
        let mut p = LpProblem::new(c, vec![0.0; n], ub);
        for _ in 0..m {
            let row = (0..n).map(|_| s.uniform(-2.0, 8.0)).collect();
            p.add_row(row, s.uniform(0.0, 30.0));
        }
        let relax = lp::solve(&p);
        if relax.is_optimal() {
            worst_duality = worst_duality.max((relax.objective - relax.dual_objective(&p)).abs());
        }
        let ip = MipProblem::pure_integer(p);
        let e = enumerate_oracle(&ip).unwrap();
        let b = solve_mip(&ip);
        let same = match e.best {
            None => b.status == MipStatus::Infeasible,
            Some(v) => b.status == MipStatus::Optimal && b.objective == v,
        };
        mismatches += usize::from(!same);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = problems.is_empty() && mismatches == 0 && worst_duality <= DUALITY_TOL && secs < 30.0;
    verdict(
        6,
        ok,
        &format!("{problems:?}; B&B mismatches {mismatches}/{RANDOM_IPS}; worst duality residual {worst_duality:.2e}; {secs:.1}s"),
    );
}

#[test]
fn criterion_7_fcg_bound_sandwich() {
    let sweep_bad = sweep().trajectories.iter().filter(|(t, stop)| !check_sandwich(t, *stop, SANDWICH_EPS)).count();
    let runs = bench();
    let bench_runs: usize = runs.iter().flat_map(|a| a.iter()).map(|r| r.fcg_runs).sum();
    let bench_bad: usize = runs.iter().flat_map(|a| a.iter()).map(|r| r.sandwich_failures).sum();
    verdict(
        7,
        sweep_bad == 0 && bench_bad == 0,
        &format!(
            "sweep: {sweep_bad}/{} trajectories broken; benchmark: {bench_bad}/{bench_runs} broken",
            sweep().trajectories.len()
        ),
    );
}
