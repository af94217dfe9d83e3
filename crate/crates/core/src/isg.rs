//! Integer set generation: tightened lower bounds `ȳ` around an LP point.
//!
//! Starting from `ȳ = ⌊ŷ⌋`, each ordered axis pair `(i, j)` and binding row
//! `k` is examined. When the room left along axis `j` is under one unit, a
//! coordinate of `ȳ` is lowered; otherwise `ȳ_i` jumps down to the nearest
//! value whose 2-D projection admits a new integer `y_j`. Cuts generated over
//! `{y ∈ F : y ≥ ȳ}` then need far fewer integer points.

use serde::Serialize;

pub const BINDING_TOL: f64 = 1e-6;
const SNAP: f64 = 1e-9;

fn floor(v: f64) -> f64 {
    (v + SNAP).floor()
}

#[derive(Clone, Debug)]
pub struct IsgInput<'a> {
    pub w: &'a [Vec<f64>],
    pub tau: &'a [f64],
    pub u: &'a [i64],
    pub y_hat: &'a [f64],
    pub binding_tol: f64,
}

impl<'a> IsgInput<'a> {
    pub fn new(w: &'a [Vec<f64>], tau: &'a [f64], u: &'a [i64], y_hat: &'a [f64]) -> Self {
        IsgInput { w, tau, u, y_hat, binding_tol: BINDING_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IsgAction {
    /// `ȳ_i` lowered by one.
    LowerI,
    /// `ȳ_j` lowered by one (`ȳ_i` already zero).
    LowerJ,
    /// `ȳ_i` lowered by `b` to expose a new integer point.
    Jump(i64),
    /// Nothing changed; the pair/row is finished.
    Stop,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub d: f64,
    pub action: IsgAction,
    /// `ȳ` after the action.
    pub y_bar: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsgResult {
    pub y_bar: Vec<i64>,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
}

/// Rows with `τ_k − (Wŷ)_k ≤ tol`.
pub fn binding_rows(w: &[Vec<f64>], tau: &[f64], y_hat: &[f64], tol: f64) -> Vec<usize> {
    (0..w.len())
        .filter(|&k| tau[k] - w[k].iter().zip(y_hat).map(|(a, b)| a * b).sum::<f64>() <= tol)
        .collect()
}

/// Position along axis `j` where row `k` is met when `y_i = yi` and every
/// other coordinate sits at `ŷ`.
fn crossing(inp: &IsgInput, i: usize, j: usize, k: usize, yi: f64) -> f64 {
    let row = &inp.w[k];
    if row[j] <= 0.0 {
        return f64::INFINITY;
    }
    let rest: f64 = (0..row.len()).filter(|&t| t != i && t != j).map(|t| row[t] * inp.y_hat[t]).sum();
    (inp.tau[k] - rest - row[i] * yi) / row[j]
}

/// Room left along axis `j` from `ȳ` before row `k` or the bound `u_j`.
pub fn distance_dij(inp: &IsgInput, i: usize, j: usize, k: usize, y_bar: &[i64]) -> f64 {
    let to_row = crossing(inp, i, j, k, y_bar[i] as f64) - y_bar[j] as f64;
    to_row.min((inp.u[j] - y_bar[j]) as f64)
}

/// `(f, f')` with `f_i = min_{j≠i,k} d_ij` and `f'_i = min_{j≠i,k} d_ji`.
pub fn shortest_distances(inp: &IsgInput, y_bar: &[i64]) -> (Vec<f64>, Vec<f64>) {
    let n = y_bar.len();
    let mut f = vec![f64::INFINITY; n];
    let mut g = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in 0..inp.w.len() {
                f[i] = f[i].min(distance_dij(inp, i, j, k, y_bar));
                g[i] = g[i].min(distance_dij(inp, j, i, k, y_bar));
            }
        }
    }
    (f, g)
}

/// Largest integer `y_j` reachable in the `(i, j)` projection at `y_i = yi`,
/// capped at `u_j`. All rows count, since an integer point must satisfy all.
fn top_integer(inp: &IsgInput, i: usize, j: usize, yi: f64) -> f64 {
    let reach = (0..inp.w.len()).map(|k| crossing(inp, i, j, k, yi)).fold(f64::INFINITY, f64::min);
    floor(reach).min(inp.u[j] as f64)
}

pub fn run_isg(inp: &IsgInput) -> IsgResult {
    run_isg_with(inp, true)
}

/// With `check_integer_points = false` only the unit-step lowering runs,
/// which is useful to see how much the jump step contributes.
pub fn run_isg_with(inp: &IsgInput, check_integer_points: bool) -> IsgResult {
    let n = inp.y_hat.len();
    let mut y_bar: Vec<i64> = inp.y_hat.iter().map(|&v| floor(v).max(0.0) as i64).collect();
    let rows = binding_rows(inp.w, inp.tau, inp.y_hat, inp.binding_tol);
    let mut trace = Vec::new();
    let mut iterations = 0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for &k in &rows {
                loop {
                    iterations += 1;
                    let d = distance_dij(inp, i, j, k, &y_bar);
                    let mut action = IsgAction::Stop;
                    if d < 1.0 - SNAP && y_bar[i] >= 1 {
                        y_bar[i] -= 1;
                        action = IsgAction::LowerI;
                    } else if d < 1.0 - SNAP && y_bar[j] >= 1 {
                        y_bar[j] -= 1;
                        action = IsgAction::LowerJ;
                    } else if check_integer_points {
                        let here = top_integer(inp, i, j, y_bar[i] as f64);
                        if let Some(b) = (1..=y_bar[i]).find(|&b| top_integer(inp, i, j, (y_bar[i] - b) as f64) > here) {
                            y_bar[i] -= b;
                            action = IsgAction::Jump(b);
                        }
                    }
                    trace.push(TraceEntry { i, j, k, d, action, y_bar: y_bar.clone() });
                    if action == IsgAction::Stop {
                        break;
                    }
                }
            }
        }
    }
    IsgResult { y_bar, trace, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip1() -> (Vec<Vec<f64>>, Vec<f64>, Vec<i64>) {
        (vec![vec![0.4, 1.0]], vec![3.4], vec![3, 3])
    }

    #[test]
    fn binding_rows_examples() {
        let (w, tau, _) = ip1();
        assert_eq!(binding_rows(&w, &tau, &[3.0, 2.2], BINDING_TOL), vec![0]);
        assert!(binding_rows(&w, &tau, &[1.0, 1.0], BINDING_TOL).is_empty());
        let w2 = vec![vec![0.4, 1.0], vec![1.0, 0.4]];
        let v = 3.4 / 1.4;
        assert_eq!(binding_rows(&w2, &[3.4, 3.4], &[v, v], BINDING_TOL), vec![0, 1]);
    }

    #[test]
    fn distances_on_first_example() {
        let (w, tau, u) = ip1();
        let y_hat = [3.0, 2.2];
        let inp = IsgInput::new(&w, &tau, &u, &y_hat);
        assert!((distance_dij(&inp, 0, 1, 0, &[3, 2]) - 0.2).abs() < 1e-12);
        assert!((distance_dij(&inp, 0, 1, 0, &[1, 2]) - 1.0).abs() < 1e-12);
        let (f, _) = shortest_distances(&inp, &[3, 2]);
        assert!((f[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn distance_on_second_example() {
        let w = vec![vec![0.4, 1.0], vec![1.0, 0.4]];
        let tau = [3.4, 3.4];
        let u = [3, 3];
        let v = 3.4 / 1.4;
        let y_hat = [v, v];
        let inp = IsgInput::new(&w, &tau, &u, &y_hat);
        assert!((distance_dij(&inp, 1, 0, 0, &[1, 2]) - 2.0).abs() < 1e-12);
        let (f, g) = shortest_distances(&inp, &[2, 2]);
        assert_eq!(f[0], f[1]);
        assert_eq!(g[0], g[1]);
    }

    #[test]
    fn slack_rows_fall_back_to_bounds() {
        let w = vec![vec![1.0, 1.0]];
        let tau = [100.0];
        let u = [4, 5];
        let y_hat = [1.5, 2.5];
        let inp = IsgInput::new(&w, &tau, &u, &y_hat);
        let (f, _) = shortest_distances(&inp, &[1, 2]);
        assert_eq!(f, vec![3.0, 3.0]);
    }

    #[test]
    fn single_axis_has_no_cross_distance() {
        let w = vec![vec![2.0]];
        let inp = IsgInput::new(&w, &[3.0], &[3], &[1.5]);
        let (f, g) = shortest_distances(&inp, &[1]);
        assert!(f[0].is_infinite() && g[0].is_infinite());
        assert_eq!(run_isg(&inp).y_bar, vec![1]);
    }

    #[test]
    fn first_example_bounds() {
        let (w, tau, u) = ip1();
        let y_hat = [3.0, 2.2];
        let r = run_isg(&IsgInput::new(&w, &tau, &u, &y_hat));
        assert_eq!(r.y_bar, vec![1, 2]);
        assert_eq!(r.trace[0].action, IsgAction::LowerI);
    }

    #[test]
    fn interior_point_keeps_floor() {
        let (w, tau, u) = ip1();
        let y_hat = [1.5, 1.5];
        assert_eq!(run_isg(&IsgInput::new(&w, &tau, &u, &y_hat)).y_bar, vec![1, 1]);
    }
}
