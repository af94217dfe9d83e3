//! Integer set generation traces for the three worked examples.

use std::process::ExitCode;

use fendec::isg::{run_isg, IsgInput, IsgResult};

use crate::{DemoArgs, EXIT_CHECK};

struct Example {
    name: &'static str,
    w: Vec<Vec<f64>>,
    tau: Vec<f64>,
    u: Vec<i64>,
    y_hat: Vec<f64>,
    expected: [i64; 2],
}

fn examples(ip3_u: Option<i64>) -> Vec<Example> {
    let v = 3.4 / 1.4;
    let u3 = ip3_u.unwrap_or(5);
    vec![
        Example { name: "IP1", w: vec![vec![0.4, 1.0]], tau: vec![3.4], u: vec![3, 3], y_hat: vec![3.0, 2.2], expected: [1, 2] },
        Example {
            name: "IP2",
            w: vec![vec![0.4, 1.0], vec![1.0, 0.4]],
            tau: vec![3.4, 3.4],
            u: vec![3, 3],
            y_hat: vec![v, v],
            expected: [1, 2],
        },
        Example { name: "IP3", w: vec![vec![6.0, 5.0]], tau: vec![37.4], u: vec![u3, u3], y_hat: vec![5.0, 1.48], expected: [2, 0] },
    ]
}

fn print_trace(e: &Example, r: &IsgResult) {
    println!("{}: y_hat = {:?}", e.name, e.y_hat);
    println!("  {:>2} {:>2} {:>2} {:>10}  {:<8} y_bar", "i", "j", "k", "d", "action");
    for t in &r.trace {
        println!("  {:>2} {:>2} {:>2} {:>10.4}  {:<8} {:?}", t.i + 1, t.j + 1, t.k + 1, t.d, format!("{:?}", t.action), t.y_bar);
    }
}

pub fn run(a: &DemoArgs) -> ExitCode {
    let mut all_ok = true;
    let mut json = Vec::new();
    for e in examples(a.ip3_u) {
        let r = run_isg(&IsgInput::new(&e.w, &e.tau, &e.u, &e.y_hat));
        let ok = r.y_bar == e.expected;
        all_ok &= ok;
        if a.json {
            json.push(serde_json::json!({
                "example": e.name,
                "y_hat": e.y_hat,
                "expected": e.expected,
                "y_bar": r.y_bar,
                "pass": ok,
                "trace": r.trace,
            }));
        } else {
            print_trace(&e, &r);
            println!("{} {}: y_bar = {:?}, reference {:?}\n", if ok { "PASS" } else { "FAIL" }, e.name, r.y_bar, e.expected);
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&json).expect("trace serializes"));
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}
