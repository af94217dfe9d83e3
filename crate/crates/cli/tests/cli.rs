use std::path::PathBuf;
use std::process::{Command, Output};

use fendec::gen::toy;
use fendec::mip::enumerate_oracle;
use fendec::model::{build_dep, write_instance};

fn fendec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fendec")).args(args).env_remove("FENDEC_SEED").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fendec-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_writes_one_file_per_replication() {
    let dir = scratch("gen");
    let out = dir.join("a");
    let o = fendec(&["gen", "--n1", "10", "--n2", "20", "--m2", "20", "--scens", "50", "--reps", "5", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let mut names: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["a", "b", "c", "d", "e"].map(|r| format!("k.10.20.50{r}.sipx")));

    let again = dir.join("b");
    fendec(&["gen", "--n1", "10", "--n2", "20", "--m2", "20", "--scens", "50", "--reps", "5", "--seed", "7", "--out", again.to_str().unwrap()]);
    for n in &names {
        assert_eq!(std::fs::read(out.join(n)).unwrap(), std::fs::read(again.join(n)).unwrap());
    }
}

#[test]
fn gen_without_scenarios_is_a_usage_error() {
    assert_eq!(fendec(&["gen", "--n1", "3", "--n2", "2", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = scratch("env");
    let o = Command::new(env!("CARGO_BIN_EXE_fendec"))
        .args(["gen", "--n1", "3", "--n2", "2", "--scens", "2", "--out", dir.to_str().unwrap()])
        .env("FENDEC_SEED", "5")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("k.3.2.2a.sipx").exists());
}

#[test]
fn solve_reaches_the_enumerated_optimum() {
    let dir = scratch("solve");
    let inst = toy(11, 3);
    let path = dir.join("toy.sipx");
    write_instance(&inst, &path).unwrap();
    let best = enumerate_oracle(&build_dep(&inst).unwrap().mip).unwrap().best.unwrap();
    let csv = dir.join("out.csv");
    for _ in 0..2 {
        let o = fendec(&["solve", path.to_str().unwrap(), "--alg", "sfd-r", "--eps", "1e-6", "--csv", csv.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "header written once");
    assert_eq!(lines[0], "instance,algorithm,scens,mips_solved,fenchel_cuts,lb,ub,gap_pct,iterations,wall_s,seed");
    let f: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(f[1], "SFD-R");
    let lb: f64 = f[5].parse().unwrap();
    let gap: f64 = f[7].parse().unwrap();
    assert!(gap <= 1e-4);
    assert!((lb - best).abs() <= 1e-6 * best.abs().max(1.0), "{lb} vs {best}");
}

#[test]
fn tiny_budget_still_reports() {
    let dir = scratch("tiny");
    let gen = fendec(&["gen", "--n1", "10", "--n2", "20", "--scens", "50", "--seed", "3", "--out", dir.to_str().unwrap()]);
    assert!(gen.status.success());
    let path = dir.join("k.10.20.50a.sipx");
    let o = fendec(&["solve", path.to_str().unwrap(), "--alg", "sfd", "--budget", "0.001"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert_eq!(row.split(',').count(), 11);
    assert!(row.starts_with("k.10.20.50a,SFD,50,"));
}

#[test]
fn unreadable_instance_exits_with_io_code() {
    let o = fendec(&["solve", "/nonexistent/x.sipx"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn isg_demo_reports_each_example() {
    let o = fendec(&["isg-demo"]);
    let text = stdout(&o);
    assert!(text.contains("PASS IP1: y_bar = [1, 2]"));
    // IP2 and IP3 do not reproduce their reference bounds with this ISG,
    // so the self-check fails.
    assert!(text.contains("FAIL IP2: y_bar = [1, 1]"));
    assert!(text.contains("FAIL IP3: y_bar = [2, 1]"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn isg_demo_json_is_machine_readable() {
    let o = fendec(&["isg-demo", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0]["y_bar"], serde_json::json!([1, 2]));
    assert!(items[0]["trace"].as_array().unwrap().len() > 1);
}

#[test]
fn bench_is_reproducible_under_iteration_budgets() {
    let dir = scratch("bench");
    let run = |name: &str| {
        let csv = dir.join(name);
        let o = fendec(&[
            "bench", "--n1", "5", "--n2", "6", "--scens", "4", "--reps", "2", "--seed", "9", "--budget-iters", "4", "--jobs", "2", "--csv",
            csv.to_str().unwrap(), "--plots", dir.join("plots").to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(csv).unwrap();
        // Drop wall_s, the only column allowed to differ.
        text.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(9);
                f.join(",")
            })
            .collect::<Vec<_>>()
    };
    let a = run("a.csv");
    assert_eq!(a.len(), 1 + 6 + 3);
    assert!(a[7..].iter().all(|l| l.starts_with("avg:k.5.6.4,")));
    assert_eq!(a, run("b.csv"));
    for f in ["gap.svg", "mips.svg", "cuts.svg"] {
        assert!(std::fs::read_to_string(dir.join("plots").join(f)).unwrap().starts_with("<svg"));
    }
}

#[test]
fn bench_without_instances_or_family_is_a_usage_error() {
    assert_eq!(fendec(&["bench", "--csv", "/tmp/never.csv"]).status.code(), Some(2));
}
