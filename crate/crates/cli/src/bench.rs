//! Benchmark grid, CSV output, averages and SVG charts.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use fendec::gen::{generate, GenConfig};
use fendec::model::{read_instance, TwoStageInstance};
use fendec::sfd::{self, Algorithm, SolveReport};

use crate::{BenchArgs, EXIT_IO, EXIT_USAGE};

pub const CSV_HEADER: &str = "instance,algorithm,scens,mips_solved,fenchel_cuts,lb,ub,gap_pct,iterations,wall_s,seed";

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_row(r: &SolveReport, seed: Option<u64>) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{:.3},{}",
        r.instance,
        r.algorithm.tag(),
        r.scenarios,
        r.mips_solved,
        r.fenchel_cuts,
        num(r.lb),
        num(r.ub),
        num(r.gap_pct),
        r.iterations,
        r.wall_s,
        seed.map(|s| s.to_string()).unwrap_or_default()
    )
}

/// Appends rows, writing the header first when the file is new or empty.
/// An existing file with a different header is refused.
pub fn append_rows(path: &Path, rows: &[String]) -> anyhow::Result<()> {
    let fresh = match std::fs::File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first)?;
            if !first.is_empty() && first.trim_end() != CSV_HEADER {
                bail!("{} has a different header", path.display());
            }
            first.is_empty()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let mut f = OpenOptions::new().create(true).append(true).open(path).with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "{CSV_HEADER}")?;
    }
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

struct Cell {
    instance: usize,
    algorithm: Algorithm,
}

/// Family of an instance name: `k.10.20.50c` → `k.10.20.50`.
fn family(name: &str) -> &str {
    let base = name.trim_end_matches(|c: char| c.is_ascii_lowercase());
    if base.ends_with(|c: char| c.is_ascii_digit()) {
        base
    } else {
        name
    }
}

fn load(a: &BenchArgs) -> anyhow::Result<Vec<(TwoStageInstance, Option<u64>)>> {
    if !a.instances.is_empty() {
        return a
            .instances
            .iter()
            .map(|p| read_instance(p).map(|i| (i, a.seed)).with_context(|| format!("reading {}", p.display())))
            .collect();
    }
    let (Some(n1), Some(n2), Some(scens), Some(seed)) = (a.n1, a.n2, a.scens, a.seed) else {
        bail!("instance family is incomplete");
    };
    Ok((0..a.reps)
        .map(|r| {
            let s = GenConfig::replication_seed(seed, r);
            let mut cfg = GenConfig::knapsack(n1, n2, scens, s, (b'a' + (r % 26) as u8) as char);
            cfg.m2 = a.m2.unwrap_or(n2);
            (generate(&cfg), Some(s))
        })
        .collect())
}

pub fn run(a: BenchArgs) -> anyhow::Result<ExitCode> {
    let usage = if a.algs.is_empty() {
        Some("no algorithms selected")
    } else if a.budget.budget.is_some_and(|b| b <= 0.0) {
        Some("--budget must be positive")
    } else if a.instances.is_empty() && (a.n1.is_none() || a.n2.is_none() || a.scens.is_none() || a.seed.is_none()) {
        Some("either --instances or all of --n1, --n2, --scens and --seed (or FENDEC_SEED) are required")
    } else {
        None
    };
    if let Some(msg) = usage {
        eprintln!("error: {msg}");
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let instances = load(&a)?;
    let algorithms: Vec<Algorithm> = a.algs.iter().map(|&x| x.into()).collect();
    let cells: Vec<Cell> =
        (0..instances.len()).flat_map(|i| algorithms.iter().map(move |&algorithm| Cell { instance: i, algorithm })).collect();
    let results: Vec<Mutex<Option<Result<SolveReport, String>>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let b = &a.budget;
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.max(1).min(cells.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(k) else { break };
                let inst = &instances[cell.instance].0;
                let out = catch_unwind(AssertUnwindSafe(|| sfd::solve(inst, cell.algorithm, b.eps, b.time(), b.budget_iters)));
                let out = match out {
                    Ok(Ok(r)) => Ok(r),
                    Ok(Err(e)) => Err(e.to_string()),
                    Err(_) => Err("solver panicked".to_string()),
                };
                *results[k].lock().unwrap() = Some(out);
            });
        }
    });

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut crashed = 0;
    for (cell, slot) in cells.iter().zip(results) {
        let (inst, seed) = &instances[cell.instance];
        match slot.into_inner().unwrap().expect("every cell runs") {
            Ok(r) => {
                rows.push(csv_row(&r, *seed));
                reports.push(r);
            }
            Err(e) => {
                crashed += 1;
                eprintln!("{} {}: {e}", inst.name, cell.algorithm.tag());
                rows.push(format!("{},{},{},,,,,,,,{}", inst.name, cell.algorithm.tag(), inst.num_scenarios(), seed.map(|s| s.to_string()).unwrap_or_default()));
            }
        }
    }
    rows.extend(average_rows(&reports));
    append_rows(&a.csv, &rows)?;
    println!("{CSV_HEADER}");
    for r in &rows {
        println!("{r}");
    }
    for line in summary(&reports) {
        println!("{line}");
    }
    if let Some(dir) = &a.plots {
        write_plots(dir, &reports)?;
    }
    Ok(if crashed > 0 { ExitCode::from(EXIT_IO) } else { ExitCode::SUCCESS })
}

/// Mean of every numeric column per `(family, algorithm)`, in first-seen order.
fn average_rows(reports: &[SolveReport]) -> Vec<String> {
    let mut groups: Vec<((String, Algorithm), Vec<&SolveReport>)> = Vec::new();
    for r in reports {
        let key = (family(&r.instance).to_string(), r.algorithm);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((fam, alg), rs)| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&SolveReport) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            format!(
                "avg:{fam},{},{},{},{},{},{},{},{},{:.3},",
                alg.tag(),
                rs[0].scenarios,
                num(mean(&|r| r.mips_solved as f64)),
                num(mean(&|r| r.fenchel_cuts as f64)),
                num(mean(&|r| r.lb)),
                num(mean(&|r| r.ub)),
                num(mean(&|r| r.gap_pct)),
                num(mean(&|r| r.iterations as f64)),
                mean(&|r| r.wall_s),
            )
        })
        .collect()
}

/// One line per family naming the algorithm with the smallest average gap.
fn summary(reports: &[SolveReport]) -> Vec<String> {
    let mut by_family: BTreeMap<String, BTreeMap<&'static str, Vec<f64>>> = BTreeMap::new();
    for r in reports {
        by_family.entry(family(&r.instance).to_string()).or_default().entry(r.algorithm.tag()).or_default().push(r.gap_pct);
    }
    by_family
        .into_iter()
        .map(|(fam, algs)| {
            let means: Vec<(&str, f64)> = algs.into_iter().map(|(a, g)| (a, g.iter().sum::<f64>() / g.len() as f64)).collect();
            let gap = means.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
            let best: Vec<&str> = means.iter().filter(|m| m.1 == gap).map(|m| m.0).collect();
            let best = if best.is_empty() { "none".to_string() } else { best.join(" ") };
            format!("# {fam}: smallest average gap {best} ({gap}%)")
        })
        .collect()
}

const COLORS: [&str; 3] = ["#4c72b0", "#dd8452", "#55a868"];

fn bar_chart(title: &str, reports: &[SolveReport], value: &dyn Fn(&SolveReport) -> f64) -> String {
    let mut instances: Vec<&str> = Vec::new();
    let mut algs: Vec<Algorithm> = Vec::new();
    for r in reports {
        if !instances.contains(&r.instance.as_str()) {
            instances.push(&r.instance);
        }
        if !algs.contains(&r.algorithm) {
            algs.push(r.algorithm);
        }
    }
    let top = reports.iter().map(value).filter(|v| v.is_finite()).fold(0.0, f64::max).max(1e-12);
    let (bar, gap, height, base) = (18.0, 24.0, 200.0, 240.0);
    let group = bar * algs.len() as f64 + gap;
    let width = 60.0 + group * instances.len() as f64 + 140.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"300\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <text x=\"10\" y=\"18\" font-size=\"14\">{title}</text>\n\
         <line x1=\"50\" y1=\"{base}\" x2=\"{}\" y2=\"{base}\" stroke=\"black\"/>\n\
         <text x=\"45\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
        width - 130.0,
        base - height + 4.0,
        num(top)
    );
    for (i, inst) in instances.iter().enumerate() {
        let x0 = 60.0 + group * i as f64;
        for (k, alg) in algs.iter().enumerate() {
            let Some(r) = reports.iter().find(|r| r.instance == *inst && r.algorithm == *alg) else { continue };
            let v = value(r);
            let h = if v.is_finite() { height * v / top } else { height };
            s += &format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{bar}\" height=\"{h}\" fill=\"{}\"><title>{} {}: {}</title></rect>\n",
                x0 + bar * k as f64,
                base - h,
                COLORS[k % COLORS.len()],
                inst,
                alg.tag(),
                num(v)
            );
        }
        s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{inst}</text>\n", x0 + bar * algs.len() as f64 / 2.0, base + 16.0);
    }
    for (k, alg) in algs.iter().enumerate() {
        let y = 40.0 + 16.0 * k as f64;
        s += &format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>\n",
            width - 120.0,
            y - 9.0,
            COLORS[k % COLORS.len()],
            width - 105.0,
            y,
            alg.tag()
        );
    }
    s + "</svg>\n"
}

fn write_plots(dir: &Path, reports: &[SolveReport]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let charts: [(&str, &str, &dyn Fn(&SolveReport) -> f64); 3] = [
        ("gap.svg", "Optimality gap (%)", &|r| r.gap_pct),
        ("mips.svg", "MIPs solved", &|r| r.mips_solved as f64),
        ("cuts.svg", "Fenchel cuts", &|r| r.fenchel_cuts as f64),
    ];
    for (file, title, f) in charts {
        let path = dir.join(file);
        std::fs::write(&path, bar_chart(title, reports, f)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_strips_replication_letter() {
        assert_eq!(family("k.10.20.50c"), "k.10.20.50");
        assert_eq!(family("toy"), "toy");
    }
}
