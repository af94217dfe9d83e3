//! `fendec` command-line driver.

mod bench;
mod demo;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fendec::gen::{generate, GenConfig};
use fendec::model::{read_instance, write_instance};
use fendec::sfd::{self, Algorithm};

/// Exit code for unreadable or unwritable files.
const EXIT_IO: u8 = 1;
/// Exit code for invalid flag combinations (clap uses it for parse errors).
const EXIT_USAGE: u8 = 2;
/// Exit code when a built-in self-check does not reproduce its reference.
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "fendec", version, about = "Two-stage stochastic integer programs by stage-wise Fenchel decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded multidimensional knapsack instances as SIPX files.
    Gen(GenArgs),
    /// Solve one instance and append a CSV row.
    Solve(SolveArgs),
    /// Run algorithms over a set of instances and tabulate the results.
    Bench(BenchArgs),
    /// Print integer set generation traces for the three worked examples.
    IsgDemo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Alg {
    Sfd,
    #[value(name = "sfd-r")]
    SfdR,
    Direct,
}

impl From<Alg> for Algorithm {
    fn from(a: Alg) -> Self {
        match a {
            Alg::Sfd => Algorithm::Sfd,
            Alg::SfdR => Algorithm::SfdR,
            Alg::Direct => Algorithm::Direct,
        }
    }
}

#[derive(Args, Clone)]
struct Family {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    /// First-stage rows.
    #[arg(long, default_value_t = 10)]
    m1: usize,
    /// Second-stage rows (defaults to n2).
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    scens: usize,
    /// Upper bound on every second-stage variable.
    #[arg(long, default_value_t = 5)]
    v_ub: i64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, env = "FENDEC_SEED")]
    seed: u64,
}

impl Family {
    fn configs(&self) -> Vec<GenConfig> {
        (0..self.reps)
            .map(|r| {
                let rep = (b'a' + (r % 26) as u8) as char;
                let mut cfg = GenConfig::knapsack(self.n1, self.n2, self.scens, GenConfig::replication_seed(self.seed, r), rep);
                cfg.m1 = self.m1;
                cfg.m2 = self.m2.unwrap_or(self.n2);
                cfg.v_ub = self.v_ub;
                cfg
            })
            .collect()
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: Family,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct Budget {
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Wall-clock seconds per run.
    #[arg(long)]
    budget: Option<f64>,
    /// Iteration budget per run (B&B nodes for DIRECT); deterministic.
    #[arg(long)]
    budget_iters: Option<usize>,
}

impl Budget {
    fn time(&self) -> Option<Duration> {
        self.budget.map(Duration::from_secs_f64)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "sfd-r")]
    alg: Alg,
    #[command(flatten)]
    budget: Budget,
    /// CSV file the result row is appended to.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed recorded in the CSV row.
    #[arg(long, env = "FENDEC_SEED")]
    seed: Option<u64>,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// SIPX files; when absent, instances are generated from the family flags.
    #[arg(long, num_args = 1..)]
    instances: Vec<PathBuf>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    scens: Option<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, env = "FENDEC_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sfd,sfd-r,direct")]
    algs: Vec<Alg>,
    #[command(flatten)]
    budget: Budget,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "bench.csv")]
    csv: PathBuf,
    /// Directory for SVG bar charts of gap, MIPs and cuts.
    #[arg(long)]
    plots: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    json: bool,
    /// Override the variable bound of the third example.
    #[arg(long, hide = true)]
    ip3_u: Option<i64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => bench::run(a),
        Command::IsgDemo(a) => return demo::run(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<ExitCode> {
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for cfg in a.family.configs() {
        let path = a.out.join(cfg.file_name());
        write_instance(&generate(&cfg), &path).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<ExitCode> {
    let inst = read_instance(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let b = &a.budget;
    let report = sfd::solve(&inst, a.alg.into(), b.eps, b.time(), b.budget_iters)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{}", bench::CSV_HEADER);
        println!("{}", bench::csv_row(&report, a.seed));
        eprintln!("status {:?}", report.status);
    }
    if let Some(path) = &a.csv {
        bench::append_rows(path, &[bench::csv_row(&report, a.seed)])?;
    }
    Ok(ExitCode::SUCCESS)
}
