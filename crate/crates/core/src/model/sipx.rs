//! SIPX: a small line-oriented text format for two-stage instances.
//!
//! ```text
//! SIPX 1
//! FIRSTSTAGE n1 m1
//! C c_1 … c_n1
//! A
//! a_11 … a_1n1            (m1 lines)
//! B b_1 … b_m1
//! SECONDSTAGE n2 m2
//! W
//! w_11 … w_1n2            (m2 lines)
//! U u_1 … u_n2
//! SCENARIOS S
//! SCEN p                  (S blocks)
//! Q …
//! H …
//! T
//! t_11 … t_1n1            (m2 lines)
//! ENDSCEN
//! ```
//!
//! `#` starts a comment. Numbers are written in shortest round-trip form, so
//! write-then-read is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{FirstStage, Scenario, TwoStageInstance};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            items.extend(body.split_whitespace().map(|t| (i + 1, t)));
        }
        Tokens { items, at: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.at).or(self.items.last()).map_or(1, |t| t.0)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line(), msg: msg.into() })
    }

    fn keyword(&mut self, kw: &'static str) -> Result<(), ParseError> {
        match self.items.get(self.at) {
            Some((_, t)) if *t == kw => {
                self.at += 1;
                Ok(())
            }
            Some((_, t)) => self.fail(format!("expected {kw}, found `{t}`")),
            None => Err(ParseError::MissingSection(kw)),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let Some(&(line, t)) = self.items.get(self.at) else {
            return self.fail("unexpected end of file");
        };
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.at += 1;
                Ok(v)
            }
            _ => Err(ParseError::Syntax { line, msg: format!("expected a number, found `{t}`") }),
        }
    }

    fn count(&mut self) -> Result<usize, ParseError> {
        let Some(&(line, t)) = self.items.get(self.at) else {
            return self.fail("unexpected end of file");
        };
        match t.parse::<usize>() {
            Ok(v) => {
                self.at += 1;
                Ok(v)
            }
            Err(_) => Err(ParseError::Syntax { line, msg: format!("expected a count, found `{t}`") }),
        }
    }

    fn vector(&mut self, n: usize) -> Result<Vec<f64>, ParseError> {
        (0..n).map(|_| self.number()).collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>, ParseError> {
        (0..rows).map(|_| self.vector(cols)).collect()
    }
}

pub fn parse_instance(text: &str, name: &str) -> Result<TwoStageInstance, ParseError> {
    let mut tk = Tokens::new(text);
    tk.keyword("SIPX")?;
    if tk.count()? != 1 {
        return tk.fail("unsupported SIPX version");
    }
    tk.keyword("FIRSTSTAGE")?;
    let n1 = tk.count()?;
    let m1 = tk.count()?;
    tk.keyword("C")?;
    let c = tk.vector(n1)?;
    tk.keyword("A")?;
    let a = tk.matrix(m1, n1)?;
    tk.keyword("B")?;
    let b = tk.vector(m1)?;
    tk.keyword("SECONDSTAGE")?;
    let n2 = tk.count()?;
    let m2 = tk.count()?;
    tk.keyword("W")?;
    let w = tk.matrix(m2, n2)?;
    tk.keyword("U")?;
    let mut u = Vec::with_capacity(n2);
    for _ in 0..n2 {
        let v = tk.number()?;
        if v < 0.0 || v.fract() != 0.0 {
            return tk.fail(format!("upper bound {v} is not a nonnegative integer"));
        }
        u.push(v as i64);
    }
    tk.keyword("SCENARIOS")?;
    let ns = tk.count()?;
    let mut scenarios = Vec::with_capacity(ns);
    for _ in 0..ns {
        tk.keyword("SCEN")?;
        let p = tk.number()?;
        tk.keyword("Q")?;
        let q = tk.vector(n2)?;
        tk.keyword("H")?;
        let h = tk.vector(m2)?;
        tk.keyword("T")?;
        let t = tk.matrix(m2, n1)?;
        tk.keyword("ENDSCEN")?;
        scenarios.push(Scenario { p, q, h, t });
    }
    if tk.at < tk.items.len() {
        return tk.fail(format!("trailing token `{}`", tk.items[tk.at].1));
    }
    Ok(TwoStageInstance { name: name.to_string(), first: FirstStage { c, a, b }, n2, m2, w, u, scenarios })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<TwoStageInstance, ParseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.strip_suffix(".sipx").unwrap_or(s).to_string())
        .unwrap_or_default();
    parse_instance(&text, &name)
}

fn line(out: &mut String, head: &str, v: &[f64]) {
    out.push_str(head);
    for x in v {
        if !out.ends_with('\n') && !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{x}");
    }
    out.push('\n');
}

pub fn to_sipx(inst: &TwoStageInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "SIPX 1");
    let _ = writeln!(s, "# {}", inst.name);
    let _ = writeln!(s, "FIRSTSTAGE {} {}", inst.first.n1(), inst.first.m1());
    line(&mut s, "C", &inst.first.c);
    s.push_str("A\n");
    for r in &inst.first.a {
        line(&mut s, "", r);
    }
    line(&mut s, "B", &inst.first.b);
    let _ = writeln!(s, "SECONDSTAGE {} {}", inst.n2, inst.m2);
    s.push_str("W\n");
    for r in &inst.w {
        line(&mut s, "", r);
    }
    let u: Vec<f64> = inst.u.iter().map(|&v| v as f64).collect();
    line(&mut s, "U", &u);
    let _ = writeln!(s, "SCENARIOS {}", inst.scenarios.len());
    for sc in &inst.scenarios {
        let _ = writeln!(s, "SCEN {}", sc.p);
        line(&mut s, "Q", &sc.q);
        line(&mut s, "H", &sc.h);
        s.push_str("T\n");
        for r in &sc.t {
            line(&mut s, "", r);
        }
        s.push_str("ENDSCEN\n");
    }
    s
}

pub fn write_instance(inst: &TwoStageInstance, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, to_sipx(inst))
}
