//! Text formats: signed graphs, DIMACS CNF, and JSON solution dumps.
//!
//! Graph files look like
//!
//! ```text
//! # a comment
//! n 4 bipartite 2 terminals 0 3
//! 0 2 + 1
//! 1 3 - inf
//! ```
//!
//! The header gives the vertex count and optionally `|L|` (the left side is
//! `0..|L|`) and a terminal pair. Each edge line is `u v sign weight` with
//! `inf` for an uncuttable edge. Weights are written in the shortest form
//! that parses back to the same `f64`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use corrclust_core::instances::CnfFormula;
use corrclust_core::{Edge, FractionalSolution, Norm, Sign, SignedGraph};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Default)]
struct Header {
    n: usize,
    left: Option<usize>,
    terminals: Option<(usize, usize)>,
}

fn parse_header(tokens: &[&str], line: usize) -> Result<Header> {
    let num = |i: usize, what: &str| -> Result<usize> {
        let tok = tokens
            .get(i)
            .ok_or_else(|| parse_err(line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
    };
    let mut h = Header {
        n: num(1, "vertex count")?,
        ..Header::default()
    };
    let mut i = 2;
    while i < tokens.len() {
        match tokens[i] {
            "bipartite" if h.left.is_none() => {
                h.left = Some(num(i + 1, "left side size")?);
                i += 2;
            }
            "terminals" if h.terminals.is_none() => {
                h.terminals = Some((num(i + 1, "terminal")?, num(i + 2, "terminal")?));
                i += 3;
            }
            other => {
                return Err(parse_err(
                    line,
                    format!("unexpected header field {other:?}"),
                ))
            }
        }
    }
    Ok(h)
}

fn parse_edge(tokens: &[&str], n: usize, line: usize) -> Result<Edge> {
    if tokens.len() != 4 {
        return Err(parse_err(
            line,
            format!("expected `u v sign weight`, got {} fields", tokens.len()),
        ));
    }
    let vertex = |tok: &str| -> Result<usize> {
        let v: usize = tok
            .parse()
            .map_err(|_| parse_err(line, format!("bad vertex {tok:?}")))?;
        if v >= n {
            return Err(parse_err(
                line,
                format!("vertex {v} out of range for n = {n}"),
            ));
        }
        Ok(v)
    };
    let (u, v) = (vertex(tokens[0])?, vertex(tokens[1])?);
    if u == v {
        return Err(parse_err(line, format!("self-loop at vertex {u}")));
    }
    let sign = match tokens[2] {
        "+" => Sign::Pos,
        "-" => Sign::Neg,
        other => return Err(parse_err(line, format!("bad sign {other:?}"))),
    };
    if tokens[3] == "inf" {
        return Ok(Edge::infinite(u, v, sign));
    }
    let w: f64 = tokens[3]
        .parse()
        .map_err(|_| parse_err(line, format!("bad weight {:?}", tokens[3])))?;
    if !(w.is_finite() && w >= 0.0) {
        return Err(parse_err(
            line,
            format!("weight {w} must be finite and non-negative"),
        ));
    }
    Ok(Edge::new(u, v, sign, w))
}

pub fn parse_graph(text: &str) -> Result<SignedGraph> {
    let mut header: Option<Header> = None;
    let mut edges = Vec::new();
    let mut pairs = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0] == "n" {
            if header.is_some() {
                return Err(parse_err(line, "second header"));
            }
            header = Some(parse_header(&tokens, line)?);
            continue;
        }
        let Some(h) = &header else {
            return Err(parse_err(line, "edge before the `n` header"));
        };
        let e = parse_edge(&tokens, h.n, line)?;
        if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(parse_err(
                line,
                format!("pair ({}, {}) appears twice", e.u, e.v),
            ));
        }
        edges.push(e);
    }
    let h = header.ok_or_else(|| parse_err(0, "missing `n` header"))?;
    let mut g = SignedGraph::new(h.n, edges)?;
    if let Some(k) = h.left {
        if k > h.n {
            return Err(parse_err(
                0,
                format!("left side size {k} exceeds n = {}", h.n),
            ));
        }
        let left: Vec<usize> = (0..k).collect();
        g = g.with_bipartition(&left)?;
    }
    if let Some((s, t)) = h.terminals {
        g = g.with_terminals(s, t)?;
    }
    Ok(g)
}

pub fn format_graph(g: &SignedGraph) -> Result<String> {
    let mut out = format!("n {}", g.n());
    if let Some(side) = g.left_side() {
        let k = side.iter().take_while(|&&l| l).count();
        if side[k..].iter().any(|&l| l) {
            return Err(CliError::Usage(
                "the graph format needs the left side to be a prefix 0..|L|".into(),
            ));
        }
        write!(out, " bipartite {k}").unwrap();
    }
    if let Some((s, t)) = g.terminals() {
        write!(out, " terminals {s} {t}").unwrap();
    }
    out.push('\n');
    for e in g.edges() {
        let sign = if e.sign == Sign::Pos { '+' } else { '-' };
        if e.infinite {
            writeln!(out, "{} {} {sign} inf", e.u, e.v).unwrap();
        } else {
            writeln!(out, "{} {} {sign} {:?}", e.u, e.v, e.weight).unwrap();
        }
    }
    Ok(out)
}

pub fn read_graph(path: &Path) -> Result<SignedGraph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_graph(&text)
}

pub fn write_graph(g: &SignedGraph, path: &Path) -> Result<()> {
    fs::write(path, format_graph(g)?).map_err(|e| CliError::io(path, e))
}

/// DIMACS CNF: `c` comments, a `p cnf <vars> <clauses>` line, and clauses
/// terminated by `0`, possibly spanning lines. A line starting with `%` ends
/// the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut declared: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if declared.is_some() {
                return Err(parse_err(line, "second problem line"));
            }
            match tokens.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad variable count {v:?}")))?;
                    let c = c
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad clause count {c:?}")))?;
                    declared = Some((v, c));
                }
                _ => return Err(parse_err(line, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let Some((vars, _)) = declared else {
            return Err(parse_err(line, "clause before the problem line"));
        };
        for tok in trimmed.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| parse_err(line, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(parse_err(line, "empty clause"));
                }
                if current.len() > 3 {
                    return Err(parse_err(
                        line,
                        format!("clause of width {} (at most 3)", current.len()),
                    ));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(parse_err(
                        line,
                        format!("literal {lit} exceeds {vars} variables"),
                    ));
                }
                current.push(lit);
            }
        }
    }
    let (vars, count) = declared.ok_or_else(|| parse_err(0, "missing `p cnf` line"))?;
    if !current.is_empty() {
        return Err(parse_err(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != count {
        return Err(parse_err(
            last_line,
            format!("declared {count} clauses, found {}", clauses.len()),
        ));
    }
    Ok(CnfFormula::new(vars, clauses)?)
}

pub fn format_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.clauses().len());
    for c in f.clauses() {
        for l in c {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn read_dimacs(path: &Path) -> Result<CnfFormula> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_dimacs(&text)
}

/// `q` as JSON: a number, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Finite(f64),
    Named(InfTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfTag {
    Inf,
}

impl From<Norm> for QValue {
    fn from(q: Norm) -> Self {
        match q {
            Norm::Inf => QValue::Named(InfTag::Inf),
            Norm::Finite(q) => QValue::Finite(q),
        }
    }
}

impl QValue {
    pub fn norm(self) -> Result<Norm> {
        match self {
            QValue::Named(InfTag::Inf) => Ok(Norm::Inf),
            QValue::Finite(q) => Ok(Norm::new(q)?),
        }
    }
}

/// Serialized [`FractionalSolution`]; `x` is the upper triangle, row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDump {
    #[serde(default)]
    pub schema: u32,
    pub n: usize,
    pub q: QValue,
    pub value: f64,
    pub lower_bound: f64,
    /// `||y||_q^q` (`max y` for the max norm).
    #[serde(default)]
    pub y_branch: f64,
    /// `sum z` when `z` is present.
    #[serde(default)]
    pub z_branch: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub pivots: usize,
}

impl SolutionDump {
    pub fn new(sol: &FractionalSolution) -> Self {
        let n = sol.n;
        let mut x = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                x.push(sol.x(u, v));
            }
        }
        Self {
            schema: crate::report::SCHEMA,
            n,
            q: sol.q.into(),
            value: sol.value,
            lower_bound: sol.lower_bound,
            y_branch: sol.y_branch,
            z_branch: sol.z_branch,
            x,
            y: sol.y.clone(),
            z: sol.z.clone(),
            pivots: sol.pivots,
        }
    }

    /// Rebuilds the solution for `g`: `y`, `z` and `value` are recomputed
    /// from `x`, the stored lower bound is kept.
    pub fn into_solution(self, g: &SignedGraph) -> Result<FractionalSolution> {
        let n = self.n;
        if n != g.n() || self.x.len() != n * n.saturating_sub(1) / 2 {
            return Err(CliError::Usage(format!(
                "solution for {n} vertices with {} distances does not fit a graph on {} vertices",
                self.x.len(),
                g.n()
            )));
        }
        let mut x = vec![0.0; n * n];
        let mut it = self.x.iter();
        for u in 0..n {
            for v in u + 1..n {
                let d = *it.next().expect("length checked");
                x[u * n + v] = d;
                x[v * n + u] = d;
            }
        }
        let q = self.q.norm()?;
        let mut sol = FractionalSolution::from_metric(g, q, x, self.z.is_some())?;
        sol.lower_bound = self.lower_bound;
        sol.pivots = self.pivots;
        Ok(sol)
    }
}

pub fn read_solution(path: &Path, g: &SignedGraph) -> Result<FractionalSolution> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dump: SolutionDump = serde_json::from_str(&text)?;
    dump.into_solution(g)
}
