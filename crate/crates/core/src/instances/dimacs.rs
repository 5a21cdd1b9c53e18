//! DIMACS CNF reading and writing.
//!
//! Two comment extensions are understood: `c planted <bitstring>` carries the
//! planted assignment (variable 1 first) and `c k <width>` records the clause
//! width so that empty instances round-trip.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::combinatorics::Assignment;
use crate::error::{Error, Result};

use super::{Clause, Instance};

pub fn to_dimacs(inst: &Instance) -> String {
    let mut out = String::new();
    if let Some(t) = inst.planted() {
        let _ = writeln!(out, "c planted {t}");
    }
    let _ = writeln!(out, "c k {}", inst.k());
    let _ = writeln!(out, "p cnf {} {}", inst.n(), inst.m());
    for clause in inst.clauses() {
        for (v, pos) in clause.literals() {
            let _ = write!(out, "{}{} ", if pos { "" } else { "-" }, v);
        }
        out.push_str("0\n");
    }
    out
}

pub fn dimacs_write(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_dimacs(inst))?;
    Ok(())
}

pub fn dimacs_read(path: impl AsRef<Path>) -> Result<Instance> {
    parse_dimacs(&fs::read_to_string(path)?)
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Dimacs { line, msg: msg.into() }
}

pub fn parse_dimacs(text: &str) -> Result<Instance> {
    let mut header: Option<(usize, usize)> = None;
    let mut planted: Option<(usize, String)> = None;
    let mut declared_k: Option<usize> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut words = rest.split_whitespace();
            match words.next() {
                Some("planted") => {
                    let bits = words.next().ok_or_else(|| err(line_no, "planted comment without value"))?;
                    planted = Some((line_no, bits.to_string()));
                }
                Some("k") => {
                    let k = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| err(line_no, "bad clause width comment"))?;
                    declared_k = Some(k);
                }
                _ => {}
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line"));
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.len() != 3 || words[0] != "cnf" {
                return Err(err(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let n = words[1].parse().map_err(|_| err(line_no, "bad variable count"))?;
            let m = words[2].parse().map_err(|_| err(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| err(line_no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            if current.is_empty() {
                current_line = line_no;
            }
            if lit == 0 {
                let clause = Clause::from_dimacs(&current).map_err(|e| err(current_line, e.to_string()))?;
                clauses.push(clause);
                current.clear();
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(err(line_no, format!("literal {lit} out of range for {n} variables")));
                }
                current.push(lit);
            }
        }
    }

    let (n, m) = header.ok_or_else(|| err(0, "missing problem line"))?;
    if !current.is_empty() {
        return Err(err(current_line, "unterminated clause"));
    }
    if clauses.len() != m {
        return Err(err(0, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    let k = match (declared_k, clauses.first()) {
        (Some(k), _) => k,
        (None, Some(c)) => c.width(),
        (None, None) => return Err(err(0, "cannot infer clause width of an empty instance")),
    };
    if let Some(pos) = clauses.iter().position(|c| c.width() != k) {
        return Err(err(0, format!("clause {} has width {} but k = {k}", pos + 1, clauses[pos].width())));
    }
    let planted = match planted {
        Some((line, bits)) => {
            let t: Assignment = bits.parse().map_err(|e: Error| err(line, e.to_string()))?;
            if t.n() != n {
                return Err(err(line, format!("planted assignment has {} bits, expected {n}", t.n())));
            }
            Some(t)
        }
        None => None,
    };
    Instance::new(n, k, clauses, planted).map_err(|e| err(0, e.to_string()))
}
