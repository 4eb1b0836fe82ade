//! QUBO exchange formats: a JSON object `{n, offset, terms: [[p, q, c]]}` and
//! a plain coordinate listing with one `p q c` line per nonzero term.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Qubo, VarId};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
pub struct QuboJson {
    pub n: usize,
    pub offset: f64,
    pub terms: Vec<(usize, usize, f64)>,
}

impl From<Qubo> for QuboJson {
    fn from(q: Qubo) -> Self {
        QuboJson {
            n: q.n,
            offset: q.offset,
            terms: q.terms().collect(),
        }
    }
}

impl TryFrom<QuboJson> for Qubo {
    type Error = Error;

    fn try_from(j: QuboJson) -> Result<Self> {
        let mut q = Qubo::new(j.n);
        for (p, r, c) in j.terms {
            if p >= j.n || r >= j.n {
                return Err(Error::Format(format!("term ({p},{r}) outside n={}", j.n)));
            }
            q.add_term(VarId(p), VarId(r), c);
        }
        q.offset = j.offset;
        Ok(q)
    }
}

pub fn to_json(q: &Qubo) -> String {
    serde_json::to_string(q).expect("qubo serializes")
}

pub fn from_json(text: &str) -> Result<Qubo> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_coord(q: &Qubo) -> String {
    let mut out = format!(
        "# qubo n={} offset={} terms={}\n",
        q.num_vars(),
        q.offset(),
        q.num_terms()
    );
    for (p, r, c) in q.terms() {
        writeln!(out, "{p} {r} {c}").unwrap();
    }
    out
}

pub fn from_coord(text: &str) -> Result<Qubo> {
    let mut header: BTreeMap<&str, &str> = BTreeMap::new();
    let mut q = Qubo::new(0);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    header.insert(k, v);
                }
            }
            continue;
        }
        let bad = || Error::Format(format!("line {}: `{line}`", lineno + 1));
        let mut it = line.split_whitespace();
        let p: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let c: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() {
            return Err(bad());
        }
        q.add_term(VarId(p), VarId(r), c);
    }
    if let Some(n) = header.get("n") {
        let n: usize = n.parse().map_err(|_| Error::Format("bad n in header".into()))?;
        if n < q.n {
            return Err(Error::Format(format!("header n={n} but terms reach {}", q.n)));
        }
        q.n = n;
    }
    if let Some(off) = header.get("offset") {
        q.offset = off
            .parse()
            .map_err(|_| Error::Format("bad offset in header".into()))?;
    }
    Ok(q)
}
