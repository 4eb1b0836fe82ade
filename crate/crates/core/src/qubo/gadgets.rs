//! Penalty gadgets. Each adds `λ·P(x)` where `P ≥ 0` on binary inputs and
//! `P = 0` exactly on the assignments satisfying the constraint.

use std::collections::BTreeMap;

use super::{new_bounded_int, BoundedInt, Qubo, VarId, VarRegistry};
use crate::error::{Error, Result};

fn distinct(vars: &[VarId]) -> Result<()> {
    for (i, a) in vars.iter().enumerate() {
        if vars[i + 1..].contains(a) {
            return Err(Error::RepeatedVariable(vars.iter().map(|v| v.0).collect()));
        }
    }
    Ok(())
}

/// `x + y ≤ 1` as `λ·xy`.
pub fn add_at_most_one_pair(q: &mut Qubo, x: VarId, y: VarId, lambda: f64) -> Result<()> {
    distinct(&[x, y])?;
    q.add_term(x, y, lambda);
    Ok(())
}

/// `x ≤ y` as `λ·(x − xy)`.
pub fn add_leq_pair(q: &mut Qubo, x: VarId, y: VarId, lambda: f64) -> Result<()> {
    distinct(&[x, y])?;
    q.add_linear(x, lambda);
    q.add_term(x, y, -lambda);
    Ok(())
}

/// `z = x·y` as `λ·(xy − 2xz − 2yz + 3z)`.
pub fn add_product(q: &mut Qubo, x: VarId, y: VarId, z: VarId, lambda: f64) -> Result<()> {
    distinct(&[x, y, z])?;
    q.add_term(x, y, lambda);
    q.add_term(x, z, -2.0 * lambda);
    q.add_term(y, z, -2.0 * lambda);
    q.add_linear(z, 3.0 * lambda);
    Ok(())
}

fn merge(terms: &[(VarId, i64)]) -> Vec<(VarId, i64)> {
    let mut m: BTreeMap<VarId, i64> = BTreeMap::new();
    for &(v, a) in terms {
        *m.entry(v).or_insert(0) += a;
    }
    m.into_iter().filter(|(_, a)| *a != 0).collect()
}

/// `Σ α_i x_i = c` as `λ·(Σ α_i x_i − c)²`, expanded with `x² = x`.
/// Repeated variables are merged first.
pub fn add_linear_eq(q: &mut Qubo, terms: &[(VarId, i64)], c: i64, lambda: f64) {
    let terms = merge(terms);
    let c = c as f64;
    for (i, &(v, a)) in terms.iter().enumerate() {
        let a = a as f64;
        q.add_linear(v, lambda * (a * a - 2.0 * c * a));
        for &(w, b) in &terms[i + 1..] {
            q.add_term(v, w, lambda * 2.0 * a * b as f64);
        }
    }
    q.add_offset(lambda * c * c);
}

/// Slack bound `c − Σ_{α<0} α` needed to turn `Σ α_i x_i ≤ c` into an equality.
pub fn slack_bound(terms: &[(VarId, i64)], c: i64) -> i64 {
    c - merge(terms).iter().map(|(_, a)| (*a).min(0)).sum::<i64>()
}

/// `Σ α_i x_i ≤ c` as `λ·(Σ α_i x_i + ξ − c)²` with a capped slack register
/// `ξ ∈ [0, c − Σ_{α<0} α]` named `label#j`.
pub fn add_linear_leq(
    q: &mut Qubo,
    reg: &mut VarRegistry,
    label: &str,
    terms: &[(VarId, i64)],
    c: i64,
    lambda: f64,
) -> Result<BoundedInt> {
    let bound = slack_bound(terms, c);
    if bound < 0 {
        return Err(Error::InfeasibleInequality(bound));
    }
    let slack = new_bounded_int(reg, label, bound)?;
    let mut all = merge(terms);
    all.extend(slack.bits.iter().map(|&(v, k)| (v, k as i64)));
    add_linear_eq(q, &all, c, lambda);
    Ok(slack)
}
