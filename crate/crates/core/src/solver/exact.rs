//! Exact minimisation by variable elimination.
//!
//! Variables are eliminated in greedy min-fill order; each step combines the
//! tables touching one variable and minimises it out. Cost is exponential
//! only in the widest combined table, so sparse penalty QUBOs with hundreds
//! of variables remain tractable when their interaction graph is narrow.

use serde::{Deserialize, Serialize};

use super::exhaustive::tie_tolerance;
use crate::error::{Error, Result};
use crate::qubo::Qubo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOptions {
    /// Largest table scope allowed during elimination.
    pub max_width: usize,
    /// Stop enumerating ground states after this many.
    pub max_solutions: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_width: 22,
            max_solutions: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub energy: f64,
    pub assignments: Vec<Vec<bool>>,
    /// `true` when more ground states exist than were returned.
    pub truncated: bool,
    /// Widest table built.
    pub width: usize,
}

struct Factor {
    scope: Vec<usize>,
    table: Vec<f64>,
}

struct Bucket {
    var: usize,
    scope: Vec<usize>,
    table: Vec<f64>,
}

fn elimination_order(n: usize, adj: &mut [Vec<bool>]) -> Vec<usize> {
    let mut nbrs: Vec<Vec<usize>> = (0..n).map(|v| (0..n).filter(|&u| adj[v][u]).collect()).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, usize::MAX);
        for v in (0..n).filter(|&v| !done[v]) {
            let ns = &nbrs[v];
            if ns.len() > best.1 && best.0 == 0 {
                continue;
            }
            let mut fill = 0;
            for (i, &a) in ns.iter().enumerate() {
                for &b in &ns[i + 1..] {
                    if !adj[a][b] {
                        fill += 1;
                    }
                }
            }
            if (fill, ns.len(), v) < best {
                best = (fill, ns.len(), v);
            }
        }
        let v = best.2;
        done[v] = true;
        order.push(v);
        let ns = std::mem::take(&mut nbrs[v]);
        for (i, &a) in ns.iter().enumerate() {
            for &b in &ns[i + 1..] {
                if !adj[a][b] {
                    adj[a][b] = true;
                    adj[b][a] = true;
                    nbrs[a].push(b);
                    nbrs[b].push(a);
                }
            }
        }
        for &a in &ns {
            nbrs[a].retain(|&u| u != v);
        }
    }
    order
}

/// Positions of `sub` inside the sorted `scope`.
fn positions(scope: &[usize], sub: &[usize]) -> Vec<usize> {
    sub.iter().map(|v| scope.binary_search(v).expect("sub-scope")).collect()
}

fn gather(idx: usize, pos: &[usize]) -> usize {
    pos.iter().enumerate().fold(0, |acc, (j, &p)| acc | ((idx >> p & 1) << j))
}

pub fn solve_exact(q: &Qubo, options: ExactOptions) -> Result<ExactResult> {
    let n = q.num_vars();
    let mut adj = vec![vec![false; n]; n];
    let mut factors: Vec<Option<Factor>> = Vec::new();
    for (p, r, c) in q.terms() {
        if p == r {
            factors.push(Some(Factor {
                scope: vec![p],
                table: vec![0.0, c],
            }));
        } else {
            adj[p][r] = true;
            adj[r][p] = true;
            factors.push(Some(Factor {
                scope: vec![p, r],
                table: vec![0.0, 0.0, 0.0, c],
            }));
        }
    }
    let mut var_factors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, f) in factors.iter().enumerate() {
        for &v in &f.as_ref().unwrap().scope {
            var_factors[v].push(id);
        }
    }

    let order = elimination_order(n, &mut adj);
    let mut constant = q.offset();
    let mut buckets: Vec<Bucket> = Vec::with_capacity(n);
    let mut width = 0;

    for &v in &order {
        let ids: Vec<usize> = var_factors[v].iter().copied().filter(|&id| factors[id].is_some()).collect();
        let mut scope: Vec<usize> = vec![v];
        for &id in &ids {
            scope.extend(&factors[id].as_ref().unwrap().scope);
        }
        scope.sort_unstable();
        scope.dedup();
        if scope.len() > options.max_width {
            return Err(Error::TooLarge {
                n: scope.len(),
                limit: options.max_width,
            });
        }
        width = width.max(scope.len());

        let size = 1usize << scope.len();
        let mut table = vec![0.0; size];
        for &id in &ids {
            let f = factors[id].take().unwrap();
            let pos = positions(&scope, &f.scope);
            for (idx, slot) in table.iter_mut().enumerate() {
                *slot += f.table[gather(idx, &pos)];
            }
        }

        let vpos = scope.binary_search(&v).unwrap();
        let rest: Vec<usize> = scope.iter().copied().filter(|&u| u != v).collect();
        let mut msg = vec![0.0; 1 << rest.len()];
        for (ridx, slot) in msg.iter_mut().enumerate() {
            let low = ridx & ((1 << vpos) - 1);
            let high = (ridx >> vpos) << (vpos + 1);
            let i0 = high | low;
            *slot = table[i0].min(table[i0 | 1 << vpos]);
        }
        buckets.push(Bucket { var: v, scope, table });

        if rest.is_empty() {
            constant += msg[0];
        } else {
            let id = factors.len();
            for &u in &rest {
                var_factors[u].push(id);
            }
            factors.push(Some(Factor { scope: rest, table: msg }));
        }
    }

    // enumerate every optimal completion, last-eliminated variable first
    let eps = tie_tolerance(q);
    let mut assignments = Vec::new();
    let mut truncated = false;
    let mut x = vec![false; n];
    let mut stack: Vec<(usize, Option<bool>)> = vec![(buckets.len(), None)];
    // (bucket index still to assign, pending value for bucket index - 1)
    while let Some((k, pending)) = stack.pop() {
        let k = match pending {
            Some(val) => {
                x[buckets[k - 1].var] = val;
                k - 1
            }
            None => k,
        };
        if k == 0 {
            if assignments.len() == options.max_solutions {
                truncated = true;
                break;
            }
            assignments.push(x.clone());
            continue;
        }
        let b = &buckets[k - 1];
        let mut idx = 0usize;
        for (j, &u) in b.scope.iter().enumerate() {
            if u != b.var && x[u] {
                idx |= 1 << j;
            }
        }
        let vbit = 1 << b.scope.binary_search(&b.var).unwrap();
        let (e0, e1) = (b.table[idx & !vbit], b.table[idx | vbit]);
        let m = e0.min(e1);
        if e1 <= m + eps {
            stack.push((k, Some(true)));
        }
        if e0 <= m + eps {
            stack.push((k, Some(false)));
        }
    }

    let mut scored: Vec<(f64, Vec<bool>)> = assignments.into_iter().map(|a| (q.energy_unchecked(&a), a)).collect();
    let min = scored.iter().map(|(e, _)| *e).fold(constant, f64::min);
    scored.retain(|(e, _)| *e <= min + eps);
    scored.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(ExactResult {
        energy: min,
        assignments: scored.into_iter().map(|(_, a)| a).collect(),
        truncated,
        width,
    })
}
