//! Sparse QUBO algebra.
//!
//! A [`Qubo`] stores `Σ q[(p,r)]·x_p·x_r + offset` with `p ≤ r`. Because
//! `x² = x` for binary variables the diagonal carries every linear term.
//! Coefficients are `f64`; every gadget in this crate produces integers
//! (times a penalty weight), so with integral weights energies are exact.

mod bounded;
pub mod gadgets;
pub mod io;
mod weights;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bounded::{capped_coefficients, new_bounded_int, BoundedInt};
pub use weights::{Category, PenaltyWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

static NEXT_REGISTRY: AtomicU64 = AtomicU64::new(1);

/// Allocates dense variable ids and remembers their semantic labels.
#[derive(Debug)]
pub struct VarRegistry {
    tag: u64,
    labels: Vec<String>,
    index: HashMap<String, VarId>,
}

impl Default for VarRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl VarRegistry {
    pub fn new() -> Self {
        VarRegistry {
            tag: NEXT_REGISTRY.fetch_add(1, Ordering::Relaxed),
            labels: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn alloc(&mut self, label: impl Into<String>) -> Result<VarId> {
        let label = label.into();
        if self.index.contains_key(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        let id = VarId(self.labels.len());
        self.index.insert(label.clone(), id);
        self.labels.push(label);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<VarId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: VarId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// An empty QUBO tied to this registry.
    pub fn qubo(&self) -> Qubo {
        Qubo {
            n: self.len(),
            terms: BTreeMap::new(),
            offset: 0.0,
            tag: Some(self.tag),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "io::QuboJson", try_from = "io::QuboJson")]
pub struct Qubo {
    n: usize,
    terms: BTreeMap<(usize, usize), f64>,
    offset: f64,
    tag: Option<u64>,
}

impl Default for Qubo {
    fn default() -> Self {
        Qubo::new(0)
    }
}

impl Qubo {
    /// A free-standing QUBO over `n` variables, not tied to any registry.
    pub fn new(n: usize) -> Self {
        Qubo {
            n,
            terms: BTreeMap::new(),
            offset: 0.0,
            tag: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Nonzero terms in upper-triangular order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.terms.iter().map(|(&(p, q), &c)| (p, q, c))
    }

    pub fn coefficient(&self, p: VarId, q: VarId) -> f64 {
        let key = if p.0 <= q.0 { (p.0, q.0) } else { (q.0, p.0) };
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    pub fn add_linear(&mut self, p: VarId, c: f64) {
        self.add_term(p, p, c);
    }

    /// Adds `c·x_p·x_q`. Keys are normalised to `p ≤ q`; entries that cancel
    /// to zero are removed.
    pub fn add_term(&mut self, p: VarId, q: VarId, c: f64) {
        if c == 0.0 {
            return;
        }
        let key = if p.0 <= q.0 { (p.0, q.0) } else { (q.0, p.0) };
        self.n = self.n.max(key.1 + 1);
        let slot = self.terms.entry(key).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// Grows the variable count to match `registry`.
    pub fn freeze(&mut self, registry: &VarRegistry) {
        self.n = self.n.max(registry.len());
    }

    pub fn scaled(&self, lambda: f64) -> Qubo {
        let mut out = Qubo {
            n: self.n,
            terms: BTreeMap::new(),
            offset: self.offset * lambda,
            tag: self.tag,
        };
        for (&k, &c) in &self.terms {
            let v = c * lambda;
            if v != 0.0 {
                out.terms.insert(k, v);
            }
        }
        out
    }

    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        self.terms
            .iter()
            .filter(|((p, q), _)| x[*p] && x[*q])
            .map(|(_, c)| c)
            .sum::<f64>()
            + self.offset
    }

    /// Dense symmetric matrix with the linear terms on the diagonal and each
    /// off-diagonal coefficient split evenly between `(p,q)` and `(q,p)`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (&(p, q), &c) in &self.terms {
            if p == q {
                m[p][p] += c;
            } else {
                m[p][q] += c / 2.0;
                m[q][p] += c / 2.0;
            }
        }
        m
    }

    /// Largest absolute coefficient, used to scale annealing schedules.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Linear coefficient per variable and the off-diagonal neighbours of
    /// each variable, as used by local-field solvers.
    pub fn local_structure(&self) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
        let mut linear = vec![0.0; self.n];
        let mut nbrs = vec![Vec::new(); self.n];
        for (&(p, q), &c) in &self.terms {
            if p == q {
                linear[p] += c;
            } else {
                nbrs[p].push((q, c));
                nbrs[q].push((p, c));
            }
        }
        (linear, nbrs)
    }

    /// The QUBO over the variables left free by `fixed` (`Some(b)` pins a
    /// variable to `b`). Returns the reduced problem and, for each of its
    /// variables, the index it had here.
    pub fn restrict(&self, fixed: &[Option<bool>]) -> Result<(Qubo, Vec<usize>)> {
        if fixed.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: fixed.len(),
            });
        }
        let free: Vec<usize> = (0..self.n).filter(|&i| fixed[i].is_none()).collect();
        let mut new_index = vec![usize::MAX; self.n];
        for (j, &i) in free.iter().enumerate() {
            new_index[i] = j;
        }
        let mut out = Qubo::new(free.len());
        out.offset = self.offset;
        for (&(p, q), &c) in &self.terms {
            match (fixed[p], fixed[q]) {
                (Some(a), Some(b)) => {
                    if a && b {
                        out.offset += c;
                    }
                }
                (Some(a), None) => {
                    if a {
                        out.add_linear(VarId(new_index[q]), c);
                    }
                }
                (None, Some(b)) => {
                    if b {
                        out.add_linear(VarId(new_index[p]), c);
                    }
                }
                (None, None) => out.add_term(VarId(new_index[p]), VarId(new_index[q]), c),
            }
        }
        Ok((out, free))
    }

    pub fn sha256(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update(self.offset.to_le_bytes());
        for (&(p, q), &c) in &self.terms {
            h.update((p as u64).to_le_bytes());
            h.update((q as u64).to_le_bytes());
            h.update(c.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Coefficient-wise weighted sum `Σ λ_i Q_i`.
pub fn compose(parts: &[(&Qubo, f64)]) -> Result<Qubo> {
    let mut tag = None;
    for (q, _) in parts {
        match (tag, q.tag) {
            (Some(a), Some(b)) if a != b => return Err(Error::RegistryMismatch),
            (None, Some(b)) => tag = Some(b),
            _ => {}
        }
    }
    let mut out = Qubo {
        n: parts.iter().map(|(q, _)| q.n).max().unwrap_or(0),
        terms: BTreeMap::new(),
        offset: 0.0,
        tag,
    };
    for (q, lambda) in parts {
        out.offset += q.offset * lambda;
        for (&(p, r), &c) in &q.terms {
            out.add_term(VarId(p), VarId(r), c * lambda);
        }
    }
    Ok(out)
}
