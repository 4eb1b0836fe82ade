//! Compilers from [`NetworkProblem`] to QUBO.
//!
//! Three formulations share this module's machinery:
//!
//! * [`time`]: multicast trees with per-node integer "time" registers that
//!   forbid loops and cap latency;
//! * [`path`]: one unicast flow per sink, bound into trees by an edge-cost
//!   objective;
//! * [`spectrum`]: coloured trees per source for wavelength (RWA) and
//!   flexgrid super-channel (RSA) assignment.
//!
//! Every encoder returns an [`EncodedQubo`] whose [`Encoding`] records the
//! role of each variable so assignments can be decoded and, conversely,
//! route sets can be completed into assignments.

pub mod path;
pub mod spectrum;
pub mod time;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkProblem;
use crate::qubo::gadgets::{self, add_linear_eq};
use crate::qubo::{compose, BoundedInt, Category, PenaltyWeights, Qubo, VarId, VarRegistry};

pub use spectrum::{catalog, superchannels_block, SuperChannel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Time,
    Path,
    Rwa,
    Rsa,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Time => "time",
            Formulation::Path => "path",
            Formulation::Rwa => "rwa",
            Formulation::Rsa => "rsa",
        })
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Formulation::Time),
            "path" => Ok(Formulation::Path),
            "rwa" => Ok(Formulation::Rwa),
            "rsa" => Ok(Formulation::Rsa),
            _ => Err(Error::validation("formulation", format!("unknown formulation `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    /// Replace variables whose value is known up front (terminal node
    /// indicators, impossible colour choices) by constants instead of
    /// allocating them and pinning them with penalties.
    pub substitute_constants: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            substitute_constants: true,
        }
    }
}

impl EncodeOptions {
    pub fn unsubstituted() -> Self {
        EncodeOptions {
            substitute_constants: false,
        }
    }
}

/// Which tree a per-tree variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TreeKey {
    /// Commodity `com` in solution `sol` (time formulation).
    Commodity { sol: usize, com: usize },
    /// Tree grown from `source` on channel `channel` (spectrum formulations).
    Channel { source: usize, channel: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlackOf {
    Ordering { tree: TreeKey, edge: usize },
    Capacity { sol: usize, edge: usize },
    Cost { sol: usize },
    Latency { sol: usize, com: usize, sink: usize },
}

/// Semantic role of one QUBO variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Node { tree: TreeKey, node: usize },
    TreeEdge { tree: TreeKey, edge: usize },
    SolutionEdge { sol: usize, edge: usize },
    CommodityEdge { sol: usize, com: usize, edge: usize },
    SinkEdge { sol: usize, com: usize, sink: usize, edge: usize },
    TimeBit { tree: TreeKey, node: usize, bit: usize },
    Product { tree: TreeKey, edge: usize, bit: usize },
    Srg { sol: usize, group: usize },
    Delta { source: usize, channel: usize, com: usize },
    Zeta { source: usize, channel: usize, com: usize, sink: usize },
    Slack { of: SlackOf, bit: usize },
}

impl Role {
    /// Short name used in variable-count tables.
    pub fn kind(&self) -> &'static str {
        match self {
            Role::Node { .. } => "x",
            Role::TreeEdge { .. } | Role::CommodityEdge { .. } => "e_k",
            Role::SolutionEdge { .. } => "e",
            Role::SinkEdge { .. } => "e_t",
            Role::TimeBit { .. } => "t",
            Role::Product { .. } => "xi",
            Role::Srg { .. } => "srg",
            Role::Delta { .. } => "delta",
            Role::Zeta { .. } => "zeta",
            Role::Slack { of, .. } => match of {
                SlackOf::Ordering { .. } => "slack_ordering",
                SlackOf::Capacity { .. } => "slack_capacity",
                SlackOf::Cost { .. } => "slack_cost",
                SlackOf::Latency { .. } => "slack_latency",
            },
        }
    }
}

/// A value that is either a QUBO variable or a known constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lit {
    Var(VarId),
    Const(bool),
}

impl Lit {
    pub fn eval(self, x: &[bool]) -> bool {
        match self {
            Lit::Var(v) => x[v.0],
            Lit::Const(b) => b,
        }
    }
}

/// Auxiliary variables whose value follows from the others in any
/// zero-penalty assignment; used to complete partial assignments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Derived {
    Product { x: Lit, y: Lit, z: VarId },
    Or { target: VarId, inputs: Vec<Lit> },
    Slack { terms: Vec<(VarId, i64)>, rhs: i64, slack: BoundedInt },
}

/// Per-role variable counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarCounts(pub BTreeMap<String, usize>);

impl VarCounts {
    pub fn add(&mut self, kind: &str, n: usize) {
        if n > 0 {
            *self.0.entry(kind.to_owned()).or_insert(0) += n;
        }
    }

    pub fn get(&self, kind: &str) -> usize {
        self.0.get(kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

impl fmt::Display for VarCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k:>16} {v:>8}")?;
        }
        write!(f, "{:>16} {:>8}", "total", self.total())
    }
}

/// Variable map of a compiled problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub formulation: Formulation,
    pub options: EncodeOptions,
    pub labels: Vec<String>,
    pub roles: Vec<Role>,
    pub derived: Vec<Derived>,
    /// Channel catalogue for spectrum formulations (colours are width-1 channels).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<SuperChannel>,
    pub srg_ids: Vec<String>,
    /// Divisor applied to edge costs in the objective so that the whole
    /// objective stays below one penalty unit.
    pub objective_scale: f64,
}

impl Encoding {
    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, v: VarId) -> &Role {
        &self.roles[v.0]
    }

    pub fn vars_with<'a>(&'a self, pred: impl Fn(&Role) -> bool + 'a) -> impl Iterator<Item = VarId> + 'a {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, r)| pred(r))
            .map(|(i, _)| VarId(i))
    }

    pub fn role_counts(&self) -> VarCounts {
        let mut c = VarCounts::default();
        for r in &self.roles {
            c.add(r.kind(), 1);
        }
        c
    }

    /// Variables that fix the route structure: once they are set, the
    /// remaining variables split into small independent groups.
    pub fn pivot_vars(&self) -> Vec<VarId> {
        self.vars_with(|r| {
            matches!(
                r,
                Role::Node { .. }
                    | Role::TreeEdge { .. }
                    | Role::TimeBit { .. }
                    | Role::SinkEdge { .. }
                    | Role::Delta { .. }
            )
        })
        .collect()
    }

    /// Fills every derived variable of `x` from the primary ones.
    /// Returns `None` if some slack value is out of its register's range.
    pub fn complete_derived(&self, x: &mut [bool]) -> Option<()> {
        for d in &self.derived {
            match d {
                Derived::Product { x: a, y: b, z } => x[z.0] = a.eval(x) && b.eval(x),
                Derived::Or { target, inputs } => {
                    x[target.0] = inputs.iter().any(|l| l.eval(x));
                }
                Derived::Slack { terms, rhs, slack } => {
                    let lhs: i64 = terms.iter().filter(|(v, _)| x[v.0]).map(|(_, a)| a).sum();
                    let value = rhs - lhs;
                    if value < 0 {
                        return None;
                    }
                    slack.write(value as u64, x)?;
                }
            }
        }
        Some(())
    }
}

/// A compiled problem. `qubo = hard + objective`, and `hard` is the sum of
/// the per-category penalty `parts`.
#[derive(Clone, Debug)]
pub struct EncodedQubo {
    pub qubo: Qubo,
    pub hard: Qubo,
    pub parts: BTreeMap<Category, Qubo>,
    pub objective: Qubo,
    pub encoding: Encoding,
}

impl EncodedQubo {
    pub fn hard_energy(&self, x: &[bool]) -> Result<f64> {
        self.hard.energy(x)
    }

    /// Penalty contributed by each constraint category; zero entries omitted.
    pub fn violations(&self, x: &[bool]) -> Result<BTreeMap<Category, f64>> {
        let mut out = BTreeMap::new();
        for (&c, q) in &self.parts {
            let e = q.energy(x)?;
            if e != 0.0 {
                out.insert(c, e);
            }
        }
        Ok(out)
    }
}

/// Compiles `problem` with the chosen formulation.
pub fn encode(
    problem: &NetworkProblem,
    formulation: Formulation,
    weights: &PenaltyWeights,
    options: EncodeOptions,
) -> Result<EncodedQubo> {
    match formulation {
        Formulation::Time => time::encode_time_with(problem, weights, options),
        Formulation::Path => path::encode_path_with(problem, weights, options),
        Formulation::Rwa => spectrum::encode_rwa_with(problem, weights, options),
        Formulation::Rsa => spectrum::encode_rsa_with(problem, weights, options),
    }
}

/// Closed-form variable counts, computed without building the QUBO.
pub fn count_vars(problem: &NetworkProblem, formulation: Formulation, options: EncodeOptions) -> Result<VarCounts> {
    match formulation {
        Formulation::Time => Ok(time::count_vars_time_with(problem, options)),
        Formulation::Path => Ok(path::count_vars_path(problem)),
        Formulation::Rwa | Formulation::Rsa => spectrum::count_vars_spectrum_with(problem, formulation, options),
    }
}

/// Number of bits in a capped register for `0..=bound`: `⌈log₂(bound+1)⌉`.
pub fn register_bits(bound: u64) -> usize {
    (64 - bound.leading_zeros()) as usize
}

/// Smallest power of two strictly greater than `max_objective`.
pub(crate) fn objective_scale(max_objective: u64) -> f64 {
    (max_objective + 1).next_power_of_two() as f64
}

pub(crate) struct Builder<'a> {
    pub reg: VarRegistry,
    pub roles: Vec<Role>,
    pub derived: Vec<Derived>,
    pub parts: BTreeMap<Category, Qubo>,
    pub objective: Qubo,
    pub weights: &'a PenaltyWeights,
}

impl<'a> Builder<'a> {
    pub fn new(weights: &'a PenaltyWeights) -> Self {
        let reg = VarRegistry::new();
        let objective = reg.qubo();
        Builder {
            reg,
            roles: Vec::new(),
            derived: Vec::new(),
            parts: BTreeMap::new(),
            objective,
            weights,
        }
    }

    pub fn var(&mut self, label: String, role: Role) -> Result<VarId> {
        let v = self.reg.alloc(label)?;
        self.roles.push(role);
        debug_assert_eq!(self.roles.len(), self.reg.len());
        Ok(v)
    }

    fn lambda(&self, c: Category) -> f64 {
        self.weights.get(c)
    }

    fn part(&mut self, c: Category) -> &mut Qubo {
        let reg = &self.reg;
        self.parts.entry(c).or_insert_with(|| reg.qubo())
    }

    /// `Σ α·lit = rhs`, folding constants into the right-hand side.
    pub fn eq(&mut self, cat: Category, terms: &[(Lit, i64)], rhs: i64) {
        let (vars, rhs) = fold(terms, rhs);
        if vars.is_empty() && rhs == 0 {
            return;
        }
        let l = self.lambda(cat);
        add_linear_eq(self.part(cat), &vars, rhs, l);
    }

    /// `x ≤ y` on literals.
    pub fn leq(&mut self, cat: Category, x: Lit, y: Lit) -> Result<()> {
        let l = self.lambda(cat);
        let q = self.part(cat);
        match (x, y) {
            (Lit::Const(false), _) | (_, Lit::Const(true)) => {}
            (Lit::Var(a), Lit::Var(b)) => gadgets::add_leq_pair(q, a, b, l)?,
            (Lit::Const(true), Lit::Var(b)) => {
                q.add_linear(b, -l);
                q.add_offset(l);
            }
            (Lit::Var(a), Lit::Const(false)) => q.add_linear(a, l),
            (Lit::Const(true), Lit::Const(false)) => q.add_offset(l),
        }
        Ok(())
    }

    pub fn at_most_one(&mut self, cat: Category, x: VarId, y: VarId) -> Result<()> {
        let l = self.lambda(cat);
        gadgets::add_at_most_one_pair(self.part(cat), x, y, l)
    }

    /// `z = x·y`; a constant factor turns the product into an equality.
    pub fn product(&mut self, x: Lit, y: Lit, z: VarId) -> Result<()> {
        let l = self.lambda(Category::Product);
        let q = self.part(Category::Product);
        match (x, y) {
            (Lit::Var(a), Lit::Var(b)) => gadgets::add_product(q, a, b, z, l)?,
            (Lit::Const(true), Lit::Var(a)) | (Lit::Var(a), Lit::Const(true)) => {
                add_linear_eq(q, &[(z, 1), (a, -1)], 0, l)
            }
            _ => q.add_linear(z, l),
        }
        self.derived.push(Derived::Product { x, y, z });
        Ok(())
    }

    /// `Σ α·lit ≤ rhs` with a slack register labelled `label`.
    pub fn leq_sum(&mut self, cat: Category, label: &str, of: SlackOf, terms: &[(Lit, i64)], rhs: i64) -> Result<()> {
        let (vars, rhs) = fold(terms, rhs);
        let l = self.lambda(cat);
        let before = self.reg.len();
        let mut q = self.parts.remove(&cat).unwrap_or_else(|| self.reg.qubo());
        let slack = gadgets::add_linear_leq(&mut q, &mut self.reg, label, &vars, rhs, l);
        self.parts.insert(cat, q);
        let slack = slack?;
        for bit in 0..self.reg.len() - before {
            self.roles.push(Role::Slack { of, bit });
        }
        self.derived.push(Derived::Slack {
            terms: vars,
            rhs,
            slack,
        });
        Ok(())
    }

    pub fn or_lift(&mut self, target: VarId, inputs: Vec<Lit>) {
        self.derived.push(Derived::Or { target, inputs });
    }

    pub fn cost(&mut self, v: VarId, coefficient: f64) {
        self.objective.add_linear(v, coefficient);
    }

    pub fn finish(
        mut self,
        formulation: Formulation,
        options: EncodeOptions,
        channels: Vec<SuperChannel>,
        srg_ids: Vec<String>,
        objective_scale: f64,
    ) -> Result<EncodedQubo> {
        for q in self.parts.values_mut() {
            q.freeze(&self.reg);
        }
        self.objective.freeze(&self.reg);
        let mut hard = self.reg.qubo();
        hard.freeze(&self.reg);
        let parts: Vec<(&Qubo, f64)> = self.parts.values().map(|q| (q, 1.0)).collect();
        if !parts.is_empty() {
            hard = compose(&parts)?;
            hard.freeze(&self.reg);
        }
        let qubo = compose(&[(&hard, 1.0), (&self.objective, 1.0)])?;
        Ok(EncodedQubo {
            qubo,
            hard,
            parts: self.parts,
            objective: self.objective,
            encoding: Encoding {
                formulation,
                options,
                labels: self.reg.labels().to_vec(),
                roles: self.roles,
                derived: self.derived,
                channels,
                srg_ids,
                objective_scale,
            },
        })
    }
}

fn fold(terms: &[(Lit, i64)], rhs: i64) -> (Vec<(VarId, i64)>, i64) {
    let mut vars = Vec::with_capacity(terms.len());
    let mut rhs = rhs;
    for &(l, a) in terms {
        match l {
            Lit::Var(v) => vars.push((v, a)),
            Lit::Const(true) => rhs -= a,
            Lit::Const(false) => {}
        }
    }
    (vars, rhs)
}

/// Shared tree machinery: node and edge indicators, capped time registers,
/// products and the time-ordering rows for one tree.
pub(crate) struct TreeVars {
    pub x: Vec<Lit>,
    pub e: Vec<VarId>,
}

pub(crate) fn build_tree(
    b: &mut Builder,
    problem: &NetworkProblem,
    tree: TreeKey,
    tag: &str,
    roots: &[usize],
    pinned: &[usize],
    substitute: bool,
) -> Result<TreeVars> {
    let names = problem.nodes();
    let t_max = problem.t_max();

    let mut x = Vec::with_capacity(problem.num_nodes());
    for a in 0..problem.num_nodes() {
        if substitute && pinned.contains(&a) {
            x.push(Lit::Const(true));
        } else {
            let v = b.var(format!("x[{tag},a={}]", names[a]), Role::Node { tree, node: a })?;
            x.push(Lit::Var(v));
        }
    }
    let mut e = Vec::with_capacity(problem.num_edges());
    for edge in 0..problem.num_edges() {
        let r = problem.edge_ref(edge);
        e.push(b.var(format!("e[{tag},{r}]"), Role::TreeEdge { tree, edge })?);
    }
    let mut t = Vec::with_capacity(problem.num_nodes());
    for a in 0..problem.num_nodes() {
        let coeffs = crate::qubo::capped_coefficients(t_max);
        let mut bits = Vec::with_capacity(coeffs.len());
        for (j, c) in coeffs.into_iter().enumerate() {
            let v = b.var(
                format!("t[{tag},a={}]#{j}", names[a]),
                Role::TimeBit { tree, node: a, bit: j },
            )?;
            bits.push((v, c));
        }
        t.push(BoundedInt { bound: t_max, bits });
    }

    if !substitute {
        for &a in pinned {
            b.eq(Category::Terminal, &[(x[a], 1)], 1);
        }
    }

    // in-degree: roots have none, every other node has one iff it is in the tree
    for node in 0..problem.num_nodes() {
        let mut terms: Vec<(Lit, i64)> = problem
            .in_edges(node)
            .iter()
            .map(|&edge| (Lit::Var(e[edge]), 1))
            .collect();
        if !roots.contains(&node) {
            terms.push((x[node], -1));
        }
        b.eq(Category::Flow, &terms, 0);
    }

    for edge in 0..problem.num_edges() {
        let (from, to) = problem.endpoints(edge);
        b.leq(Category::Tree, Lit::Var(e[edge]), x[from])?;

        // ξ_j = e·t_{to,j}; then t_from ≥ latency·e + e·t_to
        let r = problem.edge_ref(edge);
        let mut terms: Vec<(Lit, i64)> = t[from].bits.iter().map(|&(v, c)| (Lit::Var(v), -(c as i64))).collect();
        let step = problem.edges()[edge].latency.max(1) as i64;
        terms.push((Lit::Var(e[edge]), step));
        for (j, &(tb, c)) in t[to].bits.iter().enumerate() {
            let xi = b.var(format!("xi[{tag},{r}]#{j}"), Role::Product { tree, edge, bit: j })?;
            b.product(Lit::Var(e[edge]), Lit::Var(tb), xi)?;
            terms.push((Lit::Var(xi), c as i64));
        }
        b.leq_sum(
            Category::Ordering,
            &format!("ord[{tag},{r}]"),
            SlackOf::Ordering { tree, edge },
            &terms,
            0,
        )?;
    }

    Ok(TreeVars { x, e })
}

/// Completes a tree's primary variables (x, e, t) into `assignment` from the
/// selected edge set. Node times are the longest remaining step sum to a
/// leaf. Returns `None` when a time exceeds `t_max` or the edges contain a
/// cycle.
pub(crate) fn write_tree(
    problem: &NetworkProblem,
    encoding: &Encoding,
    tree: TreeKey,
    edges: &std::collections::BTreeSet<usize>,
    extra_nodes: &[usize],
    x: &mut [bool],
) -> Option<()> {
    let n = problem.num_nodes();
    let mut in_tree = vec![false; n];
    for &a in extra_nodes {
        in_tree[a] = true;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &edge in edges {
        let (a, b) = problem.endpoints(edge);
        in_tree[a] = true;
        in_tree[b] = true;
        children[a].push(edge);
    }
    // longest path to a leaf, with cycle detection
    let mut time: Vec<Option<u64>> = vec![None; n];
    let mut state = vec![0u8; n];
    fn visit(
        v: usize,
        problem: &NetworkProblem,
        children: &[Vec<usize>],
        time: &mut [Option<u64>],
        state: &mut [u8],
    ) -> Option<u64> {
        match state[v] {
            2 => return time[v],
            1 => return None,
            _ => {}
        }
        state[v] = 1;
        let mut best = 0u64;
        for &edge in &children[v] {
            let (_, b) = problem.endpoints(edge);
            let step = problem.edges()[edge].latency.max(1);
            best = best.max(step + visit(b, problem, children, time, state)?);
        }
        state[v] = 2;
        time[v] = Some(best);
        Some(best)
    }
    for v in 0..n {
        visit(v, problem, &children, &mut time, &mut state)?;
    }

    let mut t_regs: BTreeMap<usize, Vec<(VarId, u64)>> = BTreeMap::new();
    for (i, role) in encoding.roles.iter().enumerate() {
        match *role {
            Role::Node { tree: tk, node } if tk == tree => x[i] = in_tree[node],
            Role::TreeEdge { tree: tk, edge } if tk == tree => x[i] = edges.contains(&edge),
            Role::TimeBit { tree: tk, node, .. } if tk == tree => {
                t_regs.entry(node).or_default().push((VarId(i), 0));
            }
            _ => {}
        }
    }
    let t_max = problem.t_max();
    let coeffs = crate::qubo::capped_coefficients(t_max);
    for (node, mut bits) in t_regs {
        for (slot, c) in bits.iter_mut().zip(&coeffs) {
            slot.1 = *c;
        }
        let reg = BoundedInt { bound: t_max, bits };
        reg.write(time[node].unwrap_or(0), x)?;
    }
    Some(())
}
