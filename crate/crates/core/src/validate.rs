//! Independent audit of decoded route sets against the network model.
//!
//! Hard violations make a route set invalid. Harmless oddities (relay
//! branches that lead nowhere, detached flow cycles, idle coloured trees)
//! are reported as warnings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encode::spectrum::demand_width;
use crate::encode::superchannels_block;
use crate::model::NetworkProblem;
use crate::routes::{RouteKind, RouteSet, Solution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinkLatency {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<usize>,
    pub commodity: String,
    pub sink: String,
    pub latency: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub sink_latencies: Vec<SinkLatency>,
    pub max_latency: Option<u64>,
    /// Total edge cost per solution (one entry for spectrum route sets).
    pub cost: Vec<u64>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn is_clean(&self) -> bool {
        self.valid && self.warnings.is_empty()
    }
}

#[derive(Default)]
struct Audit {
    checks: BTreeMap<&'static str, Vec<String>>,
    order: Vec<&'static str>,
    warnings: Vec<String>,
    latencies: Vec<SinkLatency>,
}

impl Audit {
    fn with(names: &[&'static str]) -> Self {
        let mut a = Audit::default();
        for &n in names {
            a.checks.insert(n, Vec::new());
            a.order.push(n);
        }
        a
    }

    fn fail(&mut self, check: &'static str, detail: String) {
        self.checks.get_mut(check).expect("declared check").push(detail);
    }

    fn warn(&mut self, w: String) {
        self.warnings.push(w);
    }

    fn finish(self, cost: Vec<u64>) -> ValidationReport {
        let checks: Vec<Check> = self
            .order
            .iter()
            .map(|&n| {
                let details = self.checks[n].clone();
                Check {
                    name: n.to_owned(),
                    passed: details.is_empty(),
                    details,
                }
            })
            .collect();
        let max_latency = self.latencies.iter().filter_map(|l| l.latency).max();
        ValidationReport {
            valid: checks.iter().all(|c| c.passed),
            checks,
            warnings: self.warnings,
            sink_latencies: self.latencies,
            max_latency,
            cost,
        }
    }
}

const PAIR_CHECKS: [&str; 6] = ["coverage", "tree", "latency", "capacity", "cost", "disjointness"];
const SPECTRUM_CHECKS: [&str; 6] = ["coverage", "tree", "latency", "colour", "width", "blocking"];

/// Nodes reachable from `roots` along `edges`.
fn reachable(problem: &NetworkProblem, edges: &BTreeSet<usize>, roots: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; problem.num_nodes()];
    let mut stack: Vec<usize> = roots.to_vec();
    for &r in roots {
        seen[r] = true;
    }
    while let Some(v) = stack.pop() {
        for &e in problem.out_edges(v) {
            let b = problem.endpoints(e).1;
            if edges.contains(&e) && !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

/// Shortest latency from any root along `edges`.
fn distances(problem: &NetworkProblem, edges: &BTreeSet<usize>, roots: &[usize]) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; problem.num_nodes()];
    for &r in roots {
        dist[r] = Some(0);
    }
    // Bellman-Ford; latencies are non-negative and graphs are small
    for _ in 0..problem.num_nodes() {
        let mut changed = false;
        for &e in edges {
            let (a, b) = problem.endpoints(e);
            if let Some(da) = dist[a] {
                let cand = da + problem.edges()[e].latency;
                if dist[b].is_none_or(|db| cand < db) {
                    dist[b] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

fn has_cycle(problem: &NetworkProblem, edges: &BTreeSet<usize>) -> Option<usize> {
    let n = problem.num_nodes();
    let mut state = vec![0u8; n];
    fn dfs(v: usize, problem: &NetworkProblem, edges: &BTreeSet<usize>, state: &mut [u8]) -> Option<usize> {
        state[v] = 1;
        for &e in problem.out_edges(v) {
            if !edges.contains(&e) {
                continue;
            }
            let b = problem.endpoints(e).1;
            match state[b] {
                1 => return Some(b),
                0 => {
                    if let Some(c) = dfs(b, problem, edges, state) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        state[v] = 2;
        None
    }
    (0..n).find_map(|v| if state[v] == 0 { dfs(v, problem, edges, &mut state) } else { None })
}

/// Depth of every node when each edge counts at least one unit; this is the
/// quantity that node time registers have to hold.
fn ordering_depth(problem: &NetworkProblem, edges: &BTreeSet<usize>, root: usize) -> u64 {
    let mut memo: BTreeMap<usize, u64> = BTreeMap::new();
    fn depth(v: usize, problem: &NetworkProblem, edges: &BTreeSet<usize>, memo: &mut BTreeMap<usize, u64>) -> u64 {
        if let Some(&d) = memo.get(&v) {
            return d;
        }
        memo.insert(v, 0);
        let d = problem
            .out_edges(v)
            .iter()
            .filter(|e| edges.contains(e))
            .map(|&e| problem.edges()[e].latency.max(1) + depth(problem.endpoints(e).1, problem, edges, memo))
            .max()
            .unwrap_or(0);
        memo.insert(v, d);
        d
    }
    depth(root, problem, edges, &mut memo)
}

/// Audits the structure of one multicast tree. Returns the distance vector.
fn audit_tree(
    a: &mut Audit,
    problem: &NetworkProblem,
    what: &str,
    edges: &BTreeSet<usize>,
    roots: &[usize],
    sinks: &[usize],
) -> Vec<Option<u64>> {
    let names = problem.nodes();
    let mut indeg = vec![0usize; problem.num_nodes()];
    let mut outdeg = vec![0usize; problem.num_nodes()];
    for &e in edges {
        let (x, y) = problem.endpoints(e);
        indeg[y] += 1;
        outdeg[x] += 1;
    }
    for (v, &d) in indeg.iter().enumerate() {
        if roots.contains(&v) && d > 0 {
            a.fail("tree", format!("{what}: source {} has an incoming edge", names[v]));
        } else if d > 1 {
            a.fail("tree", format!("{what}: node {} has in-degree {d}", names[v]));
        }
    }
    if let Some(v) = has_cycle(problem, edges) {
        a.fail("tree", format!("{what}: directed cycle through {}", names[v]));
    }
    let seen = reachable(problem, edges, roots);
    for &e in edges {
        if !seen[problem.endpoints(e).0] {
            a.fail("tree", format!("{what}: edge {} is not connected to a source", problem.edge_ref(e)));
        }
    }
    for v in 0..problem.num_nodes() {
        if seen[v] && outdeg[v] == 0 && !roots.contains(&v) && !sinks.contains(&v) {
            a.warn(format!("{what}: relay {} leads to no sink", names[v]));
        }
    }
    for &r in roots {
        if ordering_depth(problem, edges, r) > problem.t_max() {
            a.warn(format!(
                "{what}: zero-latency edges push the ordering depth below {} past t_max",
                names[r]
            ));
        }
    }
    distances(problem, edges, roots)
}

fn audit_solution(a: &mut Audit, problem: &NetworkProblem, kind: RouteKind, sol: usize, s: &Solution) {
    let names = problem.nodes();
    let t_max = problem.t_max();
    for (com, c) in s.commodities.iter().enumerate() {
        let term = problem.terminals(com);
        let key = &problem.commodities()[com].key;
        let what = format!("solution {sol} commodity {key}");
        match kind {
            RouteKind::Tree => {
                let dist = audit_tree(a, problem, &what, &c.edges, &term.sources, &term.sinks);
                for &t in &term.sinks {
                    if dist[t].is_none() {
                        a.fail("coverage", format!("{what}: sink {} not reached", names[t]));
                    }
                    record_latency(a, Some(sol), key, &names[t].to_string(), dist[t], t_max);
                }
            }
            RouteKind::Path => {
                for &t in &term.sinks {
                    let route = c.sinks.get(&t).cloned().unwrap_or_default();
                    let what = format!("{what} sink {}", names[t]);
                    audit_flow(a, problem, &what, &route, &term.sources, t);
                    let dist = distances(problem, &route, &term.sources);
                    if dist[t].is_none() {
                        a.fail("coverage", format!("{what}: not reached"));
                    }
                    record_latency(a, Some(sol), key, &names[t].to_string(), dist[t], t_max);
                }
            }
        }
    }

    let mut load: BTreeMap<usize, u64> = BTreeMap::new();
    for (com, c) in s.commodities.iter().enumerate() {
        for &e in &c.edges {
            *load.entry(e).or_insert(0) += problem.commodities()[com].demand;
        }
    }
    for (e, l) in load {
        let cap = problem.edges()[e].capacity;
        if l > cap {
            a.fail(
                "capacity",
                format!("solution {sol}: edge {} carries {l} > capacity {cap}", problem.edge_ref(e)),
            );
        }
    }

    if let Some(w) = problem.cost_threshold() {
        let cost = solution_cost(problem, s);
        if cost > w {
            a.fail("cost", format!("solution {sol}: cost {cost} > threshold {w}"));
        }
    }
}

fn record_latency(a: &mut Audit, sol: Option<usize>, key: &str, sink: &str, latency: Option<u64>, t_max: u64) {
    if let Some(l) = latency {
        if l > t_max {
            let who = sol.map_or(String::new(), |s| format!("solution {s} "));
            a.fail("latency", format!("{who}commodity {key} sink {sink}: latency {l} > {t_max}"));
        }
    }
    a.latencies.push(SinkLatency {
        solution: sol,
        commodity: key.to_owned(),
        sink: sink.to_owned(),
        latency,
    });
}

/// Per-sink flow: unreachable parts are stripped with a warning; anything
/// beyond a single simple path is reported as inefficiency.
fn audit_flow(a: &mut Audit, problem: &NetworkProblem, what: &str, route: &BTreeSet<usize>, sources: &[usize], sink: usize) {
    let seen = reachable(problem, route, sources);
    let attached: BTreeSet<usize> = route.iter().copied().filter(|&e| seen[problem.endpoints(e).0]).collect();
    let detached = route.len() - attached.len();
    if detached > 0 {
        a.warn(format!("{what}: {detached} detached edge(s) ignored"));
    }
    let mut indeg = vec![0usize; problem.num_nodes()];
    let mut outdeg = vec![0usize; problem.num_nodes()];
    for &e in &attached {
        let (x, y) = problem.endpoints(e);
        outdeg[x] += 1;
        indeg[y] += 1;
    }
    if attached.iter().any(|&e| sources.contains(&problem.endpoints(e).1)) {
        a.warn(format!("{what}: flow re-enters a source"));
    }
    if outdeg[sink] > 0 {
        a.warn(format!("{what}: flow continues past its sink"));
    }
    let branching = (0..problem.num_nodes()).any(|v| indeg[v] > 1 || outdeg[v] > 1);
    if branching || has_cycle(problem, &attached).is_some() {
        a.warn(format!("{what}: flow is not a simple path"));
    }
}

fn solution_cost(problem: &NetworkProblem, s: &Solution) -> u64 {
    s.used_edges().iter().map(|&e| problem.edges()[e].cost).sum()
}

/// Whether solution `s` (of the given kind) uses a member of the group.
fn touches(problem: &NetworkProblem, kind: RouteKind, s: &Solution, nodes: &[usize], edges: &[usize]) -> bool {
    let used = s.used_edges();
    if edges.iter().any(|e| used.contains(e)) {
        return true;
    }
    let mut touched: BTreeSet<usize> = used
        .iter()
        .flat_map(|&e| {
            let (a, b) = problem.endpoints(e);
            [a, b]
        })
        .collect();
    if kind == RouteKind::Tree {
        touched.extend(problem.terminal_nodes());
    }
    nodes.iter().any(|n| touched.contains(n))
}

pub fn validate(problem: &NetworkProblem, routes: &RouteSet) -> ValidationReport {
    match routes {
        RouteSet::Pair { kind, solutions } => {
            let mut a = Audit::with(&PAIR_CHECKS);
            for (sol, s) in solutions.iter().enumerate() {
                audit_solution(&mut a, problem, *kind, sol, s);
            }
            for g in problem.resolved_srgs() {
                if solutions.iter().all(|s| touches(problem, *kind, s, &g.nodes, &g.edges)) {
                    a.fail("disjointness", format!("both solutions use risk group {}", g.id));
                }
            }
            a.finish(solutions.iter().map(|s| solution_cost(problem, s)).collect())
        }
        RouteSet::Spectrum {
            channels,
            trees,
            assignments,
        } => validate_spectrum(problem, channels, trees, assignments),
    }
}

fn validate_spectrum(
    problem: &NetworkProblem,
    channels: &[crate::encode::SuperChannel],
    trees: &BTreeMap<(usize, usize), BTreeSet<usize>>,
    assignments: &BTreeSet<(usize, usize, usize)>,
) -> ValidationReport {
    let names = problem.nodes();
    let mut a = Audit::with(&SPECTRUM_CHECKS);
    let empty = BTreeSet::new();
    let tree_of = |s: usize, c: usize| trees.get(&(s, c)).unwrap_or(&empty);
    let label = |s: usize, c: usize| {
        let ch = channels[c];
        format!("tree {}@[{},{})", names[s], ch.start, ch.end())
    };

    // structure of every tree that carries edges
    let mut dist: BTreeMap<(usize, usize), Vec<Option<u64>>> = BTreeMap::new();
    for (&(s, c), edges) in trees {
        let sinks: Vec<usize> = assignments
            .iter()
            .filter(|&&(x, y, _)| (x, y) == (s, c))
            .flat_map(|&(_, _, k)| problem.terminals(k).sinks.clone())
            .collect();
        let d = audit_tree(&mut a, problem, &label(s, c), edges, &[s], &sinks);
        if !assignments.iter().any(|&(x, y, _)| (x, y) == (s, c)) {
            a.warn(format!("{}: carries edges but serves no commodity", label(s, c)));
        }
        dist.insert((s, c), d);
    }

    for (com, m) in problem.commodities().iter().enumerate() {
        let term = problem.terminals(com);
        for s in problem.all_sources() {
            let chosen: Vec<usize> = assignments
                .iter()
                .filter(|&&(x, _, k)| x == s && k == com)
                .map(|&(_, c, _)| c)
                .collect();
            let expected = usize::from(term.sources.contains(&s));
            if chosen.len() != expected {
                a.fail(
                    "colour",
                    format!(
                        "commodity {} at source {}: {} channel(s) chosen, expected {expected}",
                        m.key,
                        names[s],
                        chosen.len()
                    ),
                );
            }
            let w = demand_width(problem, com);
            for c in chosen {
                if channels[c].width != w {
                    a.fail(
                        "width",
                        format!("commodity {} on {}: width {} != {w}", m.key, label(s, c), channels[c].width),
                    );
                }
            }
        }
        for &t in &term.sinks {
            let covering: Vec<(usize, usize)> = assignments
                .iter()
                .filter(|&&(s, c, k)| {
                    k == com && (s == t || reachable(problem, tree_of(s, c), &[s])[t])
                })
                .map(|&(s, c, _)| (s, c))
                .collect();
            if covering.len() != 1 {
                a.fail(
                    "coverage",
                    format!("commodity {} sink {}: covered {} times", m.key, names[t], covering.len()),
                );
            }
            let latency = covering
                .iter()
                .filter_map(|&(s, c)| match dist.get(&(s, c)) {
                    Some(d) => d[t],
                    None => (s == t).then_some(0),
                })
                .min();
            record_latency(&mut a, None, &m.key, &names[t].to_string(), latency, problem.t_max());
        }
    }

    let mut per_tree: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(s, c, _) in assignments {
        *per_tree.entry((s, c)).or_insert(0) += 1;
    }
    for ((s, c), n) in per_tree {
        if n > 1 {
            a.fail("colour", format!("{} serves {n} commodities", label(s, c)));
        }
    }

    let keys: Vec<(usize, usize)> = trees.keys().copied().collect();
    for (i, &(sa, ca)) in keys.iter().enumerate() {
        for &(sb, cb) in &keys[i + 1..] {
            if !superchannels_block(channels[ca], channels[cb]) {
                continue;
            }
            for e in trees[&(sa, ca)].intersection(&trees[&(sb, cb)]) {
                a.fail(
                    "blocking",
                    format!("{} and {} share edge {}", label(sa, ca), label(sb, cb), problem.edge_ref(*e)),
                );
            }
        }
    }

    let cost = trees.values().flatten().map(|&e| problem.edges()[e].cost).sum();
    a.finish(vec![cost])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub resilient: bool,
    /// Risk groups whose removal leaves no working solution.
    pub fatal_groups: Vec<String>,
}

/// Removes each risk group in turn and checks that at least one of the two
/// solutions still routes every commodity on what remains.
pub fn resilience_check(problem: &NetworkProblem, routes: &RouteSet) -> Option<ResilienceReport> {
    let RouteSet::Pair { kind, solutions } = routes else {
        return None;
    };
    let mut fatal = Vec::new();
    for g in problem.resolved_srgs() {
        let reduced = problem.without(&g.nodes, &g.edges);
        let survives = solutions.iter().any(|s| match remap(problem, &reduced, s) {
            Some(s2) => {
                let mut a = Audit::with(&PAIR_CHECKS);
                audit_solution(&mut a, &reduced, *kind, 0, &s2);
                a.finish(Vec::new()).valid
            }
            None => false,
        });
        if !survives {
            fatal.push(g.id);
        }
    }
    Some(ResilienceReport {
        resilient: fatal.is_empty(),
        fatal_groups: fatal,
    })
}

fn remap(from: &NetworkProblem, to: &NetworkProblem, s: &Solution) -> Option<Solution> {
    let map = |set: &BTreeSet<usize>| -> Option<BTreeSet<usize>> {
        set.iter().map(|&e| to.edge_by_ref(&from.edge_ref(e))).collect()
    };
    let mut out = Solution::default();
    for c in &s.commodities {
        let mut sinks = BTreeMap::new();
        for (&t, set) in &c.sinks {
            sinks.insert(t, map(set)?);
        }
        out.commodities.push(crate::routes::CommodityRoutes {
            edges: map(&c.edges)?,
            sinks,
        });
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ReferenceRoutes};
    use crate::model::{EdgeRef, NetworkProblem, SpectrumSpec};
    use crate::routes::RouteKind;

    fn pair(problem: &NetworkProblem, reference: &ReferenceRoutes) -> RouteSet {
        RouteSet::from_reference(problem, RouteKind::Tree, reference).unwrap()
    }

    fn failed(report: &ValidationReport) -> Vec<&str> {
        report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    #[test]
    fn reference_is_clean() {
        let p = fixtures::problem_a();
        let r = validate(&p, &pair(&p, &fixtures::reference_a()));
        assert!(r.is_clean(), "{r:#?}");
        assert_eq!(r.checks.len(), PAIR_CHECKS.len());
        assert!(r.max_latency.unwrap() <= p.t_max());
    }

    #[test]
    fn shared_edge_breaks_disjointness_and_resilience() {
        let p = fixtures::problem_a();
        let mut reference = fixtures::reference_a();
        let borrowed = reference[0][0][0].clone();
        reference[1][0].push(borrowed);
        let routes = pair(&p, &reference);
        let r = validate(&p, &routes);
        assert!(!r.valid);
        assert!(failed(&r).contains(&"disjointness"));
        let res = resilience_check(&p, &routes).unwrap();
        assert!(!res.resilient);
        assert!(!res.fatal_groups.is_empty());
    }

    #[test]
    fn dropped_sink_edge_fails_coverage() {
        let p = fixtures::problem_a();
        let mut reference = fixtures::reference_a();
        reference[0][0].retain(|e| e.to.as_str() != "O");
        let r = validate(&p, &pair(&p, &reference));
        assert_eq!(failed(&r), ["coverage"]);
    }

    #[test]
    fn tight_latency_cap_fails() {
        let mut file = fixtures::problem_a().file().clone();
        file.t_max = 5;
        let p = NetworkProblem::from_file(file).unwrap();
        let r = validate(&p, &pair(&p, &fixtures::reference_a()));
        assert!(failed(&r).contains(&"latency"));
        assert!(r.max_latency.unwrap() > 5);
    }

    #[test]
    fn spectrum_blocking_and_width() {
        let mut file = fixtures::diamond_rwa(1).file().clone();
        file.spectrum = Some(SpectrumSpec::rsa(4, 2, [("k1".to_owned(), 2)].into()));
        let p = NetworkProblem::from_file(file).unwrap();
        let channels = crate::encode::catalog(p.spectrum().unwrap());
        let wide = channels.iter().position(|c| c.width == 2 && c.start == 0).unwrap();
        let narrow = channels.iter().position(|c| c.width == 1 && c.start == 1).unwrap();
        let path = |mid: &str| vec![EdgeRef::new("S", mid), EdgeRef::new(mid, "T")];

        let ok = RouteSet::spectrum_from(&p, channels.clone(), &[("S", wide, &["k1"], path("A"))]).unwrap();
        assert!(validate(&p, &ok).is_clean());

        let thin = RouteSet::spectrum_from(&p, channels.clone(), &[("S", narrow, &["k1"], path("A"))]).unwrap();
        assert!(failed(&validate(&p, &thin)).contains(&"width"));

        // an idle tree on an overlapping channel still blocks the shared edge
        let clash = RouteSet::spectrum_from(
            &p,
            channels,
            &[("S", wide, &["k1"], path("A")), ("S", narrow, &[], path("A"))],
        )
        .unwrap();
        assert!(failed(&validate(&p, &clash)).contains(&"blocking"));
    }
}
