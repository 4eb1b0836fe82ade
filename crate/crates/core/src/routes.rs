//! Route sets: what an assignment means in network terms.
//!
//! [`decode`] reads a route set out of a QUBO assignment; [`witness`] goes
//! the other way and builds the assignment that encodes a given route set,
//! filling every auxiliary variable consistently.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encode::{write_tree, Encoding, Formulation, Role, SuperChannel, TreeKey};
use crate::error::{Error, Result};
use crate::fixtures::ReferenceRoutes;
use crate::model::{EdgeRef, NetworkProblem, NUM_SOLUTIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    /// One multicast tree per commodity.
    Tree,
    /// One flow per sink; a commodity's edges are the union of its flows.
    Path,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommodityRoutes {
    pub edges: BTreeSet<usize>,
    /// Per-sink flows, keyed by sink node. Empty for tree routes.
    pub sinks: BTreeMap<usize, BTreeSet<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub commodities: Vec<CommodityRoutes>,
}

impl Solution {
    pub fn used_edges(&self) -> BTreeSet<usize> {
        self.commodities.iter().flat_map(|c| c.edges.iter().copied()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RouteSet {
    Pair {
        kind: RouteKind,
        solutions: [Solution; NUM_SOLUTIONS],
    },
    Spectrum {
        channels: Vec<SuperChannel>,
        /// Edges of the tree grown from `source` on `channel`.
        trees: BTreeMap<(usize, usize), BTreeSet<usize>>,
        /// `(source, channel, commodity)` triples that are switched on.
        assignments: BTreeSet<(usize, usize, usize)>,
    },
}

fn empty_solution(problem: &NetworkProblem) -> Solution {
    Solution {
        commodities: vec![CommodityRoutes::default(); problem.commodities().len()],
    }
}

/// Reads the route set encoded by `x`.
pub fn decode(problem: &NetworkProblem, encoding: &Encoding, x: &[bool]) -> Result<RouteSet> {
    if x.len() != encoding.num_vars() {
        return Err(Error::LengthMismatch {
            expected: encoding.num_vars(),
            got: x.len(),
        });
    }
    let on = encoding.roles.iter().zip(x).filter(|(_, b)| **b).map(|(r, _)| r);
    match encoding.formulation {
        Formulation::Time | Formulation::Path => {
            let mut solutions = [empty_solution(problem), empty_solution(problem)];
            let kind = if encoding.formulation == Formulation::Time {
                RouteKind::Tree
            } else {
                RouteKind::Path
            };
            for role in on {
                match *role {
                    Role::TreeEdge {
                        tree: TreeKey::Commodity { sol, com },
                        edge,
                    } => {
                        solutions[sol].commodities[com].edges.insert(edge);
                    }
                    Role::SinkEdge { sol, com, sink, edge } => {
                        let c = &mut solutions[sol].commodities[com];
                        c.edges.insert(edge);
                        c.sinks.entry(sink).or_default().insert(edge);
                    }
                    _ => {}
                }
            }
            if kind == RouteKind::Path {
                for sol in &mut solutions {
                    for (com, c) in sol.commodities.iter_mut().enumerate() {
                        for &t in &problem.terminals(com).sinks {
                            c.sinks.entry(t).or_default();
                        }
                    }
                }
            }
            Ok(RouteSet::Pair { kind, solutions })
        }
        Formulation::Rwa | Formulation::Rsa => {
            let mut trees = BTreeMap::new();
            let mut assignments = BTreeSet::new();
            for role in on {
                match *role {
                    Role::TreeEdge {
                        tree: TreeKey::Channel { source, channel },
                        edge,
                    } => {
                        trees.entry((source, channel)).or_insert_with(BTreeSet::new).insert(edge);
                    }
                    Role::Delta { source, channel, com } => {
                        assignments.insert((source, channel, com));
                    }
                    _ => {}
                }
            }
            Ok(RouteSet::Spectrum {
                channels: encoding.channels.clone(),
                trees,
                assignments,
            })
        }
    }
}

/// Edges of the unique path from a root to `sink` inside a tree, following
/// parent pointers. `None` if the sink is not reached.
pub fn tree_path(problem: &NetworkProblem, edges: &BTreeSet<usize>, roots: &[usize], sink: usize) -> Option<BTreeSet<usize>> {
    let mut path = BTreeSet::new();
    let mut at = sink;
    while !roots.contains(&at) {
        let edge = *edges.iter().find(|&&e| problem.endpoints(e).1 == at)?;
        if !path.insert(edge) {
            return None;
        }
        at = problem.endpoints(edge).0;
    }
    Some(path)
}

impl RouteSet {
    /// Builds a route set from `a->b` edge lists per solution and commodity.
    /// Path routes get their per-sink flows from the tree paths.
    pub fn from_reference(problem: &NetworkProblem, kind: RouteKind, reference: &ReferenceRoutes) -> Result<Self> {
        let mut solutions = [empty_solution(problem), empty_solution(problem)];
        for (sol, coms) in reference.iter().enumerate() {
            if coms.len() != problem.commodities().len() {
                return Err(Error::validation(
                    format!("routes[{sol}]"),
                    format!("expected {} commodities, got {}", problem.commodities().len(), coms.len()),
                ));
            }
            for (com, list) in coms.iter().enumerate() {
                let edges = resolve(problem, list, &format!("routes[{sol}][{com}]"))?;
                let c = &mut solutions[sol].commodities[com];
                if kind == RouteKind::Path {
                    let term = problem.terminals(com);
                    for &t in &term.sinks {
                        let path = tree_path(problem, &edges, &term.sources, t).unwrap_or_default();
                        c.sinks.insert(t, path);
                    }
                }
                c.edges = edges;
            }
        }
        Ok(RouteSet::Pair { kind, solutions })
    }

    /// Builds a spectrum route set from `(source, channel, commodity keys,
    /// edges)` entries.
    pub fn spectrum_from(
        problem: &NetworkProblem,
        channels: Vec<SuperChannel>,
        trees: &[(&str, usize, &[&str], Vec<EdgeRef>)],
    ) -> Result<Self> {
        let mut out_trees = BTreeMap::new();
        let mut assignments = BTreeSet::new();
        for (i, (source, channel, coms, edges)) in trees.iter().enumerate() {
            let field = format!("trees[{i}]");
            let s = problem
                .node_index(&crate::model::NodeId::new(*source))
                .ok_or_else(|| Error::validation(&field, format!("unknown source `{source}`")))?;
            if *channel >= channels.len() {
                return Err(Error::validation(&field, format!("channel {channel} out of range")));
            }
            for key in coms.iter() {
                let com = problem
                    .commodities()
                    .iter()
                    .position(|c| c.key == *key)
                    .ok_or_else(|| Error::validation(&field, format!("unknown commodity `{key}`")))?;
                assignments.insert((s, *channel, com));
            }
            let set = resolve(problem, edges, &field)?;
            if !set.is_empty() {
                out_trees.insert((s, *channel), set);
            }
        }
        Ok(RouteSet::Spectrum {
            channels,
            trees: out_trees,
            assignments,
        })
    }

    pub fn kind(&self) -> Option<RouteKind> {
        match self {
            RouteSet::Pair { kind, .. } => Some(*kind),
            RouteSet::Spectrum { .. } => None,
        }
    }

    pub fn view(&self, problem: &NetworkProblem) -> RouteSetView {
        let names = |set: &BTreeSet<usize>| -> Vec<String> { set.iter().map(|&e| problem.edge_ref(e).to_string()).collect() };
        match self {
            RouteSet::Pair { kind, solutions } => RouteSetView::Pair {
                kind: *kind,
                solutions: solutions
                    .iter()
                    .map(|s| SolutionView {
                        commodities: s
                            .commodities
                            .iter()
                            .zip(problem.commodities())
                            .map(|(c, m)| CommodityView {
                                key: m.key.clone(),
                                edges: names(&c.edges),
                                sinks: c
                                    .sinks
                                    .iter()
                                    .map(|(&t, set)| (problem.nodes()[t].to_string(), names(set)))
                                    .collect(),
                            })
                            .collect(),
                    })
                    .collect(),
            },
            RouteSet::Spectrum {
                channels,
                trees,
                assignments,
            } => {
                let mut keys: BTreeSet<(usize, usize)> = trees.keys().copied().collect();
                keys.extend(assignments.iter().map(|&(s, c, _)| (s, c)));
                RouteSetView::Spectrum {
                    trees: keys
                        .into_iter()
                        .map(|(s, c)| TreeView {
                            source: problem.nodes()[s].to_string(),
                            channel: channels[c],
                            commodities: assignments
                                .iter()
                                .filter(|&&(a, b, _)| (a, b) == (s, c))
                                .map(|&(_, _, k)| problem.commodities()[k].key.clone())
                                .collect(),
                            edges: trees.get(&(s, c)).map(names).unwrap_or_default(),
                        })
                        .collect(),
                }
            }
        }
    }
}

fn resolve(problem: &NetworkProblem, list: &[EdgeRef], field: &str) -> Result<BTreeSet<usize>> {
    list.iter()
        .map(|r| {
            problem
                .edge_by_ref(r)
                .ok_or_else(|| Error::validation(field, format!("unknown edge `{r}`")))
        })
        .collect()
}

/// Name-based, serialisable form of a [`RouteSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RouteSetView {
    Pair { kind: RouteKind, solutions: Vec<SolutionView> },
    Spectrum { trees: Vec<TreeView> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionView {
    pub commodities: Vec<CommodityView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommodityView {
    pub key: String,
    pub edges: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sinks: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeView {
    pub source: String,
    pub channel: SuperChannel,
    pub commodities: Vec<String>,
    pub edges: Vec<String>,
}

/// The assignment that encodes `routes`, with every auxiliary variable set
/// to its consistent value. `None` when the route set cannot be expressed
/// (a node time or slack value falls outside its register).
pub fn witness(problem: &NetworkProblem, encoding: &Encoding, routes: &RouteSet) -> Option<Vec<bool>> {
    let mut x = vec![false; encoding.num_vars()];
    match (encoding.formulation, routes) {
        (Formulation::Time, RouteSet::Pair { solutions, .. }) => {
            for (sol, s) in solutions.iter().enumerate() {
                for (com, c) in s.commodities.iter().enumerate() {
                    let term = problem.terminals(com);
                    let pinned: Vec<usize> = term.sources.iter().chain(&term.sinks).copied().collect();
                    write_tree(problem, encoding, TreeKey::Commodity { sol, com }, &c.edges, &pinned, &mut x)?;
                }
            }
        }
        (Formulation::Path, RouteSet::Pair { solutions, .. }) => {
            for (i, role) in encoding.roles.iter().enumerate() {
                if let Role::SinkEdge { sol, com, sink, edge } = *role {
                    x[i] = solutions[sol].commodities[com]
                        .sinks
                        .get(&sink)
                        .is_some_and(|set| set.contains(&edge));
                }
            }
        }
        (
            Formulation::Rwa | Formulation::Rsa,
            RouteSet::Spectrum {
                trees, assignments, ..
            },
        ) => {
            let empty = BTreeSet::new();
            let keys: BTreeSet<(usize, usize)> = encoding
                .roles
                .iter()
                .filter_map(|r| match *r {
                    Role::TreeEdge {
                        tree: TreeKey::Channel { source, channel },
                        ..
                    } => Some((source, channel)),
                    _ => None,
                })
                .collect();
            for (source, channel) in keys {
                let edges = trees.get(&(source, channel)).unwrap_or(&empty);
                write_tree(problem, encoding, TreeKey::Channel { source, channel }, edges, &[source], &mut x)?;
            }
            for (i, role) in encoding.roles.iter().enumerate() {
                if let Role::Delta { source, channel, com } = *role {
                    x[i] = assignments.contains(&(source, channel, com));
                }
            }
            // an assignment the encoding has no variable for cannot be expressed
            for &(source, channel, com) in assignments {
                let present = encoding
                    .roles.contains(&Role::Delta { source, channel, com });
                if !present {
                    return None;
                }
            }
        }
        _ => return None,
    }
    encoding.complete_derived(&mut x)?;
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode, EncodeOptions};
    use crate::fixtures;
    use crate::qubo::PenaltyWeights;

    #[test]
    fn tree_path_follows_parents() {
        let p = fixtures::diamond_rwa(1);
        let e = |a: &str, b: &str| p.edge_by_ref(&EdgeRef::new(a, b)).unwrap();
        let tree = BTreeSet::from([e("S", "A"), e("A", "T")]);
        let s = p.node_index(&crate::model::NodeId::new("S")).unwrap();
        let t = p.node_index(&crate::model::NodeId::new("T")).unwrap();
        assert_eq!(tree_path(&p, &tree, &[s], t), Some(tree.clone()));
        let b = p.node_index(&crate::model::NodeId::new("B")).unwrap();
        assert_eq!(tree_path(&p, &tree, &[s], b), None);
    }

    #[test]
    fn spectrum_witness_round_trips() {
        let p = fixtures::diamond_rwa(2);
        for options in [EncodeOptions::default(), EncodeOptions::unsubstituted()] {
            let enc = encode(&p, Formulation::Rwa, &PenaltyWeights::default(), options).unwrap();
            let routes = RouteSet::spectrum_from(
                &p,
                enc.encoding.channels.clone(),
                &[("S", 1, &["k1"], vec![EdgeRef::new("S", "B"), EdgeRef::new("B", "T")])],
            )
            .unwrap();
            let x = witness(&p, &enc.encoding, &routes).unwrap();
            assert_eq!(enc.hard_energy(&x).unwrap(), 0.0);
            assert_eq!(decode(&p, &enc.encoding, &x).unwrap(), routes);
        }
    }

    #[test]
    fn witness_rejects_mismatched_kind() {
        let p = fixtures::problem_a();
        let enc = encode(&p, Formulation::Time, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
        let routes = RouteSet::Spectrum {
            channels: Vec::new(),
            trees: BTreeMap::new(),
            assignments: BTreeSet::new(),
        };
        assert!(witness(&p, &enc.encoding, &routes).is_none());
    }

    #[test]
    fn all_zero_decodes_to_empty_routes() {
        let p = fixtures::problem_b();
        let enc = encode(&p, Formulation::Path, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
        let routes = decode(&p, &enc.encoding, &vec![false; enc.qubo.num_vars()]).unwrap();
        let RouteSet::Pair { kind, solutions } = routes else { panic!() };
        assert_eq!(kind, RouteKind::Path);
        assert!(solutions.iter().all(|s| s.used_edges().is_empty()));
    }
}
