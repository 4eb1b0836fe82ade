//! Network model: directed graph, commodities, shared risk groups and the
//! global thresholds of a resilient routing instance.
//!
//! A [`NetworkProblem`] is always validated. It can only be built through
//! [`NetworkProblem::from_file`] (or deserialization, which goes through the
//! same path), so every index it hands out is known to be in range.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Resilience is pairwise: every problem asks for exactly two solutions.
pub const NUM_SOLUTIONS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> Self {
        NodeId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// A directed edge reference, written `from->to` in problem files.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef {
    pub from: NodeId,
    pub to: NodeId,
}

impl EdgeRef {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        EdgeRef {
            from: NodeId(from.into()),
            to: NodeId(to.into()),
        }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl std::str::FromStr for EdgeRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once("->")
            .ok_or_else(|| format!("edge reference `{s}` is not of the form `from->to`"))?;
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() {
            return Err(format!("edge reference `{s}` has an empty endpoint"));
        }
        Ok(EdgeRef::new(a, b))
    }
}

impl Serialize for EdgeRef {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EdgeRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub latency: u64,
    pub capacity: u64,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commodity {
    pub key: String,
    pub sources: Vec<NodeId>,
    pub sinks: Vec<NodeId>,
    pub demand: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedRiskGroup {
    pub id: String,
    #[serde(default)]
    pub nodes: Vec<NodeId>,
    #[serde(default)]
    pub edges: Vec<EdgeRef>,
}

impl SharedRiskGroup {
    pub fn len(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DisjointnessMode {
    #[serde(rename = "edge")]
    Edge,
    #[serde(rename = "node")]
    Node,
    #[serde(rename = "srg-explicit")]
    SrgExplicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Rwa,
    Rsa,
}

/// Wavelength (RWA) or flexgrid slot (RSA) parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub mode: SpectrumMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colours: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width: Option<usize>,
    /// Required slot width per commodity key (RSA only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub demand_widths: BTreeMap<String, usize>,
}

impl SpectrumSpec {
    pub fn rwa(colours: usize) -> Self {
        SpectrumSpec {
            mode: SpectrumMode::Rwa,
            colours: Some(colours),
            slots: None,
            max_width: None,
            demand_widths: BTreeMap::new(),
        }
    }

    pub fn rsa(slots: usize, max_width: usize, demand_widths: BTreeMap<String, usize>) -> Self {
        SpectrumSpec {
            mode: SpectrumMode::Rsa,
            colours: None,
            slots: Some(slots),
            max_width: Some(max_width),
            demand_widths,
        }
    }
}

/// On-disk layout of a problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
    pub commodities: Vec<Commodity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub srgs: Vec<SharedRiskGroup>,
    pub t_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_threshold: Option<u64>,
    pub disjointness_mode: DisjointnessMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
}

/// Index-resolved commodity terminals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terminals {
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
}

/// A risk group with members resolved to node and edge indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedSrg {
    pub id: String,
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkProblem {
    file: ProblemFile,
    node_index: HashMap<NodeId, usize>,
    edge_index: HashMap<(usize, usize), usize>,
    endpoints: Vec<(usize, usize)>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    terminals: Vec<Terminals>,
}

impl NetworkProblem {
    pub fn from_file(file: ProblemFile) -> Result<Self> {
        if file.t_max == 0 {
            return Err(Error::validation("t_max", "must be positive"));
        }

        let mut node_index = HashMap::with_capacity(file.nodes.len());
        for (i, n) in file.nodes.iter().enumerate() {
            if n.0.is_empty() {
                return Err(Error::validation(format!("nodes[{i}]"), "empty node id"));
            }
            if node_index.insert(n.clone(), i).is_some() {
                return Err(Error::validation(
                    format!("nodes[{i}]"),
                    format!("duplicate node `{n}`"),
                ));
            }
        }
        let lookup = |field: String, n: &NodeId| -> Result<usize> {
            node_index
                .get(n)
                .copied()
                .ok_or_else(|| Error::validation(field, format!("unknown node `{n}`")))
        };

        let nv = file.nodes.len();
        let mut edge_index = HashMap::with_capacity(file.edges.len());
        let mut endpoints = Vec::with_capacity(file.edges.len());
        let mut in_edges = vec![Vec::new(); nv];
        let mut out_edges = vec![Vec::new(); nv];
        for (i, e) in file.edges.iter().enumerate() {
            let a = lookup(format!("edges[{i}].from"), &e.from)?;
            let b = lookup(format!("edges[{i}].to"), &e.to)?;
            if a == b {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("self loop at `{}`", e.from),
                ));
            }
            if edge_index.insert((a, b), i).is_some() {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("parallel edge {}->{}", e.from, e.to),
                ));
            }
            endpoints.push((a, b));
            out_edges[a].push(i);
            in_edges[b].push(i);
        }

        let mut keys = BTreeSet::new();
        let mut terminals = Vec::with_capacity(file.commodities.len());
        for (k, c) in file.commodities.iter().enumerate() {
            if !keys.insert(c.key.as_str()) {
                return Err(Error::validation(
                    format!("commodities[{k}].key"),
                    format!("duplicate commodity `{}`", c.key),
                ));
            }
            if c.demand == 0 {
                return Err(Error::validation(
                    format!("commodities[{k}].demand"),
                    "must be positive",
                ));
            }
            if c.sources.is_empty() {
                return Err(Error::validation(format!("commodities[{k}].sources"), "empty"));
            }
            if c.sinks.is_empty() {
                return Err(Error::validation(format!("commodities[{k}].sinks"), "empty"));
            }
            let mut sources = Vec::new();
            for (j, s) in c.sources.iter().enumerate() {
                let v = lookup(format!("commodities[{k}].sources[{j}]"), s)?;
                if !sources.contains(&v) {
                    sources.push(v);
                }
            }
            let mut sinks = Vec::new();
            for (j, t) in c.sinks.iter().enumerate() {
                let v = lookup(format!("commodities[{k}].sinks[{j}]"), t)?;
                if sources.contains(&v) {
                    return Err(Error::validation(
                        format!("commodities[{k}].sinks[{j}]"),
                        format!("`{t}` is also a source"),
                    ));
                }
                if !sinks.contains(&v) {
                    sinks.push(v);
                }
            }
            terminals.push(Terminals { sources, sinks });
        }

        let mut srg_ids = BTreeSet::new();
        for (j, g) in file.srgs.iter().enumerate() {
            if !srg_ids.insert(g.id.as_str()) {
                return Err(Error::validation(
                    format!("srgs[{j}].id"),
                    format!("duplicate group `{}`", g.id),
                ));
            }
            if g.is_empty() {
                return Err(Error::validation(format!("srgs[{j}]"), "group has no members"));
            }
            for (m, n) in g.nodes.iter().enumerate() {
                lookup(format!("srgs[{j}].nodes[{m}]"), n)?;
            }
            for (m, e) in g.edges.iter().enumerate() {
                let field = format!("srgs[{j}].edges[{m}]");
                let a = lookup(field.clone(), &e.from)?;
                let b = lookup(field.clone(), &e.to)?;
                if !edge_index.contains_key(&(a, b)) {
                    return Err(Error::validation(field, format!("unknown edge `{e}`")));
                }
            }
        }

        if let Some(spec) = &file.spectrum {
            validate_spectrum(spec, &file.commodities)?;
        }

        Ok(NetworkProblem {
            file,
            node_index,
            edge_index,
            endpoints,
            in_edges,
            out_edges,
            terminals,
        })
    }

    pub fn file(&self) -> &ProblemFile {
        &self.file
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.file.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.file.edges
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.file.commodities
    }

    pub fn t_max(&self) -> u64 {
        self.file.t_max
    }

    pub fn cost_threshold(&self) -> Option<u64> {
        self.file.cost_threshold
    }

    pub fn disjointness_mode(&self) -> DisjointnessMode {
        self.file.disjointness_mode
    }

    pub fn spectrum(&self) -> Option<&SpectrumSpec> {
        self.file.spectrum.as_ref()
    }

    pub fn num_nodes(&self) -> usize {
        self.file.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.file.edges.len()
    }

    pub fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_index.get(&(from, to)).copied()
    }

    pub fn edge_by_ref(&self, r: &EdgeRef) -> Option<usize> {
        let a = self.node_index(&r.from)?;
        let b = self.node_index(&r.to)?;
        self.edge_index(a, b)
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.endpoints[edge]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn terminals(&self, commodity: usize) -> &Terminals {
        &self.terminals[commodity]
    }

    pub fn edge_ref(&self, edge: usize) -> EdgeRef {
        let e = &self.file.edges[edge];
        EdgeRef {
            from: e.from.clone(),
            to: e.to.clone(),
        }
    }

    /// Nodes that are a source or sink of some commodity.
    pub fn terminal_nodes(&self) -> BTreeSet<usize> {
        self.terminals
            .iter()
            .flat_map(|t| t.sources.iter().chain(&t.sinks).copied())
            .collect()
    }

    /// All distinct source nodes, in order of first appearance.
    pub fn all_sources(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for t in &self.terminals {
            for &s in &t.sources {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Risk groups implied by the disjointness mode.
    ///
    /// Node mode skips terminal nodes: both solutions must contain every
    /// source and sink, so those nodes cannot be made disjoint.
    pub fn derive_srgs(&self) -> Vec<SharedRiskGroup> {
        match self.file.disjointness_mode {
            DisjointnessMode::Edge => (0..self.num_edges())
                .map(|e| {
                    let r = self.edge_ref(e);
                    SharedRiskGroup {
                        id: format!("edge:{r}"),
                        nodes: Vec::new(),
                        edges: vec![r],
                    }
                })
                .collect(),
            DisjointnessMode::Node => {
                let terminals = self.terminal_nodes();
                (0..self.num_nodes())
                    .filter(|v| !terminals.contains(v))
                    .map(|v| {
                        let mut incident: Vec<usize> = self.in_edges[v]
                            .iter()
                            .chain(&self.out_edges[v])
                            .copied()
                            .collect();
                        incident.sort_unstable();
                        SharedRiskGroup {
                            id: format!("node:{}", self.file.nodes[v]),
                            nodes: vec![self.file.nodes[v].clone()],
                            edges: incident.into_iter().map(|e| self.edge_ref(e)).collect(),
                        }
                    })
                    .collect()
            }
            DisjointnessMode::SrgExplicit => self.file.srgs.clone(),
        }
    }

    pub fn resolved_srgs(&self) -> Vec<ResolvedSrg> {
        self.derive_srgs()
            .into_iter()
            .map(|g| ResolvedSrg {
                nodes: g
                    .nodes
                    .iter()
                    .map(|n| self.node_index[n])
                    .collect(),
                edges: g
                    .edges
                    .iter()
                    .map(|e| self.edge_by_ref(e).expect("validated edge reference"))
                    .collect(),
                id: g.id,
            })
            .collect()
    }

    /// Copy of this problem with the given nodes and edges deleted, along
    /// with every edge touching a deleted node. Terminals are kept so the
    /// caller can detect that a route through them is gone.
    pub fn without(&self, nodes: &[usize], edges: &[usize]) -> NetworkProblem {
        let mut file = self.file.clone();
        file.edges = self
            .file
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let (a, b) = self.endpoints[*i];
                !edges.contains(i) && !nodes.contains(&a) && !nodes.contains(&b)
            })
            .map(|(_, e)| e.clone())
            .collect();
        file.srgs.clear();
        file.disjointness_mode = DisjointnessMode::SrgExplicit;
        NetworkProblem::from_file(file).expect("removing resources keeps a valid problem")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("problem serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

impl Serialize for NetworkProblem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NetworkProblem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ProblemFile::deserialize(d)?;
        NetworkProblem::from_file(file).map_err(serde::de::Error::custom)
    }
}

fn validate_spectrum(spec: &SpectrumSpec, commodities: &[Commodity]) -> Result<()> {
    match spec.mode {
        SpectrumMode::Rwa => match spec.colours {
            Some(c) if c >= 1 => Ok(()),
            _ => Err(Error::validation("spectrum.colours", "RWA needs at least one colour")),
        },
        SpectrumMode::Rsa => {
            let slots = spec
                .slots
                .filter(|&s| s >= 1)
                .ok_or_else(|| Error::validation("spectrum.slots", "RSA needs at least one slot"))?;
            let max_width = spec
                .max_width
                .filter(|&w| w >= 1 && w <= slots)
                .ok_or_else(|| {
                    Error::validation("spectrum.max_width", "must satisfy 1 <= max_width <= slots")
                })?;
            for c in commodities {
                let w = spec.demand_widths.get(&c.key).copied().unwrap_or(1);
                if w == 0 || w > max_width {
                    return Err(Error::validation(
                        format!("spectrum.demand_widths.{}", c.key),
                        format!("width {w} outside 1..={max_width}"),
                    ));
                }
            }
            for k in spec.demand_widths.keys() {
                if !commodities.iter().any(|c| &c.key == k) {
                    return Err(Error::validation(
                        format!("spectrum.demand_widths.{k}"),
                        "unknown commodity",
                    ));
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(mode: DisjointnessMode) -> NetworkProblem {
        let json = format!(
            r#"{{
            "nodes": ["s", "r", "t"],
            "edges": [
                {{"from": "s", "to": "r", "latency": 1, "capacity": 1, "cost": 1}},
                {{"from": "r", "to": "t", "latency": 1, "capacity": 1, "cost": 1}},
                {{"from": "s", "to": "t", "latency": 3, "capacity": 1, "cost": 3}}
            ],
            "commodities": [{{"key": "k", "sources": ["s"], "sinks": ["t"], "demand": 1}}],
            "srgs": [
                {{"id": "g1", "nodes": ["r"]}},
                {{"id": "g2", "edges": ["s->t"]}}
            ],
            "t_max": 4,
            "disjointness_mode": "{}"
        }}"#,
            match mode {
                DisjointnessMode::Edge => "edge",
                DisjointnessMode::Node => "node",
                DisjointnessMode::SrgExplicit => "srg-explicit",
            }
        );
        NetworkProblem::from_json(&json).unwrap()
    }

    #[test]
    fn edge_mode_gives_one_group_per_edge() {
        let p = triangle(DisjointnessMode::Edge);
        let g = p.derive_srgs();
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|g| g.nodes.is_empty() && g.edges.len() == 1));
    }

    #[test]
    fn node_mode_skips_terminals_and_keeps_incident_edges() {
        let p = triangle(DisjointnessMode::Node);
        let g = p.resolved_srgs();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].nodes, vec![1]);
        assert_eq!(g[0].edges, vec![0, 1]);
    }

    #[test]
    fn explicit_mode_is_identity() {
        let p = triangle(DisjointnessMode::SrgExplicit);
        assert_eq!(p.derive_srgs(), p.file().srgs);
        assert_eq!(p.derive_srgs().len(), 2);
    }

    #[test]
    fn dangling_sink_is_named() {
        let json = r#"{"nodes":["s","t"],"edges":[],"commodities":[{"key":"k","sources":["s"],"sinks":["x"],"demand":1}],"t_max":3,"disjointness_mode":"edge"}"#;
        let err = NetworkProblem::from_json(json).unwrap_err().to_string();
        assert!(err.contains("commodities[0].sinks[0]"), "{err}");
        assert!(err.contains("`x`"), "{err}");
    }

    #[test]
    fn zero_t_max_and_empty_sinks_rejected() {
        let json = r#"{"nodes":["s","t"],"edges":[],"commodities":[{"key":"k","sources":["s"],"sinks":["t"],"demand":1}],"t_max":0,"disjointness_mode":"edge"}"#;
        assert!(NetworkProblem::from_json(json).unwrap_err().to_string().contains("t_max"));
        let json = r#"{"nodes":["s","t"],"edges":[],"commodities":[{"key":"k","sources":["s"],"sinks":[],"demand":1}],"t_max":2,"disjointness_mode":"edge"}"#;
        assert!(NetworkProblem::from_json(json).unwrap_err().to_string().contains("sinks"));
    }

    #[test]
    fn parallel_edges_and_bad_srg_edges_rejected() {
        let json = r#"{"nodes":["s","t"],"edges":[
            {"from":"s","to":"t","latency":1,"capacity":1,"cost":1},
            {"from":"s","to":"t","latency":2,"capacity":1,"cost":1}],
            "commodities":[{"key":"k","sources":["s"],"sinks":["t"],"demand":1}],"t_max":2,"disjointness_mode":"edge"}"#;
        assert!(NetworkProblem::from_json(json).is_err());
        let json = r#"{"nodes":["s","t"],"edges":[{"from":"s","to":"t","latency":1,"capacity":1,"cost":1}],
            "commodities":[{"key":"k","sources":["s"],"sinks":["t"],"demand":1}],
            "srgs":[{"id":"g","edges":["t->s"]}],"t_max":2,"disjointness_mode":"srg-explicit"}"#;
        let err = NetworkProblem::from_json(json).unwrap_err().to_string();
        assert!(err.contains("srgs[0].edges[0]"), "{err}");
    }

    #[test]
    fn without_drops_incident_edges() {
        let p = triangle(DisjointnessMode::Node);
        let q = p.without(&[1], &[]);
        assert_eq!(q.num_edges(), 1);
        assert_eq!(q.edges()[0].to.as_str(), "t");
    }

    #[test]
    fn edge_ref_parse() {
        let e: EdgeRef = "a -> b".parse().unwrap();
        assert_eq!(e, EdgeRef::new("a", "b"));
        assert!("ab".parse::<EdgeRef>().is_err());
        assert!("->b".parse::<EdgeRef>().is_err());
    }
}
