//! Built-in benchmark instances with drawing layouts and hand-built
//! reference route sets.

use std::collections::BTreeMap;

use crate::model::{
    Commodity, DisjointnessMode, Edge, EdgeRef, NetworkProblem, NodeId, ProblemFile, SpectrumSpec,
};

/// Node positions on a unit grid, `(column, row)`.
pub type Layout = BTreeMap<String, (f64, f64)>;

/// Reference route set: `routes[solution][commodity]` lists edges as `a->b`.
pub type ReferenceRoutes = [Vec<Vec<EdgeRef>>; 2];

fn node_ids(names: &[&str]) -> Vec<NodeId> {
    names.iter().map(|n| NodeId::new(*n)).collect()
}

fn edges(list: &[(&str, &str, u64)], capacity: u64) -> Vec<Edge> {
    list.iter()
        .map(|&(a, b, latency)| Edge {
            from: NodeId::new(a),
            to: NodeId::new(b),
            latency,
            capacity,
            cost: latency,
        })
        .collect()
}

fn commodity(key: &str, sources: &[&str], sinks: &[&str]) -> Commodity {
    Commodity {
        key: key.into(),
        sources: node_ids(sources),
        sinks: node_ids(sinks),
        demand: 1,
    }
}

fn refs(list: &[(&str, &str)]) -> Vec<EdgeRef> {
    list.iter().map(|&(a, b)| EdgeRef::new(a, b)).collect()
}

const A_NODES: [(&str, f64, f64); 15] = [
    ("S", 0.0, 0.0),
    ("A", 1.0, 0.0),
    ("B", 2.0, 0.0),
    ("C", 3.0, 0.0),
    ("D", 0.0, 1.0),
    ("F", 1.0, 1.0),
    ("G", 2.0, 1.0),
    ("H", 3.0, 1.0),
    ("I", 0.0, 2.0),
    ("J", 1.0, 2.0),
    ("K", 2.0, 2.0),
    ("L", 3.0, 2.0),
    ("M", 1.0, 3.0),
    ("N", 2.0, 3.0),
    ("O", 3.0, 3.0),
];

const A_BLUE: [(&str, &str, u64); 10] = [
    ("S", "D", 5),
    ("D", "I", 2),
    ("D", "F", 2),
    ("F", "B", 3),
    ("B", "C", 4),
    ("B", "H", 2),
    ("H", "K", 2),
    ("K", "M", 3),
    ("K", "N", 5),
    ("N", "O", 1),
];

const A_RED: [(&str, &str, u64); 10] = [
    ("S", "A", 2),
    ("A", "F", 4),
    ("F", "G", 3),
    ("G", "J", 1),
    ("J", "I", 2),
    ("J", "M", 1),
    ("G", "H", 1),
    ("H", "C", 2),
    ("H", "L", 2),
    ("L", "O", 5),
];

const A_SPARE: [(&str, &str, u64); 3] = [("A", "D", 1), ("K", "F", 2), ("L", "N", 1)];

/// Single commodity from `S` to four sinks on a 15-node grid, latency cap 20,
/// edge-disjoint solutions, unit capacities.
pub fn problem_a() -> NetworkProblem {
    let all: Vec<_> = A_BLUE.iter().chain(&A_RED).chain(&A_SPARE).copied().collect();
    let file = ProblemFile {
        nodes: A_NODES.iter().map(|(n, _, _)| NodeId::new(*n)).collect(),
        edges: edges(&all, 1),
        commodities: vec![commodity("k1", &["S"], &["C", "I", "M", "O"])],
        srgs: Vec::new(),
        t_max: 20,
        cost_threshold: None,
        disjointness_mode: DisjointnessMode::Edge,
        spectrum: None,
    };
    NetworkProblem::from_file(file).expect("fixture A is valid")
}

pub fn layout_a() -> Layout {
    A_NODES.iter().map(|&(n, x, y)| (n.to_owned(), (x, y))).collect()
}

pub fn reference_a() -> ReferenceRoutes {
    let strip = |l: &[(&'static str, &'static str, u64)]| -> Vec<(&'static str, &'static str)> {
        l.iter().map(|&(a, b, _)| (a, b)).collect()
    };
    [vec![refs(&strip(&A_BLUE))], vec![refs(&strip(&A_RED))]]
}

const B_NODES: [(&str, f64, f64); 17] = [
    ("A1", 1.0, 0.0),
    ("B1", 2.0, 0.0),
    ("C1", 0.0, 1.0),
    ("D1", 1.0, 1.0),
    ("E1", 2.0, 1.0),
    ("F1", 3.0, 1.0),
    ("G1", 0.0, 2.0),
    ("H1", 1.0, 2.0),
    ("I1", 2.0, 2.0),
    ("J1", 3.0, 2.0),
    ("K1", 0.0, 3.0),
    ("L1", 1.0, 3.0),
    ("M1", 2.0, 3.0),
    ("N1", 3.0, 3.0),
    ("O1", 0.0, 4.0),
    ("P1", 1.0, 4.0),
    ("Q1", 2.0, 4.0),
];

const B_BLUE_1: [(&str, &str, u64); 5] = [
    ("G1", "C1", 5),
    ("C1", "A1", 1),
    ("G1", "L1", 5),
    ("L1", "M1", 1),
    ("L1", "O1", 4),
];

const B_BLUE_2: [(&str, &str, u64); 4] = [("I1", "F1", 1), ("F1", "B1", 4), ("I1", "L1", 2), ("L1", "P1", 5)];

const B_RED_1: [(&str, &str, u64); 7] = [
    ("G1", "K1", 5),
    ("K1", "O1", 3),
    ("G1", "D1", 4),
    ("D1", "A1", 3),
    ("D1", "E1", 2),
    ("E1", "J1", 2),
    ("J1", "M1", 2),
];

// E1->J1 is shared with the first commodity's red tree.
const B_RED_2: [(&str, &str, u64); 5] = [
    ("I1", "E1", 3),
    ("E1", "B1", 2),
    ("J1", "N1", 1),
    ("N1", "Q1", 2),
    ("Q1", "P1", 2),
];

const B_SPARE: [(&str, &str, u64); 7] = [
    ("Q1", "L1", 3),
    ("N1", "M1", 4),
    ("F1", "E1", 1),
    ("H1", "D1", 4),
    ("C1", "D1", 3),
    ("K1", "H1", 1),
    ("H1", "E1", 3),
];

/// Two commodities (`G1` to three sinks, `I1` to two) on a 17-node grid,
/// latency cap 10, node-disjoint solutions. Edge capacity is 2 so both
/// commodities may share an edge within one solution.
pub fn problem_b() -> NetworkProblem {
    let all: Vec<_> = B_BLUE_1
        .iter()
        .chain(&B_BLUE_2)
        .chain(&B_RED_1)
        .chain(&B_RED_2)
        .chain(&B_SPARE)
        .copied()
        .collect();
    let file = ProblemFile {
        nodes: B_NODES.iter().map(|(n, _, _)| NodeId::new(*n)).collect(),
        edges: edges(&all, 2),
        commodities: vec![
            commodity("k1", &["G1"], &["A1", "M1", "O1"]),
            commodity("k2", &["I1"], &["B1", "P1"]),
        ],
        srgs: Vec::new(),
        t_max: 10,
        cost_threshold: None,
        disjointness_mode: DisjointnessMode::Node,
        spectrum: None,
    };
    NetworkProblem::from_file(file).expect("fixture B is valid")
}

pub fn layout_b() -> Layout {
    B_NODES.iter().map(|&(n, x, y)| (n.to_owned(), (x, y))).collect()
}

pub fn reference_b() -> ReferenceRoutes {
    let strip = |l: &[(&'static str, &'static str, u64)]| -> Vec<(&'static str, &'static str)> {
        l.iter().map(|&(a, b, _)| (a, b)).collect()
    };
    let mut red_2 = strip(&B_RED_2);
    red_2.push(("E1", "J1"));
    [
        vec![refs(&strip(&B_BLUE_1)), refs(&strip(&B_BLUE_2))],
        vec![refs(&strip(&B_RED_1)), refs(&red_2)],
    ]
}

/// Six-node network where a directed cycle with a tail can satisfy every
/// in-degree rule while never connecting to the source.
pub fn loop_example() -> NetworkProblem {
    let list = [
        ("S", "A", 5),
        ("S", "C", 4),
        ("B", "D", 1),
        ("C", "E", 1),
        ("A", "B", 1),
        ("C", "D", 1),
        ("D", "A", 1),
        ("A", "C", 1),
        ("D", "E", 1),
    ];
    let file = ProblemFile {
        nodes: node_ids(&["S", "A", "B", "C", "D", "E"]),
        edges: edges(&list, 1),
        commodities: vec![commodity("k1", &["S"], &["E"])],
        srgs: Vec::new(),
        t_max: 5,
        cost_threshold: None,
        disjointness_mode: DisjointnessMode::Edge,
        spectrum: None,
    };
    NetworkProblem::from_file(file).expect("loop example is valid")
}

/// Detached cycle `C->D->A->C` feeding the sink through `D->E`.
pub fn loop_example_cycle() -> Vec<EdgeRef> {
    refs(&[("C", "D"), ("D", "A"), ("A", "C"), ("D", "E")])
}

pub fn layout_loop_example() -> Layout {
    [("S", 0.0, 0.0), ("A", 1.0, 0.0), ("B", 2.0, 0.0), ("C", 0.0, 1.0), ("D", 1.0, 1.0), ("E", 2.0, 1.0)]
        .iter()
        .map(|&(n, x, y)| (n.to_owned(), (x, y)))
        .collect()
}

/// Four-node diamond with a single wavelength-routed commodity `S -> T`.
pub fn diamond_rwa(colours: usize) -> NetworkProblem {
    let list = [("S", "A", 1), ("S", "B", 1), ("A", "T", 1), ("B", "T", 1)];
    let file = ProblemFile {
        nodes: node_ids(&["S", "A", "B", "T"]),
        edges: edges(&list, 1),
        commodities: vec![commodity("k1", &["S"], &["T"])],
        srgs: Vec::new(),
        t_max: 2,
        cost_threshold: None,
        disjointness_mode: DisjointnessMode::Edge,
        spectrum: Some(SpectrumSpec::rwa(colours)),
    };
    NetworkProblem::from_file(file).expect("diamond is valid")
}

pub fn layout_diamond() -> Layout {
    [("S", 0.0, 1.0), ("A", 1.0, 0.0), ("B", 1.0, 2.0), ("T", 2.0, 1.0)]
        .iter()
        .map(|&(n, x, y)| (n.to_owned(), (x, y)))
        .collect()
}

/// Named fixture lookup used by the command-line and browser front ends.
pub fn by_name(name: &str) -> Option<(NetworkProblem, Layout)> {
    match name {
        "A" | "a" => Some((problem_a(), layout_a())),
        "B" | "b" => Some((problem_b(), layout_b())),
        "loop" => Some((loop_example(), layout_loop_example())),
        "diamond" => Some((diamond_rwa(2), layout_diamond())),
        _ => None,
    }
}
