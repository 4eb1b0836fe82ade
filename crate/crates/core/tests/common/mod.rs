#![allow(dead_code)]

use std::collections::BTreeMap;

use optiroute::encode::{count_vars, encode, EncodeOptions, Formulation, Role};
use optiroute::model::{
    Commodity, DisjointnessMode, Edge, EdgeRef, NetworkProblem, NodeId, ProblemFile, SharedRiskGroup, SpectrumSpec,
};
use optiroute::qubo::PenaltyWeights;
use optiroute::routes::decode;
use optiroute::solver::{solve_exact, solve_exhaustive, ExactOptions};
use optiroute::validate::validate;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn edge(a: &str, b: &str, latency: u64, capacity: u64, cost: u64) -> Edge {
    Edge {
        from: NodeId::new(a),
        to: NodeId::new(b),
        latency,
        capacity,
        cost,
    }
}

pub fn commodity(key: &str, sources: &[&str], sinks: &[&str], demand: u64) -> Commodity {
    Commodity {
        key: key.into(),
        sources: sources.iter().map(|s| NodeId::new(*s)).collect(),
        sinks: sinks.iter().map(|s| NodeId::new(*s)).collect(),
        demand,
    }
}

pub fn file(nodes: &[&str], edges: Vec<Edge>, commodities: Vec<Commodity>, t_max: u64) -> ProblemFile {
    ProblemFile {
        nodes: nodes.iter().map(|n| NodeId::new(*n)).collect(),
        edges,
        commodities,
        srgs: Vec::new(),
        t_max,
        cost_threshold: None,
        disjointness_mode: DisjointnessMode::Edge,
        spectrum: None,
    }
}

pub fn build(f: ProblemFile) -> NetworkProblem {
    NetworkProblem::from_file(f).expect("test problem is valid")
}

fn random_mode(rng: &mut impl Rng, f: &mut ProblemFile) {
    f.disjointness_mode = *[DisjointnessMode::Edge, DisjointnessMode::Node, DisjointnessMode::SrgExplicit]
        .choose(rng)
        .unwrap();
    if f.disjointness_mode == DisjointnessMode::SrgExplicit && rng.gen_bool(0.5) {
        let e = f.edges.choose(rng).unwrap();
        f.srgs.push(SharedRiskGroup {
            id: "g".into(),
            nodes: Vec::new(),
            edges: vec![EdgeRef::new(e.from.as_str(), e.to.as_str())],
        });
    }
}

fn small_time(rng: &mut impl Rng) -> ProblemFile {
    let mut f = file(
        &["s", "t"],
        vec![edge("s", "t", rng.gen_range(1..=3), rng.gen_range(1..=2), rng.gen_range(1..=3))],
        vec![commodity("k", &["s"], &["t"], rng.gen_range(1..=2))],
        rng.gen_range(1..=3),
    );
    random_mode(rng, &mut f);
    if rng.gen_bool(0.3) {
        f.cost_threshold = Some(rng.gen_range(0..=3));
    }
    f
}

fn small_path(rng: &mut impl Rng) -> ProblemFile {
    let mut f = match rng.gen_range(0..3) {
        0 => file(
            &["s", "t"],
            vec![edge("s", "t", rng.gen_range(1..=2), rng.gen_range(1..=2), 1)],
            vec![commodity("k", &["s"], &["t"], rng.gen_range(1..=2))],
            rng.gen_range(1..=3),
        ),
        1 => file(
            &["s", "a", "t"],
            vec![edge("s", "a", rng.gen_range(1..=2), 1, 1), edge("a", "t", rng.gen_range(1..=2), 1, 2)],
            vec![commodity("k", &["s"], &["t"], 1)],
            rng.gen_range(1..=3),
        ),
        _ => file(
            &["s", "t", "u"],
            vec![edge("s", "t", rng.gen_range(1..=2), 1, 1), edge("s", "u", rng.gen_range(1..=2), 1, 1)],
            vec![commodity("k", &["s"], &["t", "u"], 1)],
            1,
        ),
    };
    random_mode(rng, &mut f);
    f
}

fn small_rwa(rng: &mut impl Rng) -> ProblemFile {
    let k = rng.gen_range(1..=2);
    let commodities = (0..k).map(|i| commodity(&format!("k{i}"), &["s"], &["t"], 1)).collect();
    let mut f = file(&["s", "t"], vec![edge("s", "t", 1, 1, 1)], commodities, 1);
    f.spectrum = Some(SpectrumSpec::rwa(rng.gen_range(1..=2)));
    f
}

fn small_rsa(rng: &mut impl Rng) -> ProblemFile {
    let max_width = rng.gen_range(1..=2);
    let slots = rng.gen_range(max_width..=3);
    let width = rng.gen_range(1..=max_width);
    let mut f = file(&["s", "t"], vec![edge("s", "t", 1, 1, 1)], vec![commodity("k", &["s"], &["t"], 1)], 1);
    f.spectrum = Some(SpectrumSpec::rsa(slots, max_width, BTreeMap::from([("k".to_owned(), width)])));
    f
}

/// Random instances of `formulation` compiling to at most `limit` variables.
pub fn micro_instances(formulation: Formulation, count: usize, limit: usize, rng: &mut impl Rng) -> Vec<NetworkProblem> {
    let mut out = Vec::new();
    for _ in 0..10_000 {
        if out.len() == count {
            break;
        }
        let f = match formulation {
            Formulation::Time => small_time(rng),
            Formulation::Path => small_path(rng),
            Formulation::Rwa => small_rwa(rng),
            Formulation::Rsa => small_rsa(rng),
        };
        let p = build(f);
        if count_vars(&p, formulation, EncodeOptions::default()).unwrap().total() <= limit {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct Equivalence {
    pub vars: usize,
    pub ground_hard: f64,
    pub ground_states: usize,
    pub clean_valid: usize,
}

fn routing_var(r: &Role) -> bool {
    matches!(r, Role::TreeEdge { .. } | Role::SinkEdge { .. } | Role::Delta { .. })
}

/// Exhaustive agreement between the encoder's hard penalty and the
/// validator: zero-penalty ground states decode to valid route sets, and
/// every valid route set (without warnings) can be completed to zero
/// penalty.
pub fn check_equivalence(problem: &NetworkProblem, formulation: Formulation) -> Result<Equivalence, String> {
    let enc = encode(problem, formulation, &PenaltyWeights::default(), EncodeOptions::default())
        .map_err(|e| e.to_string())?;
    let n = enc.qubo.num_vars();
    let g = solve_exhaustive(&enc.qubo, 24).map_err(|e| e.to_string())?;
    let mut eq = Equivalence {
        vars: n,
        ground_hard: f64::INFINITY,
        ground_states: g.assignments.len(),
        clean_valid: 0,
    };
    for a in &g.assignments {
        let h = enc.hard_energy(a).unwrap();
        eq.ground_hard = eq.ground_hard.min(h);
        if h == 0.0 {
            let v = validate(problem, &decode(problem, &enc.encoding, a).unwrap());
            if !v.valid {
                return Err(format!("zero-penalty ground state decodes invalid: {:?}", v.checks));
            }
        }
    }

    let routing: Vec<usize> = (0..n).filter(|&i| routing_var(&enc.encoding.roles[i])).collect();
    for mask in 0u64..1 << routing.len() {
        let mut x = vec![false; n];
        let mut fixed = vec![None; n];
        for (j, &v) in routing.iter().enumerate() {
            x[v] = mask >> j & 1 == 1;
            fixed[v] = Some(x[v]);
        }
        let report = validate(problem, &decode(problem, &enc.encoding, &x).unwrap());
        if !(report.valid && report.is_clean()) {
            continue;
        }
        eq.clean_valid += 1;
        let (sub, _) = enc.hard.restrict(&fixed).unwrap();
        let best = solve_exact(&sub, ExactOptions::default()).map_err(|e| e.to_string())?;
        if best.energy != 0.0 {
            return Err(format!("valid route set {mask:#b} has minimal penalty {}", best.energy));
        }
    }
    if eq.clean_valid > 0 && g.assignments.iter().any(|a| enc.hard_energy(a).unwrap() != 0.0) {
        return Err("feasible instance has a penalised ground state".into());
    }
    Ok(eq)
}
