//! Browser bindings for the demo page. Each operation returns a JSON string
//! so the page needs no generated type glue; the plain Rust functions are
//! what the tests exercise.

use optiroute::encode::{count_vars, encode, EncodeOptions, Formulation, VarCounts};
use optiroute::fixtures;
use optiroute::model::NetworkProblem;
use optiroute::pipeline::{self, BestSolution, HistogramBin};
use optiroute::qubo::gadgets::{add_at_most_one_pair, add_leq_pair, add_linear_eq, add_linear_leq, add_product};
use optiroute::qubo::{PenaltyWeights, Qubo, VarId, VarRegistry};
use optiroute::solver::{solve_anneal, AnnealParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest read budget the page may request; keeps the tab responsive.
pub const MAX_READS: usize = 500;

#[derive(Serialize)]
struct Node {
    id: String,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct Link {
    from: String,
    to: String,
    latency: u64,
    cost: u64,
}

#[derive(Serialize)]
struct Graph {
    nodes: Vec<Node>,
    edges: Vec<Link>,
    sources: Vec<String>,
    sinks: Vec<String>,
    formulations: Vec<Formulation>,
}

#[derive(Serialize)]
struct Solve {
    num_vars: usize,
    num_terms: usize,
    counts: VarCounts,
    num_valid: usize,
    num_resilient: usize,
    histogram: Vec<HistogramBin>,
    best: Option<BestSolution>,
}

#[derive(Serialize)]
struct SizeRow {
    formulation: Formulation,
    counts: VarCounts,
    total: usize,
}

#[derive(Serialize)]
struct Sizes {
    rows: Vec<SizeRow>,
    /// `(t_max, time total, path total)` with every other input fixed.
    t_max_sweep: Vec<(u64, usize, usize)>,
}

#[derive(Serialize)]
struct GadgetRow {
    bits: Vec<bool>,
    energy: f64,
    satisfied: bool,
}

#[derive(Serialize)]
struct Gadget {
    labels: Vec<String>,
    rows: Vec<GadgetRow>,
}

type Predicate = Box<dyn Fn(&[bool]) -> bool>;

fn load(name: &str) -> Result<(NetworkProblem, fixtures::Layout), String> {
    fixtures::by_name(name).ok_or_else(|| format!("unknown instance `{name}`"))
}

fn applicable(p: &NetworkProblem) -> Vec<Formulation> {
    [Formulation::Time, Formulation::Path, Formulation::Rwa, Formulation::Rsa]
        .into_iter()
        .filter(|&f| count_vars(p, f, EncodeOptions::default()).is_ok())
        .collect()
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Nodes with layout coordinates, edges, terminals and the formulations
/// the instance supports.
pub fn graph_json(name: &str) -> Result<String, String> {
    let (p, layout) = load(name)?;
    let nodes = p
        .nodes()
        .iter()
        .map(|n| {
            let (x, y) = layout.get(n.as_str()).copied().unwrap_or_default();
            Node { id: n.to_string(), x, y }
        })
        .collect();
    let edges = p
        .edges()
        .iter()
        .map(|e| Link {
            from: e.from.to_string(),
            to: e.to.to_string(),
            latency: e.latency,
            cost: e.cost,
        })
        .collect();
    let names = |ids: &[usize]| -> Vec<String> { ids.iter().map(|&i| p.nodes()[i].to_string()).collect() };
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for c in 0..p.commodities().len() {
        sources.extend(names(&p.terminals(c).sources));
        sinks.extend(names(&p.terminals(c).sinks));
    }
    Ok(to_json(&Graph {
        nodes,
        edges,
        sources,
        sinks,
        formulations: applicable(&p),
    }))
}

/// Encodes, anneals and audits a bundled instance.
pub fn solve_json(name: &str, formulation: &str, reads: usize, sweeps: usize, seed: u64) -> Result<String, String> {
    let (p, _) = load(name)?;
    let f: Formulation = formulation.parse().map_err(|e: optiroute::Error| e.to_string())?;
    if reads > MAX_READS {
        return Err(format!("at most {MAX_READS} reads"));
    }
    let enc = encode(&p, f, &PenaltyWeights::default(), EncodeOptions::default()).map_err(|e| e.to_string())?;
    let params = AnnealParams {
        num_reads: reads,
        sweeps_per_read: sweeps,
        seed,
        ..AnnealParams::default()
    };
    let set = solve_anneal(&enc.qubo, params).map_err(|e| e.to_string())?;
    let (samples, best) = pipeline::audit(&p, &enc, &set).map_err(|e| e.to_string())?;
    Ok(to_json(&Solve {
        num_vars: enc.qubo.num_vars(),
        num_terms: enc.qubo.num_terms(),
        counts: enc.encoding.role_counts(),
        num_valid: samples.iter().filter(|s| s.valid).count(),
        num_resilient: samples.iter().filter(|s| s.valid && s.resilient == Some(true)).count(),
        histogram: pipeline::histogram(&samples),
        best,
    }))
}

/// Variable counts per formulation, plus how the time and path encodings
/// grow with the latency cap.
pub fn sizes_json(name: &str, substitute: bool) -> Result<String, String> {
    let (p, _) = load(name)?;
    let options = if substitute {
        EncodeOptions::default()
    } else {
        EncodeOptions::unsubstituted()
    };
    let rows = applicable(&p)
        .into_iter()
        .map(|f| {
            let counts = count_vars(&p, f, options).expect("formulation applies");
            SizeRow {
                formulation: f,
                total: counts.total(),
                counts,
            }
        })
        .collect();
    let mut t_max_sweep = Vec::new();
    if p.spectrum().is_none() {
        for t_max in [1, 3, 7, 15, 31, 63, 127] {
            let mut file = p.file().clone();
            file.t_max = t_max;
            let q = NetworkProblem::from_file(file).map_err(|e| e.to_string())?;
            let total = |f| count_vars(&q, f, options).map(|c| c.total()).map_err(|e| e.to_string());
            t_max_sweep.push((t_max, total(Formulation::Time)?, total(Formulation::Path)?));
        }
    }
    Ok(to_json(&Sizes { rows, t_max_sweep }))
}

/// Full truth table of one penalty gadget at weight `lambda`.
pub fn gadget_json(kind: &str, lambda: f64) -> Result<String, String> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err("weight must be positive".into());
    }
    let (x, y, z) = (VarId(0), VarId(1), VarId(2));
    let mut reg = VarRegistry::new();
    let mut q = Qubo::new(0);
    let sat: Predicate = match kind {
        "at_most_one" => {
            add_at_most_one_pair(&mut q, x, y, lambda).map_err(|e| e.to_string())?;
            Box::new(|b| !(b[0] && b[1]))
        }
        "implies" => {
            add_leq_pair(&mut q, x, y, lambda).map_err(|e| e.to_string())?;
            Box::new(|b| b[0] <= b[1])
        }
        "product" => {
            add_product(&mut q, x, y, z, lambda).map_err(|e| e.to_string())?;
            Box::new(|b| b[2] == (b[0] && b[1]))
        }
        "exactly_one" => {
            add_linear_eq(&mut q, &[(x, 1), (y, 1), (z, 1)], 1, lambda);
            Box::new(|b| b[..3].iter().filter(|&&v| v).count() == 1)
        }
        "at_most_two" => {
            for l in ["x", "y", "z"] {
                reg.alloc(l).map_err(|e| e.to_string())?;
            }
            let slack = add_linear_leq(&mut q, &mut reg, "s", &[(x, 1), (y, 1), (z, 1)], 2, lambda)
                .map_err(|e| e.to_string())?;
            Box::new(move |b| b[..3].iter().filter(|&&v| v).count() as u64 + slack.value(b) == 2)
        }
        other => return Err(format!("unknown gadget `{other}`")),
    };
    let labels: Vec<String> = if reg.is_empty() {
        ["x", "y", "z"][..q.num_vars()].iter().map(|s| s.to_string()).collect()
    } else {
        reg.labels().to_vec()
    };
    let n = labels.len();
    let rows = (0u32..1 << n)
        .map(|m| {
            let bits: Vec<bool> = (0..n).map(|j| m >> (n - 1 - j) & 1 == 1).collect();
            GadgetRow {
                energy: q.energy(&bits).expect("width matches"),
                satisfied: sat(&bits),
                bits,
            }
        })
        .collect();
    Ok(to_json(&Gadget { labels, rows }))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn graph(name: &str) -> Result<String, JsError> {
    js(graph_json(name))
}

#[wasm_bindgen]
pub fn solve(name: &str, formulation: &str, reads: usize, sweeps: usize, seed: u64) -> Result<String, JsError> {
    js(solve_json(name, formulation, reads, sweeps, seed))
}

#[wasm_bindgen]
pub fn sizes(name: &str, substitute: bool) -> Result<String, JsError> {
    js(sizes_json(name, substitute))
}

#[wasm_bindgen]
pub fn gadget(kind: &str, lambda: f64) -> Result<String, JsError> {
    js(gadget_json(kind, lambda))
}
