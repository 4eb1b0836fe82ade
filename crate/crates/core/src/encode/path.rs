//! Path-oriented formulation: one unicast flow per (solution, commodity,
//! sink). The flows of a commodity are merged into a tree by pricing the
//! union of their edges.

use std::collections::BTreeSet;

use crate::encode::{
    objective_scale, register_bits, Builder, EncodeOptions, EncodedQubo, Formulation, Lit, Role, SlackOf,
    VarCounts,
};
use crate::error::Result;
use crate::model::{NetworkProblem, NUM_SOLUTIONS};
use crate::qubo::{Category, PenaltyWeights, VarId};

pub fn encode_path(problem: &NetworkProblem, weights: &PenaltyWeights) -> Result<EncodedQubo> {
    encode_path_with(problem, weights, EncodeOptions::default())
}

/// The path formulation has no constant indicators, so `options` only
/// travels into the resulting [`Encoding`](crate::encode::Encoding).
pub fn encode_path_with(
    problem: &NetworkProblem,
    weights: &PenaltyWeights,
    options: EncodeOptions,
) -> Result<EncodedQubo> {
    let mut b = Builder::new(weights);
    let srgs = problem.resolved_srgs();
    let srg_ids: Vec<String> = srgs.iter().map(|g| g.id.clone()).collect();
    let k_count = problem.commodities().len() as u64;
    let total_cost: u64 = problem.edges().iter().map(|e| e.cost).sum();
    let scale = objective_scale(NUM_SOLUTIONS as u64 * (k_count + 1) * total_cost);
    if k_count == 0 {
        return b.finish(Formulation::Path, options, Vec::new(), srg_ids, scale);
    }
    let names = problem.nodes();
    let lambda_obj = weights.get(Category::Objective);
    let t_max = problem.t_max() as i64;

    let mut srg_vars: Vec<Vec<VarId>> = Vec::new();
    for sol in 0..NUM_SOLUTIONS {
        // routes[com] = [(sink, per-edge vars)]
        let mut routes: Vec<Vec<(usize, Vec<VarId>)>> = Vec::new();
        for (com, c) in problem.commodities().iter().enumerate() {
            let term = problem.terminals(com);
            let mut per_sink = Vec::new();
            for &sink in &term.sinks {
                let tag = format!("i={sol},k={},t={}", c.key, names[sink]);
                let mut e = Vec::with_capacity(problem.num_edges());
                for edge in 0..problem.num_edges() {
                    let r = problem.edge_ref(edge);
                    e.push(b.var(format!("e[{tag},{r}]"), Role::SinkEdge { sol, com, sink, edge })?);
                }

                let leaving: Vec<(Lit, i64)> = (0..problem.num_edges())
                    .filter(|&edge| {
                        let (a, z) = problem.endpoints(edge);
                        term.sources.contains(&a) && !term.sources.contains(&z)
                    })
                    .map(|edge| (Lit::Var(e[edge]), 1))
                    .collect();
                b.eq(Category::Flow, &leaving, 1);

                let entering: Vec<(Lit, i64)> =
                    problem.in_edges(sink).iter().map(|&edge| (Lit::Var(e[edge]), 1)).collect();
                b.eq(Category::Flow, &entering, 1);

                // flow never re-enters a source nor continues past its sink
                for edge in 0..problem.num_edges() {
                    let (a, z) = problem.endpoints(edge);
                    if term.sources.contains(&z) || a == sink {
                        b.eq(Category::Flow, &[(Lit::Var(e[edge]), 1)], 0);
                    }
                }

                for node in 0..problem.num_nodes() {
                    if term.sources.contains(&node) || node == sink {
                        continue;
                    }
                    let terms: Vec<(Lit, i64)> = problem
                        .in_edges(node)
                        .iter()
                        .map(|&edge| (Lit::Var(e[edge]), 1))
                        .chain(problem.out_edges(node).iter().map(|&edge| (Lit::Var(e[edge]), -1)))
                        .collect();
                    b.eq(Category::Flow, &terms, 0);
                }

                let latency: Vec<(Lit, i64)> = e
                    .iter()
                    .zip(problem.edges())
                    .map(|(&v, ed)| (Lit::Var(v), ed.latency as i64))
                    .collect();
                b.leq_sum(
                    Category::Latency,
                    &format!("lat[{tag}]"),
                    SlackOf::Latency { sol, com, sink },
                    &latency,
                    t_max,
                )?;
                per_sink.push((sink, e));
            }
            routes.push(per_sink);
        }

        // per-commodity unions
        let mut com_edges: Vec<Vec<VarId>> = Vec::new();
        for (com, c) in problem.commodities().iter().enumerate() {
            let mut vars = Vec::with_capacity(problem.num_edges());
            for edge in 0..problem.num_edges() {
                let r = problem.edge_ref(edge);
                let v = b.var(format!("e[i={sol},k={},{r}]", c.key), Role::CommodityEdge { sol, com, edge })?;
                for (_, e) in &routes[com] {
                    b.leq(Category::Aggregate, Lit::Var(e[edge]), Lit::Var(v))?;
                }
                b.or_lift(v, routes[com].iter().map(|(_, e)| Lit::Var(e[edge])).collect());
                b.cost(v, lambda_obj * problem.edges()[edge].cost as f64 / scale);
                vars.push(v);
            }
            com_edges.push(vars);
        }

        let mut union = Vec::with_capacity(problem.num_edges());
        for edge in 0..problem.num_edges() {
            let r = problem.edge_ref(edge);
            let v = b.var(format!("e[i={sol},{r}]"), Role::SolutionEdge { sol, edge })?;
            for vars in &com_edges {
                b.leq(Category::Aggregate, Lit::Var(vars[edge]), Lit::Var(v))?;
            }
            b.or_lift(v, com_edges.iter().map(|vars| Lit::Var(vars[edge])).collect());
            b.cost(v, lambda_obj * problem.edges()[edge].cost as f64 / scale);
            union.push(v);
        }

        for edge in 0..problem.num_edges() {
            let r = problem.edge_ref(edge);
            let terms: Vec<(Lit, i64)> = com_edges
                .iter()
                .zip(problem.commodities())
                .map(|(vars, c)| (Lit::Var(vars[edge]), c.demand as i64))
                .collect();
            b.leq_sum(
                Category::Capacity,
                &format!("cap[i={sol},{r}]"),
                SlackOf::Capacity { sol, edge },
                &terms,
                problem.edges()[edge].capacity as i64,
            )?;
        }

        let mut indicators = Vec::with_capacity(srgs.len());
        for (group, g) in srgs.iter().enumerate() {
            let s = b.var(format!("srg[i={sol},j={}]", g.id), Role::Srg { sol, group })?;
            let members: BTreeSet<usize> = (0..problem.num_edges())
                .filter(|&edge| {
                    let (a, z) = problem.endpoints(edge);
                    g.edges.contains(&edge) || g.nodes.contains(&a) || g.nodes.contains(&z)
                })
                .collect();
            let inputs: Vec<Lit> = routes
                .iter()
                .flatten()
                .flat_map(|(_, e)| members.iter().map(move |&edge| Lit::Var(e[edge])))
                .collect();
            for &l in &inputs {
                b.leq(Category::Srg, l, Lit::Var(s))?;
            }
            b.or_lift(s, inputs);
            indicators.push(s);
        }
        srg_vars.push(indicators);

        if let Some(w) = problem.cost_threshold() {
            let terms: Vec<(Lit, i64)> = union
                .iter()
                .zip(problem.edges())
                .map(|(&v, e)| (Lit::Var(v), e.cost as i64))
                .collect();
            b.leq_sum(Category::Cost, &format!("cost[i={sol}]"), SlackOf::Cost { sol }, &terms, w as i64)?;
        }
    }

    for group in 0..srgs.len() {
        b.at_most_one(Category::Disjoint, srg_vars[0][group], srg_vars[1][group])?;
    }

    b.finish(Formulation::Path, options, Vec::new(), srg_ids, scale)
}

/// Closed-form variable counts for the path formulation.
pub fn count_vars_path(problem: &NetworkProblem) -> VarCounts {
    let mut c = VarCounts::default();
    let k = problem.commodities().len();
    if k == 0 {
        return c;
    }
    let s = NUM_SOLUTIONS;
    let e = problem.num_edges();
    let sinks: usize = (0..k).map(|i| problem.terminals(i).sinks.len()).sum();
    c.add("e_t", s * sinks * e);
    c.add("e_k", s * k * e);
    c.add("e", s * e);
    c.add("srg", s * problem.derive_srgs().len());
    c.add("slack_latency", s * sinks * register_bits(problem.t_max()));
    c.add(
        "slack_capacity",
        s * problem.edges().iter().map(|ed| register_bits(ed.capacity)).sum::<usize>(),
    );
    if let Some(w) = problem.cost_threshold() {
        c.add("slack_cost", s * register_bits(w));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn one_flow_per_sink_and_solution() {
        let p = fixtures::problem_b();
        let enc = encode_path(&p, &PenaltyWeights::default()).unwrap();
        let sinks: usize = (0..p.commodities().len()).map(|c| p.terminals(c).sinks.len()).sum();
        let flows = enc.encoding.vars_with(|r| matches!(r, Role::SinkEdge { .. })).count();
        assert_eq!(flows, 2 * sinks * p.num_edges());
        assert_eq!(enc.encoding.role_counts(), count_vars_path(&p));
    }

    #[test]
    fn empty_assignment_is_penalised() {
        let p = fixtures::problem_b();
        let enc = encode_path(&p, &PenaltyWeights::default()).unwrap();
        let v = enc.violations(&vec![false; enc.qubo.num_vars()]).unwrap();
        assert!(v.get(&Category::Flow).is_some_and(|&e| e > 0.0));
    }
}
