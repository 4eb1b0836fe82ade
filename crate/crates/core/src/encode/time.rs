//! Time-oriented formulation: every commodity of each of the two solutions
//! is a multicast tree, and loops are ruled out by integer node times that
//! strictly decrease along used edges.

use crate::encode::{
    build_tree, objective_scale, register_bits, Builder, EncodeOptions, EncodedQubo, Formulation, Lit,
    Role, SlackOf, TreeKey, VarCounts,
};
use crate::error::Result;
use crate::model::{NetworkProblem, NUM_SOLUTIONS};
use crate::qubo::{Category, PenaltyWeights, VarId};

pub fn encode_time(problem: &NetworkProblem, weights: &PenaltyWeights) -> Result<EncodedQubo> {
    encode_time_with(problem, weights, EncodeOptions::default())
}

pub fn encode_time_with(
    problem: &NetworkProblem,
    weights: &PenaltyWeights,
    options: EncodeOptions,
) -> Result<EncodedQubo> {
    let mut b = Builder::new(weights);
    let srgs = problem.resolved_srgs();
    let srg_ids: Vec<String> = srgs.iter().map(|g| g.id.clone()).collect();
    let total_cost: u64 = problem.edges().iter().map(|e| e.cost).sum();
    let scale = objective_scale(NUM_SOLUTIONS as u64 * total_cost);
    if problem.commodities().is_empty() {
        return b.finish(Formulation::Time, options, Vec::new(), srg_ids, scale);
    }
    let lambda_obj = weights.get(Category::Objective);

    let mut srg_vars: Vec<Vec<VarId>> = Vec::new();
    for sol in 0..NUM_SOLUTIONS {
        let mut trees = Vec::new();
        for (com, c) in problem.commodities().iter().enumerate() {
            let term = problem.terminals(com);
            let pinned: Vec<usize> = term.sources.iter().chain(&term.sinks).copied().collect();
            let tree = build_tree(
                &mut b,
                problem,
                TreeKey::Commodity { sol, com },
                &format!("i={sol},k={}", c.key),
                &term.sources,
                &pinned,
                options.substitute_constants,
            )?;
            trees.push(tree);
        }

        // per-solution edge union, priced by the objective
        let mut union = Vec::with_capacity(problem.num_edges());
        for edge in 0..problem.num_edges() {
            let r = problem.edge_ref(edge);
            let v = b.var(format!("e[i={sol},{r}]"), Role::SolutionEdge { sol, edge })?;
            for tree in &trees {
                b.leq(Category::Aggregate, Lit::Var(tree.e[edge]), Lit::Var(v))?;
            }
            b.or_lift(v, trees.iter().map(|t| Lit::Var(t.e[edge])).collect());
            b.cost(v, lambda_obj * problem.edges()[edge].cost as f64 / scale);
            union.push(v);
        }

        for edge in 0..problem.num_edges() {
            let r = problem.edge_ref(edge);
            let terms: Vec<(Lit, i64)> = trees
                .iter()
                .zip(problem.commodities())
                .map(|(t, c)| (Lit::Var(t.e[edge]), c.demand as i64))
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
            let mut inputs = Vec::new();
            for tree in &trees {
                inputs.extend(g.nodes.iter().map(|&n| tree.x[n]));
                inputs.extend(g.edges.iter().map(|&e| Lit::Var(tree.e[e])));
            }
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

    b.finish(Formulation::Time, options, Vec::new(), srg_ids, scale)
}

pub fn count_vars_time(problem: &NetworkProblem) -> VarCounts {
    count_vars_time_with(problem, EncodeOptions::unsubstituted())
}

/// Closed-form variable counts for the time formulation. With
/// `substitute_constants` the terminal node indicators are not counted.
pub fn count_vars_time_with(problem: &NetworkProblem, options: EncodeOptions) -> VarCounts {
    let mut c = VarCounts::default();
    let k = problem.commodities().len();
    if k == 0 {
        return c;
    }
    let s = NUM_SOLUTIONS;
    let v = problem.num_nodes();
    let e = problem.num_edges();
    let m = register_bits(problem.t_max());
    let pinned: usize = (0..k)
        .map(|i| {
            let t = problem.terminals(i);
            t.sources.len() + t.sinks.len()
        })
        .sum();
    let x = s * k * v - if options.substitute_constants { s * pinned } else { 0 };
    c.add("x", x);
    c.add("e_k", s * k * e);
    c.add("e", s * e);
    c.add("t", s * k * v * m);
    c.add("xi", s * k * e * m);
    c.add("srg", s * problem.derive_srgs().len());
    c.add("slack_ordering", s * k * e * m);
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
    fn registry_matches_count_in_both_modes() {
        let p = fixtures::loop_example();
        for options in [EncodeOptions::default(), EncodeOptions::unsubstituted()] {
            let enc = encode_time_with(&p, &PenaltyWeights::default(), options).unwrap();
            assert_eq!(enc.encoding.role_counts(), count_vars_time_with(&p, options));
            assert_eq!(enc.qubo.num_vars(), enc.encoding.num_vars());
        }
    }

    #[test]
    fn substitution_only_removes_variables() {
        let p = fixtures::problem_a();
        let sub = count_vars_time_with(&p, EncodeOptions::default());
        let full = count_vars_time(&p);
        assert!(sub.total() < full.total());
        assert!(sub.0.iter().all(|(k, n)| *n <= full.get(k)));
    }

    #[test]
    fn empty_assignment_is_penalised() {
        let p = fixtures::loop_example();
        let enc = encode_time(&p, &PenaltyWeights::default()).unwrap();
        assert!(enc.hard_energy(&vec![false; enc.qubo.num_vars()]).unwrap() > 0.0);
    }
}
