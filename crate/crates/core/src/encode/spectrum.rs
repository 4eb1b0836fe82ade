//! Spectrum-aware formulations. Each source grows one tree per channel; a
//! commodity picks exactly one channel per source, every sink is reached by
//! exactly one chosen tree, and trees on blocking channels may not share an
//! edge.
//!
//! RWA channels are single wavelengths. RSA channels are contiguous
//! super-channels `(start, width)` of a flexgrid with `start + width ≤ slots`.

use serde::{Deserialize, Serialize};

use crate::encode::{
    build_tree, objective_scale, register_bits, Builder, EncodeOptions, EncodedQubo, Formulation, Lit,
    Role, TreeKey, TreeVars, VarCounts,
};
use crate::error::{Error, Result};
use crate::model::{NetworkProblem, SpectrumMode, SpectrumSpec};
use crate::qubo::{Category, PenaltyWeights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuperChannel {
    pub start: usize,
    pub width: usize,
}

impl SuperChannel {
    pub fn end(&self) -> usize {
        self.start + self.width
    }
}

/// Two channels block each other when their slot intervals overlap.
pub fn superchannels_block(a: SuperChannel, b: SuperChannel) -> bool {
    a.start < b.end() && b.start < a.end()
}

/// Channel catalogue: `colours` width-1 channels for RWA; for RSA every
/// `(start, width)` with `width ≤ max_width`, ordered by width then start.
pub fn catalog(spec: &SpectrumSpec) -> Vec<SuperChannel> {
    match spec.mode {
        SpectrumMode::Rwa => (0..spec.colours.unwrap_or(0))
            .map(|start| SuperChannel { start, width: 1 })
            .collect(),
        SpectrumMode::Rsa => {
            let slots = spec.slots.unwrap_or(0);
            let max_width = spec.max_width.unwrap_or(1).min(slots);
            (1..=max_width)
                .flat_map(|width| (0..=slots - width).map(move |start| SuperChannel { start, width }))
                .collect()
        }
    }
}

/// Slot width required by commodity `com` (always 1 for RWA).
pub fn demand_width(problem: &NetworkProblem, com: usize) -> usize {
    match problem.spectrum() {
        Some(spec) if spec.mode == SpectrumMode::Rsa => spec
            .demand_widths
            .get(&problem.commodities()[com].key)
            .copied()
            .unwrap_or(1),
        _ => 1,
    }
}

fn spec_for(problem: &NetworkProblem, mode: SpectrumMode) -> Result<&SpectrumSpec> {
    match problem.spectrum() {
        Some(spec) if spec.mode == mode => Ok(spec),
        Some(_) => Err(Error::validation(
            "spectrum.mode",
            format!("problem is not configured for {}", mode_name(mode)),
        )),
        None => Err(Error::validation(
            "spectrum",
            format!("{} needs a spectrum section", mode_name(mode)),
        )),
    }
}

fn mode_name(mode: SpectrumMode) -> &'static str {
    match mode {
        SpectrumMode::Rwa => "rwa",
        SpectrumMode::Rsa => "rsa",
    }
}

pub fn encode_rwa(problem: &NetworkProblem, weights: &PenaltyWeights) -> Result<EncodedQubo> {
    encode_rwa_with(problem, weights, EncodeOptions::default())
}

pub fn encode_rwa_with(
    problem: &NetworkProblem,
    weights: &PenaltyWeights,
    options: EncodeOptions,
) -> Result<EncodedQubo> {
    let spec = spec_for(problem, SpectrumMode::Rwa)?;
    encode_spectrum(problem, weights, options, Formulation::Rwa, catalog(spec))
}

pub fn encode_rsa(problem: &NetworkProblem, weights: &PenaltyWeights) -> Result<EncodedQubo> {
    encode_rsa_with(problem, weights, EncodeOptions::default())
}

pub fn encode_rsa_with(
    problem: &NetworkProblem,
    weights: &PenaltyWeights,
    options: EncodeOptions,
) -> Result<EncodedQubo> {
    let spec = spec_for(problem, SpectrumMode::Rsa)?;
    encode_spectrum(problem, weights, options, Formulation::Rsa, catalog(spec))
}

fn encode_spectrum(
    problem: &NetworkProblem,
    weights: &PenaltyWeights,
    options: EncodeOptions,
    formulation: Formulation,
    channels: Vec<SuperChannel>,
) -> Result<EncodedQubo> {
    let mut b = Builder::new(weights);
    let names = problem.nodes();
    let sources = problem.all_sources();
    let total_cost: u64 = problem.edges().iter().map(|e| e.cost).sum();
    let scale = objective_scale((sources.len() * channels.len()) as u64 * total_cost);
    let lambda_obj = weights.get(Category::Objective);
    let substitute = options.substitute_constants;

    // trees[si][ch]
    let mut trees: Vec<Vec<TreeVars>> = Vec::new();
    for &s in &sources {
        let mut row = Vec::new();
        for channel in 0..channels.len() {
            let tree = TreeKey::Channel { source: s, channel };
            let t = build_tree(&mut b, problem, tree, &format!("s={},c={channel}", names[s]), &[s], &[s], substitute)?;
            for edge in 0..problem.num_edges() {
                b.cost(t.e[edge], lambda_obj * problem.edges()[edge].cost as f64 / scale);
            }
            row.push(t);
        }
        trees.push(row);
    }

    // delta[si][ch][com]
    let mut delta: Vec<Vec<Vec<Lit>>> = Vec::new();
    for (si, &s) in sources.iter().enumerate() {
        let mut per_channel = Vec::new();
        for (channel, ch) in channels.iter().enumerate() {
            let mut per_com = Vec::new();
            for (com, c) in problem.commodities().iter().enumerate() {
                let usable = problem.terminals(com).sources.contains(&s) && ch.width == demand_width(problem, com);
                if substitute && !usable {
                    per_com.push(Lit::Const(false));
                    continue;
                }
                let v = b.var(
                    format!("delta[s={},c={channel},k={}]", names[s], c.key),
                    Role::Delta { source: s, channel, com },
                )?;
                per_com.push(Lit::Var(v));
                if ch.width != demand_width(problem, com) {
                    b.eq(Category::Colour, &[(Lit::Var(v), 1)], 0);
                }
                for &t in &problem.terminals(com).sinks {
                    let z = b.var(
                        format!("zeta[s={},c={channel},k={},t={}]", names[s], c.key, names[t]),
                        Role::Zeta { source: s, channel, com, sink: t },
                    )?;
                    b.product(Lit::Var(v), trees[si][channel].x[t], z)?;
                }
            }
            per_channel.push(per_com);
        }
        delta.push(per_channel);
    }

    // one channel per (source, commodity); none where the source is foreign
    for (si, &s) in sources.iter().enumerate() {
        for com in 0..problem.commodities().len() {
            let terms: Vec<(Lit, i64)> = (0..channels.len()).map(|ch| (delta[si][ch][com], 1)).collect();
            let rhs = i64::from(problem.terminals(com).sources.contains(&s));
            b.eq(Category::Colour, &terms, rhs);
        }
    }

    // at most one commodity per tree
    for si in 0..sources.len() {
        for ch in 0..channels.len() {
            let vars: Vec<_> = delta[si][ch]
                .iter()
                .filter_map(|l| match l {
                    Lit::Var(v) => Some(*v),
                    Lit::Const(_) => None,
                })
                .collect();
            for (i, &a) in vars.iter().enumerate() {
                for &c in &vars[i + 1..] {
                    b.at_most_one(Category::Colour, a, c)?;
                }
            }
        }
    }

    // each sink covered exactly once
    let zeta: Vec<(Role, usize)> = b
        .roles
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, Role::Zeta { .. }))
        .map(|(i, r)| (*r, i))
        .collect();
    for com in 0..problem.commodities().len() {
        for &t in &problem.terminals(com).sinks {
            let terms: Vec<(Lit, i64)> = zeta
                .iter()
                .filter(|(r, _)| matches!(r, Role::Zeta { com: k, sink, .. } if *k == com && *sink == t))
                .map(|&(_, i)| (Lit::Var(crate::qubo::VarId(i)), 1))
                .collect();
            b.eq(Category::Coverage, &terms, 1);
        }
    }

    // trees on blocking channels share no edge
    let keys: Vec<(usize, usize)> = (0..sources.len())
        .flat_map(|si| (0..channels.len()).map(move |ch| (si, ch)))
        .collect();
    for (i, &(sa, ca)) in keys.iter().enumerate() {
        for &(sb, cb) in &keys[i + 1..] {
            if !superchannels_block(channels[ca], channels[cb]) {
                continue;
            }
            for edge in 0..problem.num_edges() {
                b.at_most_one(Category::Blocking, trees[sa][ca].e[edge], trees[sb][cb].e[edge])?;
            }
        }
    }

    b.finish(formulation, options, channels, Vec::new(), scale)
}

pub fn count_vars_spectrum(problem: &NetworkProblem, formulation: Formulation) -> Result<VarCounts> {
    count_vars_spectrum_with(problem, formulation, EncodeOptions::unsubstituted())
}

/// Closed-form variable counts for RWA and RSA.
pub fn count_vars_spectrum_with(
    problem: &NetworkProblem,
    formulation: Formulation,
    options: EncodeOptions,
) -> Result<VarCounts> {
    let mode = match formulation {
        Formulation::Rwa => SpectrumMode::Rwa,
        Formulation::Rsa => SpectrumMode::Rsa,
        other => return Err(Error::Unsupported(format!("{other} is not a spectrum formulation"))),
    };
    let channels = catalog(spec_for(problem, mode)?);
    let c = channels.len();
    let s = problem.all_sources().len();
    let v = problem.num_nodes();
    let e = problem.num_edges();
    let m = register_bits(problem.t_max());
    let k = problem.commodities().len();
    let sinks: usize = (0..k).map(|i| problem.terminals(i).sinks.len()).sum();

    let mut out = VarCounts::default();
    out.add("x", c * s * v - if options.substitute_constants { c * s } else { 0 });
    out.add("e_k", c * s * e);
    out.add("t", c * s * v * m);
    out.add("xi", c * s * e * m);
    out.add("slack_ordering", c * s * e * m);
    if options.substitute_constants {
        let usable = |com: usize| {
            let w = demand_width(problem, com);
            problem.terminals(com).sources.len() * channels.iter().filter(|ch| ch.width == w).count()
        };
        out.add("delta", (0..k).map(usable).sum());
        out.add(
            "zeta",
            (0..k).map(|com| usable(com) * problem.terminals(com).sinks.len()).sum(),
        );
    } else {
        out.add("delta", c * s * k);
        out.add("zeta", c * s * sinks);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rsa_catalogue_lists_every_window() {
        let spec = SpectrumSpec::rsa(4, 2, Default::default());
        let c = catalog(&spec);
        assert_eq!(c.len(), 4 + 3);
        assert!(c.iter().all(|ch| ch.end() <= 4 && ch.width <= 2));
        assert_eq!(c[4], SuperChannel { start: 0, width: 2 });
        assert_eq!(catalog(&SpectrumSpec::rwa(3)).len(), 3);
    }

    #[test]
    fn blocking_is_interval_overlap() {
        let ch = |start, width| SuperChannel { start, width };
        assert!(superchannels_block(ch(0, 2), ch(1, 1)));
        assert!(superchannels_block(ch(1, 1), ch(0, 2)));
        assert!(!superchannels_block(ch(0, 2), ch(2, 2)));
        assert!(superchannels_block(ch(3, 1), ch(3, 1)));
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let p = fixtures::diamond_rwa(2);
        assert!(encode_rsa(&p, &PenaltyWeights::default()).is_err());
        assert!(encode_rwa(&fixtures::problem_a(), &PenaltyWeights::default()).is_err());
    }

    #[test]
    fn counts_match_registry() {
        let p = fixtures::diamond_rwa(3);
        let enc = encode_rwa(&p, &PenaltyWeights::default()).unwrap();
        let sub = count_vars_spectrum_with(&p, Formulation::Rwa, EncodeOptions::default()).unwrap();
        assert_eq!(enc.encoding.role_counts(), sub);
        // the source indicator of every tree is a constant
        let full = count_vars_spectrum(&p, Formulation::Rwa).unwrap();
        assert_eq!(full.get("x") - sub.get("x"), 3);
        assert_eq!(enc.encoding.channels.len(), 3);
    }
}
