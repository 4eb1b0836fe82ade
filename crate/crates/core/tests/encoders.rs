mod common;

use std::collections::BTreeSet;

use optiroute::encode::{count_vars, encode, EncodeOptions, Formulation, Role};
use optiroute::fixtures;
use optiroute::model::NetworkProblem;
use optiroute::qubo::PenaltyWeights;
use optiroute::routes::{decode, RouteSet};
use optiroute::solver::{solve_exact, ExactOptions};
use optiroute::validate::validate;

use common::{build, commodity, edge, file};

fn total(p: &NetworkProblem, f: Formulation, options: EncodeOptions) -> usize {
    count_vars(p, f, options).unwrap().total()
}

#[test]
fn time_encoding_is_larger_than_path_on_problem_a() {
    // one commodity with four sinks and a 5-bit time register: the per-node
    // time bits and per-edge products outweigh four per-sink flow copies
    let a = fixtures::problem_a();
    for options in [EncodeOptions::default(), EncodeOptions::unsubstituted()] {
        let time = total(&a, Formulation::Time, options);
        let path = total(&a, Formulation::Path, options);
        assert!(time > path, "time {time} path {path}");
    }
    assert_eq!(total(&a, Formulation::Path, EncodeOptions::default()), 408);
}

#[test]
fn path_encoding_overtakes_time_as_sinks_grow() {
    let names = ["s", "a", "b", "c", "d", "e"];
    let mut edges = Vec::new();
    for x in names {
        for y in names {
            if x != y && y != "s" {
                edges.push(edge(x, y, 1, 1, 1));
            }
        }
    }
    let sizes: Vec<(usize, usize)> = (1..names.len())
        .map(|k| {
            let p = build(file(&names, edges.clone(), vec![commodity("k", &["s"], &names[1..=k], 1)], 1));
            (
                total(&p, Formulation::Time, EncodeOptions::default()),
                total(&p, Formulation::Path, EncodeOptions::default()),
            )
        })
        .collect();
    let (first_time, first_path) = sizes[0];
    let (last_time, last_path) = *sizes.last().unwrap();
    assert!(first_time > first_path, "{sizes:?}");
    assert!(last_path > last_time, "{sizes:?}");
    // path cost grows linearly in the sink count
    let steps: BTreeSet<usize> = sizes.windows(2).map(|w| w[1].1 - w[0].1).collect();
    assert_eq!(steps.len(), 1);
}

#[test]
fn spectrum_counts_follow_the_worked_example() {
    // two colours, one source, four nodes, five edges, t_max 7
    let mut f = fixtures::diamond_rwa(2).file().clone();
    f.edges.push(edge("A", "B", 1, 1, 1));
    f.t_max = 7;
    let c = count_vars(&build(f), Formulation::Rwa, EncodeOptions::unsubstituted()).unwrap();
    assert_eq!((c.get("x"), c.get("e_k"), c.get("t"), c.get("xi")), (8, 10, 24, 30));
}

#[test]
fn rwa_ground_states_are_colour_symmetric() {
    let p = fixtures::diamond_rwa(2);
    let enc = encode(&p, Formulation::Rwa, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
    let n = enc.qubo.num_vars();
    let routing: Vec<usize> = (0..n)
        .filter(|&i| matches!(enc.encoding.roles[i], Role::TreeEdge { .. } | Role::Delta { .. }))
        .collect();
    // minimum energy of every routing pattern over its free completions
    let mut best = f64::INFINITY;
    let mut ground = Vec::new();
    for mask in 0u32..1 << routing.len() {
        let mut fixed = vec![None; n];
        for (j, &v) in routing.iter().enumerate() {
            fixed[v] = Some(mask >> j & 1 == 1);
        }
        let (sub, free) = enc.qubo.restrict(&fixed).unwrap();
        let r = solve_exact(&sub, ExactOptions { max_width: 22, max_solutions: 1 }).unwrap();
        if r.energy < best - 1e-9 {
            best = r.energy;
            ground.clear();
        }
        if (r.energy - best).abs() <= 1e-9 {
            let mut x: Vec<bool> = fixed.iter().map(|b| b.unwrap_or(false)).collect();
            for (k, &v) in free.iter().enumerate() {
                x[v] = r.assignments[0][k];
            }
            ground.push(x);
        }
    }
    let mut routes = BTreeSet::new();
    for x in &ground {
        assert_eq!(enc.hard_energy(x).unwrap(), 0.0);
        let rs = decode(&p, &enc.encoding, x).unwrap();
        assert!(validate(&p, &rs).valid);
        let RouteSet::Spectrum { trees, assignments, .. } = rs else { panic!() };
        assert_eq!(assignments.len(), 1);
        let &(source, colour, _) = assignments.iter().next().unwrap();
        routes.insert((colour, trees[&(source, colour)].clone()));
    }
    // each optimal tree appears once per colour
    let by = |c: usize| routes.iter().filter(|r| r.0 == c).map(|r| r.1.clone()).collect::<BTreeSet<_>>();
    assert_eq!(by(0).len(), 2);
    assert_eq!(by(0), by(1));
    assert_eq!(routes.len(), 4);
}

#[test]
fn rsa_needs_room_for_both_channels() {
    let widths = [("k1".to_owned(), 2), ("k2".to_owned(), 2)];
    let make = |slots| {
        let mut f = file(
            &["S", "T"],
            vec![edge("S", "T", 1, 1, 1)],
            vec![commodity("k1", &["S"], &["T"], 1), commodity("k2", &["S"], &["T"], 1)],
            1,
        );
        f.spectrum = Some(optiroute::model::SpectrumSpec::rsa(slots, 2, widths.clone().into()));
        build(f)
    };
    for (slots, feasible) in [(3, false), (4, true), (5, true)] {
        let p = make(slots);
        let enc = encode(&p, Formulation::Rsa, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
        let r = solve_exact(&enc.hard, ExactOptions { max_width: 22, max_solutions: 1 }).unwrap();
        assert_eq!(r.energy == 0.0, feasible, "{slots} slots");
    }
}

#[test]
fn weights_scale_penalties_but_not_the_zero_set() {
    let p = fixtures::problem_b();
    let reference = RouteSet::from_reference(&p, optiroute::routes::RouteKind::Path, &fixtures::reference_b()).unwrap();
    let mut heavy = PenaltyWeights::default();
    heavy.apply_overrides("structural=10,resource=7").unwrap();
    let light = encode(&p, Formulation::Path, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
    let strong = encode(&p, Formulation::Path, &heavy, EncodeOptions::default()).unwrap();
    let x = optiroute::routes::witness(&p, &strong.encoding, &reference).unwrap();
    assert_eq!(strong.hard_energy(&x).unwrap(), 0.0);
    let zero = vec![false; x.len()];
    assert!(strong.hard_energy(&zero).unwrap() > light.hard_energy(&zero).unwrap());
    assert_eq!(strong.qubo.num_vars(), light.qubo.num_vars());
}
