mod common;

use optiroute::encode::{count_vars, encode, EncodeOptions, Formulation};
use optiroute::fixtures;
use optiroute::qubo::{Category, PenaltyWeights};
use optiroute::routes::{decode, witness, RouteKind, RouteSet};
use optiroute::validate::validate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::micro_instances;

fn formulation() -> impl Strategy<Value = Formulation> {
    prop_oneof![
        Just(Formulation::Time),
        Just(Formulation::Path),
        Just(Formulation::Rwa),
        Just(Formulation::Rsa),
    ]
}

fn options() -> impl Strategy<Value = EncodeOptions> {
    prop_oneof![Just(EncodeOptions::default()), Just(EncodeOptions::unsubstituted())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_equal_registry_and_energies_are_sane(
        f in formulation(),
        opts in options(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = micro_instances(f, 1, 64, &mut rng).pop().unwrap();
        let enc = encode(&p, f, &PenaltyWeights::default(), opts).unwrap();
        prop_assert_eq!(enc.encoding.role_counts(), count_vars(&p, f, opts).unwrap());
        prop_assert_eq!(enc.qubo.num_vars(), enc.encoding.num_vars());
        for _ in 0..16 {
            let x: Vec<bool> = (0..enc.qubo.num_vars()).map(|_| rng.gen()).collect();
            let hard = enc.hard_energy(&x).unwrap();
            prop_assert!(hard >= -1e-9, "negative penalty {}", hard);
            let obj = enc.objective.energy(&x).unwrap();
            prop_assert!(obj >= 0.0);
            prop_assert!((enc.qubo.energy(&x).unwrap() - hard - obj).abs() < 1e-6);
            // decoding never fails, and a zero-penalty state audits valid
            let routes = decode(&p, &enc.encoding, &x).unwrap();
            if hard == 0.0 {
                prop_assert!(validate(&p, &routes).valid);
            }
        }
    }

    #[test]
    fn reference_witness_is_zero_under_any_weights(
        structural in 0.01f64..50.0,
        resource in 0.01f64..50.0,
        objective in 0.01f64..5.0,
        b in any::<bool>(),
        path in any::<bool>(),
    ) {
        let (p, reference) = if b {
            (fixtures::problem_b(), fixtures::reference_b())
        } else {
            (fixtures::problem_a(), fixtures::reference_a())
        };
        let (f, kind) = if path { (Formulation::Path, RouteKind::Path) } else { (Formulation::Time, RouteKind::Tree) };
        let mut w = PenaltyWeights::default();
        w.apply_overrides(&format!("structural={structural},resource={resource}")).unwrap();
        w.set(Category::Objective, objective).unwrap();
        let routes = RouteSet::from_reference(&p, kind, &reference).unwrap();
        let enc = encode(&p, f, &w, EncodeOptions::default()).unwrap();
        let x = witness(&p, &enc.encoding, &routes).unwrap();
        // arbitrary decimal weights leave float residue in the expanded squares
        prop_assert!(enc.hard_energy(&x).unwrap().abs() < 1e-9);
        prop_assert_eq!(decode(&p, &enc.encoding, &x).unwrap(), routes);
        let obj = enc.objective.energy(&x).unwrap();
        prop_assert!(obj > 0.0 && obj <= objective + 1e-9);
    }

    #[test]
    fn flipping_a_routed_edge_is_penalised(idx in any::<prop::sample::Index>(), path in any::<bool>()) {
        let p = fixtures::problem_a();
        let (f, kind) = if path { (Formulation::Path, RouteKind::Path) } else { (Formulation::Time, RouteKind::Tree) };
        let routes = RouteSet::from_reference(&p, kind, &fixtures::reference_a()).unwrap();
        let enc = encode(&p, f, &PenaltyWeights::default(), EncodeOptions::default()).unwrap();
        let mut x = witness(&p, &enc.encoding, &routes).unwrap();
        let on: Vec<usize> = (0..x.len()).filter(|&i| x[i] && enc.encoding.roles[i].kind().starts_with('e')).collect();
        let i = on[idx.index(on.len())];
        x[i] = false;
        prop_assert!(enc.hard_energy(&x).unwrap() > 0.0);
    }
}
