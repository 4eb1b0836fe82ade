use optiroute::encode::{count_vars, encode, EncodeOptions, Formulation};
use optiroute::fixtures;
use optiroute::qubo::PenaltyWeights;
use optiroute::routes::{decode, witness, RouteKind, RouteSet};
use optiroute::validate::{resilience_check, validate};

fn check(problem: &optiroute::model::NetworkProblem, reference: &fixtures::ReferenceRoutes) {
    for (formulation, kind) in [(Formulation::Time, RouteKind::Tree), (Formulation::Path, RouteKind::Path)] {
        let routes = RouteSet::from_reference(problem, kind, reference).unwrap();
        let report = validate(problem, &routes);
        assert!(report.is_clean(), "{formulation}: {report:#?}");
        assert!(resilience_check(problem, &routes).unwrap().resilient);
        for options in [EncodeOptions::default(), EncodeOptions::unsubstituted()] {
            let enc = encode(problem, formulation, &PenaltyWeights::default(), options).unwrap();
            assert_eq!(enc.encoding.role_counts(), count_vars(problem, formulation, options).unwrap());
            let x = witness(problem, &enc.encoding, &routes).expect("witness");
            assert_eq!(enc.hard.energy(&x).unwrap(), 0.0, "{formulation} {options:?}");
            assert_eq!(decode(problem, &enc.encoding, &x).unwrap(), routes);
            let obj = enc.objective.energy(&x).unwrap();
            assert!(obj > 0.0 && obj < 1.0, "{obj}");
        }
    }
}

#[test]
fn problem_a_reference_is_valid_and_zero_energy() {
    check(&fixtures::problem_a(), &fixtures::reference_a());
}

#[test]
fn problem_b_reference_is_valid_and_zero_energy() {
    check(&fixtures::problem_b(), &fixtures::reference_b());
}
