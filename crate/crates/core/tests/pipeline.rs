use optiroute::encode::Formulation;
use optiroute::fixtures;
use optiroute::pipeline::{self, ProblemSource, RunConfig};
use optiroute::qubo::io::from_json;

#[test]
fn export_only_skips_solving() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(ProblemSource::Fixture("A".into()), Formulation::Path);
    config.export_only = true;
    let outcome = pipeline::run(&config).unwrap();
    assert!(outcome.report.samples.is_empty());
    assert!(outcome.report.best.is_none());
    assert!(outcome.success(true));
    let written = pipeline::write_outputs(&outcome, &config, dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    let q = from_json(&std::fs::read_to_string(dir.path().join("qubo.json")).unwrap()).unwrap();
    let original = &outcome.encoded.qubo;
    assert_eq!(q.num_vars(), original.num_vars());
    assert_eq!(q.terms().collect::<Vec<_>>(), original.terms().collect::<Vec<_>>());
    assert_eq!(q.sha256(), outcome.report.qubo_sha256);
}

#[test]
fn problem_file_and_fixture_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    fixtures::problem_b().save(&path).unwrap();
    let mut from_file = RunConfig::new(ProblemSource::File(path), Formulation::Path);
    let mut from_fixture = RunConfig::new(ProblemSource::Fixture("B".into()), Formulation::Path);
    for c in [&mut from_file, &mut from_fixture] {
        c.anneal.num_reads = 8;
        c.anneal.sweeps_per_read = 200;
    }
    let a = pipeline::run(&from_file).unwrap().report;
    let b = pipeline::run(&from_fixture).unwrap().report;
    assert_eq!(a.qubo_sha256, b.qubo_sha256);
    assert_eq!(a.samples, b.samples);
    assert_ne!(a.problem, b.problem);
}

#[test]
fn report_is_consistent() {
    let mut config = RunConfig::new(ProblemSource::Fixture("diamond".into()), Formulation::Rwa);
    config.anneal.num_reads = 30;
    let outcome = pipeline::run(&config).unwrap();
    let r = &outcome.report;
    assert_eq!(r.samples.len(), 30);
    assert_eq!(r.num_valid, r.samples.iter().filter(|s| s.valid).count());
    assert!(r.samples.windows(2).all(|w| w[0].energy <= w[1].energy));
    let best = r.best.as_ref().unwrap();
    assert!(best.valid);
    assert!(r.samples.iter().filter(|s| s.valid).all(|s| s.energy >= best.energy));
    // spectrum route sets have no risk-group pairing to check
    assert!(best.resilient.is_none());
    let summary = pipeline::summary_text(&outcome);
    assert!(summary.contains(&format!("{}/30", r.num_valid)), "{summary}");
    assert!(pipeline::histogram_svg(r).starts_with("<svg"));
}

#[test]
fn missing_problem_file_is_an_error() {
    let config = RunConfig::new(ProblemSource::File("/nonexistent/p.json".into()), Formulation::Time);
    assert!(pipeline::run(&config).is_err());
    assert!(pipeline::counts(&config).is_err());
}
