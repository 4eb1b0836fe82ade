//! End-to-end run: load, encode, anneal, decode, audit and report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encode::{count_vars, encode, EncodeOptions, EncodedQubo, Formulation, VarCounts};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::NetworkProblem;
use crate::qubo::PenaltyWeights;
use crate::routes::{decode, RouteSetView};
use crate::solver::{export_qubo, solve_anneal, AnnealParams, ExportFormat, SampleSet};
use crate::validate::{resilience_check, validate, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemSource {
    File(PathBuf),
    Fixture(String),
}

impl ProblemSource {
    pub fn load(&self) -> Result<NetworkProblem> {
        match self {
            ProblemSource::File(p) => NetworkProblem::load(p),
            ProblemSource::Fixture(name) => fixtures::by_name(name)
                .map(|(p, _)| p)
                .ok_or_else(|| Error::validation("fixture", format!("unknown fixture `{name}`"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::File(p) => p.display().to_string(),
            ProblemSource::Fixture(name) => format!("fixture:{name}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub formulation: Formulation,
    pub weights: PenaltyWeights,
    pub anneal: AnnealParams,
    pub options: EncodeOptions,
    pub export_only: bool,
    pub export_format: ExportFormat,
}

impl RunConfig {
    pub fn new(source: ProblemSource, formulation: Formulation) -> Self {
        RunConfig {
            source,
            formulation,
            weights: PenaltyWeights::default(),
            anneal: AnnealParams::default(),
            options: EncodeOptions::default(),
            export_only: false,
            export_format: ExportFormat::Json,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub read: usize,
    pub energy: f64,
    pub hard_energy: f64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resilient: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_checks: Vec<String>,
}

/// Samples whose energy lies in `[lo, lo + 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: i64,
    pub valid: usize,
    pub invalid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSolution {
    pub read: usize,
    pub energy: f64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resilient: Option<bool>,
    pub routes: RouteSetView,
    pub validation: ValidationReport,
    /// Assignment as a string of `0`/`1` in variable order.
    pub assignment: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub formulation: Formulation,
    pub num_vars: usize,
    pub num_terms: usize,
    pub qubo_sha256: String,
    pub counts: VarCounts,
    pub weights: PenaltyWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<AnnealParams>,
    pub num_valid: usize,
    pub histogram: Vec<HistogramBin>,
    /// Sorted by energy, then read.
    pub samples: Vec<SampleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<BestSolution>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub encode: Duration,
    pub solve: Duration,
    pub audit: Duration,
}

pub struct RunOutcome {
    pub problem: NetworkProblem,
    pub encoded: EncodedQubo,
    pub report: RunReport,
    pub timings: Timings,
}

impl RunOutcome {
    /// Process exit status: success iff a valid sample was found, or nothing
    /// was solved.
    pub fn success(&self, export_only: bool) -> bool {
        export_only || self.report.num_valid > 0
    }
}

pub fn counts(config: &RunConfig) -> Result<VarCounts> {
    let problem = config.source.load()?;
    count_vars(&problem, config.formulation, config.options)
}

pub fn bits_to_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_str(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Format(format!("assignment has non-binary character `{c}`"))),
        })
        .collect()
}

pub fn histogram(samples: &[SampleRecord]) -> Vec<HistogramBin> {
    let mut bins: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for s in samples {
        let slot = bins.entry(s.energy.floor() as i64).or_default();
        if s.valid {
            slot.0 += 1;
        } else {
            slot.1 += 1;
        }
    }
    bins.into_iter()
        .map(|(lo, (valid, invalid))| HistogramBin { lo, valid, invalid })
        .collect()
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let problem = config.source.load()?;
    let t0 = Instant::now();
    let encoded = encode(&problem, config.formulation, &config.weights, config.options)?;
    let mut timings = Timings {
        encode: t0.elapsed(),
        ..Timings::default()
    };
    let mut report = RunReport {
        problem: config.source.label(),
        formulation: config.formulation,
        num_vars: encoded.qubo.num_vars(),
        num_terms: encoded.qubo.num_terms(),
        qubo_sha256: encoded.qubo.sha256(),
        counts: encoded.encoding.role_counts(),
        weights: config.weights.clone(),
        params: None,
        num_valid: 0,
        histogram: Vec::new(),
        samples: Vec::new(),
        best: None,
    };
    if config.export_only {
        return Ok(RunOutcome {
            problem,
            encoded,
            report,
            timings,
        });
    }

    let t1 = Instant::now();
    let set = solve_anneal(&encoded.qubo, config.anneal)?;
    timings.solve = t1.elapsed();

    let t2 = Instant::now();
    let (samples, best) = audit(&problem, &encoded, &set)?;
    report.samples = samples;
    timings.audit = t2.elapsed();

    report.num_valid = report.samples.iter().filter(|s| s.valid).count();
    report.histogram = histogram(&report.samples);
    report.params = Some(set.params);
    report.best = best;
    Ok(RunOutcome {
        problem,
        encoded,
        report,
        timings,
    })
}

/// Decodes and validates every sample. The best sample is the lowest-energy
/// valid one, else the lowest-energy one; samples arrive sorted by energy.
pub fn audit(
    problem: &NetworkProblem,
    encoded: &EncodedQubo,
    set: &SampleSet,
) -> Result<(Vec<SampleRecord>, Option<BestSolution>)> {
    let mut records = Vec::with_capacity(set.samples.len());
    let mut best: Option<BestSolution> = None;
    for s in &set.samples {
        let routes = decode(problem, &encoded.encoding, &s.assignment)?;
        let v = validate(problem, &routes);
        let resilient = resilience_check(problem, &routes).map(|r| r.resilient);
        records.push(SampleRecord {
            read: s.read,
            energy: s.energy,
            hard_energy: encoded.hard_energy(&s.assignment)?,
            valid: v.valid,
            resilient,
            failed_checks: v.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
        });
        if best.as_ref().is_none_or(|b| !b.valid && v.valid) {
            best = Some(BestSolution {
                read: s.read,
                energy: s.energy,
                valid: v.valid,
                resilient,
                routes: routes.view(problem),
                validation: v,
                assignment: bits_to_string(&s.assignment),
            });
        }
    }
    Ok((records, best))
}

pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

pub fn summary_text(outcome: &RunOutcome) -> String {
    let r = &outcome.report;
    let mut s = String::new();
    let _ = writeln!(s, "problem      {}", r.problem);
    let _ = writeln!(s, "formulation  {}", r.formulation);
    let _ = writeln!(s, "variables    {} ({} terms)", r.num_vars, r.num_terms);
    let _ = writeln!(s, "qubo sha256  {}", r.qubo_sha256);
    let roles: Vec<String> = r.counts.0.iter().map(|(k, n)| format!("{k}={n}")).collect();
    let _ = writeln!(s, "counts       {}", roles.join(" "));
    if let Some(p) = &r.params {
        let _ = writeln!(
            s,
            "anneal       reads={} sweeps={} beta={}..{} seed={}",
            p.num_reads, p.sweeps_per_read, p.beta_start, p.beta_end, p.seed
        );
        let _ = writeln!(s, "valid        {}/{}", r.num_valid, r.samples.len());
        if let Some(first) = r.samples.first() {
            let _ = writeln!(s, "min energy   {}", first.energy);
        }
    }
    if let Some(b) = &r.best {
        let _ = writeln!(
            s,
            "best         read {} energy {} valid={}{}",
            b.read,
            b.energy,
            b.valid,
            b.resilient.map(|x| format!(" resilient={x}")).unwrap_or_default()
        );
        if let Some(l) = b.validation.max_latency {
            let _ = writeln!(s, "max latency  {l}");
        }
        for c in b.validation.checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(s, "  failed {}: {}", c.name, c.details.join("; "));
        }
    }
    let t = &outcome.timings;
    let _ = writeln!(
        s,
        "timings      encode {:.3}s solve {:.3}s audit {:.3}s",
        t.encode.as_secs_f64(),
        t.solve.as_secs_f64(),
        t.audit.as_secs_f64()
    );
    s
}

/// Stacked bar chart of sample energies, valid samples in dark green.
pub fn histogram_svg(report: &RunReport) -> String {
    const W: f64 = 720.0;
    const H: f64 = 360.0;
    const PAD: f64 = 48.0;
    let bins = &report.histogram;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} / {}: {} of {} samples valid</text>"#,
        W / 2.0,
        xml_escape(&report.problem),
        report.formulation,
        report.num_valid,
        report.samples.len()
    );
    let max = bins.iter().map(|b| b.valid + b.invalid).max().unwrap_or(0).max(1);
    let n = bins.len().max(1) as f64;
    let plot_w = W - 2.0 * PAD;
    let plot_h = H - 2.0 * PAD;
    let bw = plot_w / n;
    for (i, b) in bins.iter().enumerate() {
        let x = PAD + i as f64 * bw;
        let hv = plot_h * b.valid as f64 / max as f64;
        let hi = plot_h * b.invalid as f64 / max as f64;
        let base = H - PAD;
        if b.invalid > 0 {
            let _ = writeln!(
                s,
                r##"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{hi:.2}" fill="#b0b0b0"><title>[{}, {}): {} invalid</title></rect>"##,
                base - hv - hi,
                (bw - 1.0).max(1.0),
                b.lo,
                b.lo + 1,
                b.invalid
            );
        }
        if b.valid > 0 {
            let _ = writeln!(
                s,
                r##"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{hv:.2}" fill="#006400"><title>[{}, {}): {} valid</title></rect>"##,
                base - hv,
                (bw - 1.0).max(1.0),
                b.lo,
                b.lo + 1,
                b.valid
            );
        }
        let step = (bins.len() / 12).max(1);
        if i % step == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                x + bw / 2.0,
                H - PAD + 14.0,
                b.lo
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{y}" x2="{x2}" y2="{y}" stroke="black"/>"#,
        y = H - PAD,
        x2 = W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">energy</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="end">{max}</text>"#, PAD + 4.0);
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the run artifacts into `dir` and returns their paths.
pub fn write_outputs(outcome: &RunOutcome, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let exported = export_qubo(&outcome.encoded.qubo, &outcome.encoded.encoding, dir, config.export_format)?;
    let mut written = vec![exported.qubo, exported.encoding];
    if config.export_only {
        return Ok(written);
    }
    let r = &outcome.report;
    let files = [
        ("report.json", report_json(r)),
        ("summary.txt", summary_text(outcome)),
        ("histogram.svg", histogram_svg(r)),
        (
            "best_solution.json",
            serde_json::to_string_pretty(&r.best)? + "\n",
        ),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(energy: f64, valid: bool) -> SampleRecord {
        SampleRecord {
            read: 0,
            energy,
            hard_energy: 0.0,
            valid,
            resilient: None,
            failed_checks: Vec::new(),
        }
    }

    #[test]
    fn histogram_bins_by_unit_interval() {
        let samples = [record(0.2, true), record(0.9, false), record(3.0, false), record(3.5, true)];
        let h = histogram(&samples);
        assert_eq!(
            h,
            vec![
                HistogramBin { lo: 0, valid: 1, invalid: 1 },
                HistogramBin { lo: 3, valid: 1, invalid: 1 },
            ]
        );
        assert_eq!(h.iter().map(|b| b.valid + b.invalid).sum::<usize>(), samples.len());
    }

    #[test]
    fn bit_strings_round_trip() {
        let x = vec![true, false, false, true];
        assert_eq!(bits_to_string(&x), "1001");
        assert_eq!(bits_from_str("1001").unwrap(), x);
        assert!(bits_from_str("10x").is_err());
    }

    #[test]
    fn unknown_fixture_is_an_error() {
        assert!(ProblemSource::Fixture("Z".into()).load().is_err());
    }

    #[test]
    fn svg_marks_valid_bars() {
        let report = RunReport {
            problem: "p<1>".into(),
            formulation: Formulation::Path,
            num_vars: 0,
            num_terms: 0,
            qubo_sha256: String::new(),
            counts: VarCounts::default(),
            weights: PenaltyWeights::default(),
            params: None,
            num_valid: 1,
            histogram: histogram(&[record(0.5, true), record(2.0, false)]),
            samples: vec![record(0.5, true), record(2.0, false)],
            best: None,
        };
        let svg = histogram_svg(&report);
        assert!(svg.contains("#006400"));
        assert!(svg.contains("p&lt;1&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
