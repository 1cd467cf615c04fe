//! Subcommand bodies. Each returns the files it wants written; `run`
//! writes them together with the manifest.

use std::fs;
use std::path::Path;

use arrowlab_core::fixtures::{random_retrodiction_fixture, random_two_time_fixture};
use arrowlab_core::oracle::{
    enumerate_retrodiction, enumerate_two_time, monte_carlo_bounded, scenario_counts,
    SamplingMethod, ENUMERATION_LIMIT,
};
use arrowlab_core::retrodiction::{
    backward_posterior, backward_posterior_dynamical, dynamical_problem, fire_alarm_demo,
    perturb_terms, FireAlarmReport, Perturbation, PosteriorReport, RetrodictionProblem,
};
use arrowlab_core::scenario::{
    bounded_distribution, entropy_scan, EntropyRow, Scenario, ScenarioParams,
};
use arrowlab_core::two_time::{
    exact_to_f64, mixing_defect, perfect_mixing_distribution, two_time_distribution,
};
use arrowlab_core::{Exact, TwoTimeProblem};
use serde::Serialize;

use crate::config::{
    CommandConfig, EntropyScanConfig, OracleCheckConfig, OutputFormat, RetrodictConfig,
    RetrodictMode, TwoTimeConfig, TwoTimeSpec,
};
use crate::error::{CliError, Result};
use crate::manifest::{timestamp, OutputDigest, RunManifest};
use crate::output::{entropy_svg, json_bytes, num, Csv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            bytes,
        }
    }
}

/// Files produced by a command, plus a failure message if a check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Outcome {
            artifacts,
            failure: None,
        }
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

pub fn execute(config: &CommandConfig) -> Result<Outcome> {
    match config {
        CommandConfig::EntropyScan(c) => cmd_entropy_scan(c),
        CommandConfig::TwoTime(c) => cmd_two_time(c),
        CommandConfig::Retrodict(c) => cmd_retrodict(c),
        CommandConfig::OracleCheck(c) => cmd_oracle_check(c),
    }
}

/// Executes `config`, writes its artifacts and manifest into the output
/// directory, and returns the manifest. A failed check is reported as
/// `CliError::CheckFailed` after everything has been written.
pub fn run(config: &CommandConfig) -> Result<RunManifest> {
    let started_at = timestamp();
    let outcome = execute(config)?;
    let dir = config.output_dir();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut manifest = RunManifest::new(config.kind().name(), config.to_json(), started_at);
    for artifact in &outcome.artifacts {
        let path = dir.join(&artifact.name);
        fs::write(&path, &artifact.bytes).map_err(|e| CliError::io(&path, e))?;
        manifest
            .outputs
            .push(OutputDigest::of(&artifact.name, &artifact.bytes));
    }
    manifest.finished_at = timestamp();
    manifest.write(&manifest_path(config, dir))?;
    match outcome.failure {
        Some(message) => Err(CliError::CheckFailed(message)),
        None => Ok(manifest),
    }
}

pub fn manifest_path(config: &CommandConfig, dir: &Path) -> std::path::PathBuf {
    dir.join(format!(
        "{}.manifest.json",
        config.kind().name().replace('-', "_")
    ))
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

pub fn cmd_entropy_scan(config: &EntropyScanConfig) -> Result<Outcome> {
    let mut p_values = config.p_values.clone();
    p_values.sort_by(f64::total_cmp);
    let mut s_grid = config.s_grid.values();
    s_grid.sort_by(f64::total_cmp);
    if p_values.is_empty() || s_grid.is_empty() {
        return Err(CliError::Invalid(
            "entropy-scan needs at least one p and one s".into(),
        ));
    }
    let rows = entropy_scan(&p_values, &s_grid)?;
    let data = match config.format {
        OutputFormat::Csv => {
            let mut csv = Csv::with_header(&["p", "s", "Z_b"]);
            for row in &rows {
                csv.row([num(row.p), num(row.s), num(row.z_b)]);
            }
            csv.into_bytes()
        }
        OutputFormat::Json => json_bytes(&rows),
    };
    let mut artifacts = vec![Artifact::new(
        format!("entropy_scan.{}", extension(config.format)),
        data,
    )];
    if config.svg {
        artifacts.push(Artifact::new(
            "entropy_scan.svg",
            entropy_svg(&rows).into_bytes(),
        ));
    }
    Ok(Outcome::ok(artifacts))
}

/// Reads the rows of an entropy scan back from its CSV text.
pub fn parse_entropy_csv(text: &str) -> Result<Vec<EntropyRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("p,s,Z_b") {
        return Err(CliError::Invalid("missing p,s,Z_b header".into()));
    }
    lines
        .map(|line| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CliError::Invalid(format!("bad row {line:?}: {e}")))?;
            match fields[..] {
                [p, s, z_b] => Ok(EntropyRow { p, s, z_b }),
                _ => Err(CliError::Invalid(format!("bad row {line:?}"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoTimeRow {
    pub label: String,
    pub two_time_exact: String,
    pub two_time: f64,
    pub perfect_mixing_exact: String,
    pub perfect_mixing: f64,
    pub abs_gap: f64,
    /// Defect of φ^t(ε0) ∩ Δα against εT over T − t steps.
    pub mixing_defect: f64,
}

fn abs_diff(a: &Exact, b: &Exact) -> Exact {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Per-macrostate comparison of the two-time and perfect-mixing
/// distributions for one problem.
pub fn two_time_rows(spec: &TwoTimeSpec, master_seed: u64) -> Result<Vec<TwoTimeRow>> {
    let system = spec.system.build(master_seed)?;
    let epsilon0 = spec.epsilon0.build(&system.partition)?;
    let epsilon_t = spec.epsilon_t.build(&system.partition)?;
    let problem = TwoTimeProblem::new(
        epsilon0.clone(),
        epsilon_t.clone(),
        spec.t,
        spec.final_time,
        &system.dynamics,
    )?;
    let two = two_time_distribution(&problem, &system.partition)?;
    let mix = perfect_mixing_distribution(&epsilon0, &system.partition, spec.t, &system.dynamics)?;
    let present = system.dynamics.evolve(&epsilon0, spec.t)?;
    let lag = spec.final_time - spec.t;
    system
        .partition
        .labels()
        .iter()
        .zip(system.partition.blocks())
        .zip(two.probabilities().iter().zip(mix.probabilities()))
        .map(|((label, block), (a, b))| {
            let piece = present.intersect(block)?;
            Ok(TwoTimeRow {
                label: label.clone(),
                two_time_exact: a.to_string(),
                two_time: exact_to_f64(a),
                perfect_mixing_exact: b.to_string(),
                perfect_mixing: exact_to_f64(b),
                abs_gap: exact_to_f64(&abs_diff(a, b)),
                mixing_defect: mixing_defect(&piece, &epsilon_t, lag, &system.dynamics)?,
            })
        })
        .collect()
}

pub fn cmd_two_time(config: &TwoTimeConfig) -> Result<Outcome> {
    let rows = two_time_rows(&config.problem, config.master_seed)?;
    let data = match config.format {
        OutputFormat::Csv => {
            let mut csv = Csv::with_header(&[
                "label",
                "two_time_exact",
                "two_time",
                "perfect_mixing_exact",
                "perfect_mixing",
                "abs_gap",
                "mixing_defect",
            ]);
            for r in &rows {
                csv.row([
                    r.label.clone(),
                    r.two_time_exact.clone(),
                    num(r.two_time),
                    r.perfect_mixing_exact.clone(),
                    num(r.perfect_mixing),
                    num(r.abs_gap),
                    num(r.mixing_defect),
                ]);
            }
            csv.into_bytes()
        }
        OutputFormat::Json => json_bytes(&rows),
    };
    Ok(Outcome::ok(vec![Artifact::new(
        format!("two_time.{}", extension(config.format)),
        data,
    )]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrodictReport {
    pub mode: &'static str,
    pub observed: String,
    pub prior: Vec<f64>,
    pub likelihoods: Vec<f64>,
    pub posterior: PosteriorReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fire_alarm: Option<FireAlarmReport>,
}

pub fn retrodict_report(config: &RetrodictConfig) -> Result<RetrodictReport> {
    let (mode, problem, fire_alarm) = match &config.mode {
        RetrodictMode::Abstract {
            hypotheses,
            prior,
            likelihoods,
            observed,
        } => {
            let names = hypotheses
                .clone()
                .unwrap_or_else(|| (1..=prior.len()).map(|i| format!("H{i}")).collect());
            let problem =
                RetrodictionProblem::new(names, prior.clone(), likelihoods.clone(), observed)?;
            ("abstract", problem, None)
        }
        RetrodictMode::Dynamical {
            system,
            prior,
            observed,
            lag,
        } => {
            let system = system.build(config.master_seed)?;
            let problem = dynamical_problem(
                &system.partition,
                &system.dynamics,
                prior.clone(),
                observed,
                *lag,
            )?;
            ("dynamical", problem, None)
        }
        RetrodictMode::FireAlarm {
            prior_fire,
            prior_drill,
        } => {
            if config.deltas.is_some() {
                return Err(CliError::Invalid(
                    "deltas are not accepted in fire_alarm mode".into(),
                ));
            }
            let report = fire_alarm_demo(*prior_fire, *prior_drill)?;
            let posterior = report.joint.after.clone();
            let (f, d) = (*prior_fire, *prior_drill);
            let prior = vec![f * d, f * (1.0 - d), (1.0 - f) * d, (1.0 - f) * (1.0 - d)];
            return Ok(RetrodictReport {
                mode: "fire_alarm",
                observed: "alarm".into(),
                likelihoods: vec![1.0, 1.0, 1.0, 0.0],
                prior,
                posterior,
                perturbation: None,
                fire_alarm: Some(report),
            });
        }
    };
    let posterior = backward_posterior(&problem)?;
    let perturbation = match &config.deltas {
        Some(deltas) => Some(perturb_terms(&problem, deltas)?),
        None => None,
    };
    Ok(RetrodictReport {
        mode,
        observed: problem.observed().to_string(),
        prior: problem.prior().to_vec(),
        likelihoods: problem.likelihoods().to_vec(),
        posterior,
        perturbation,
        fire_alarm,
    })
}

pub fn cmd_retrodict(config: &RetrodictConfig) -> Result<Outcome> {
    let report = retrodict_report(config)?;
    let data = match config.format {
        OutputFormat::Json => json_bytes(&report),
        OutputFormat::Csv => {
            let mut columns = vec!["hypothesis", "prior", "likelihood", "term", "posterior"];
            if report.perturbation.is_some() {
                columns.extend(["delta", "posterior_after"]);
            }
            let mut csv = Csv::with_header(&columns);
            for (i, h) in report.posterior.hypotheses.iter().enumerate() {
                let mut fields = vec![
                    h.clone(),
                    num(report.prior[i]),
                    num(report.likelihoods[i]),
                    num(report.posterior.terms[i]),
                    num(report.posterior.posterior[i]),
                ];
                if let Some(p) = &report.perturbation {
                    fields.push(num(p.deltas[i]));
                    fields.push(num(p.after.posterior[i]));
                }
                csv.row(fields);
            }
            csv.into_bytes()
        }
    };
    Ok(Outcome::ok(vec![Artifact::new(
        format!("retrodict.{}", extension(config.format)),
        data,
    )]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub seed: u64,
    pub passed: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(check: &str, seed: u64, passed: bool, detail: String) -> Self {
        CheckRow {
            check: check.to_string(),
            seed,
            passed,
            detail,
        }
    }
}

/// Failure message naming every failing check and the seed to replay it.
pub fn summarize_checks(rows: &[CheckRow]) -> Option<String> {
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} failed at seed {} ({})", r.check, r.seed, r.detail))
        .collect();
    if failed.is_empty() {
        None
    } else {
        Some(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            rows.len(),
            failed.join("; ")
        ))
    }
}

fn within_sigma(observed: f64, expected: f64, sigma: f64, k: f64) -> bool {
    if sigma == 0.0 {
        observed == expected
    } else {
        (observed - expected).abs() <= k * sigma
    }
}

pub fn oracle_checks(config: &OracleCheckConfig) -> Result<Vec<CheckRow>> {
    if config.max_cells < 2 || config.max_cells > ENUMERATION_LIMIT {
        return Err(CliError::Invalid(format!(
            "max_cells must lie in [2, {ENUMERATION_LIMIT}], got {}",
            config.max_cells
        )));
    }
    if config.monte_carlo.trials == 0 || config.scenario_draws == 0 {
        return Err(CliError::Invalid(
            "trials and scenario_draws must be positive".into(),
        ));
    }
    let base = config.master_seed;
    let mut rows = Vec::new();

    for i in 0..config.two_time_fixtures {
        let seed = base.wrapping_add(i);
        let f = random_two_time_fixture(seed, config.max_cells)?;
        let problem = f.problem()?;
        let formula = two_time_distribution(&problem, &f.partition)?;
        let counted = enumerate_two_time(&problem, &f.partition)?;
        let detail = format!(
            "N={} formula={:?}",
            f.dynamics.cell_count(),
            formula.probabilities()
        );
        rows.push(CheckRow::new(
            "two_time_vs_enumeration",
            seed,
            formula == counted,
            detail,
        ));
    }

    for (i, spec) in config.fixtures.iter().enumerate() {
        let system = spec.system.build(base)?;
        let problem = TwoTimeProblem::new(
            spec.epsilon0.build(&system.partition)?,
            spec.epsilon_t.build(&system.partition)?,
            spec.t,
            spec.final_time,
            &system.dynamics,
        )?;
        let formula = two_time_distribution(&problem, &system.partition)?;
        let counted = enumerate_two_time(&problem, &system.partition)?;
        let detail = format!("fixture {i} formula={:?}", formula.probabilities());
        rows.push(CheckRow::new(
            "fixture_vs_enumeration",
            base,
            formula == counted,
            detail,
        ));
    }

    for i in 0..config.retrodiction_fixtures {
        let seed = base.wrapping_add(i);
        let f = random_retrodiction_fixture(seed, config.max_cells)?;
        let report = backward_posterior_dynamical(
            &f.partition,
            &f.dynamics,
            f.prior.clone(),
            &f.observed,
            f.lag,
        )?;
        let joint =
            enumerate_retrodiction(&f.partition, &f.dynamics, &f.prior, &f.observed, f.lag)?;
        let detail = format!("N={} lag={}", f.dynamics.cell_count(), f.lag);
        rows.push(CheckRow::new(
            "retrodiction_vs_joint_enumeration",
            seed,
            report.posterior == joint,
            detail,
        ));
    }

    let mc = &config.monte_carlo;
    let params = ScenarioParams::new(mc.s, mc.p)?;
    for (name, method) in [
        ("scenario_frequencies_rejection", SamplingMethod::Rejection),
        (
            "scenario_frequencies_renormalized",
            SamplingMethod::Renormalized,
        ),
    ] {
        let counts = scenario_counts(&params, config.scenario_draws, base, method);
        let n = counts.total() as f64;
        for scenario in Scenario::ALL {
            let expected = scenario.probability(params.p());
            let observed = counts.get(scenario) as f64 / n;
            let sigma = (expected * (1.0 - expected) / n).sqrt();
            rows.push(CheckRow::new(
                name,
                base,
                within_sigma(observed, expected, sigma, 3.0),
                format!(
                    "{} observed={observed} expected={expected} sigma={sigma}",
                    scenario.name()
                ),
            ));
        }
    }

    let result = monte_carlo_bounded(&params, mc.trials, base)?;
    let (rho1, rho2) = bounded_distribution(&params);
    for (i, expected) in [rho1, rho2].into_iter().enumerate() {
        let (estimate, se) = (result.estimate[i], result.standard_error[i]);
        rows.push(CheckRow::new(
            "monte_carlo_vs_closed_form",
            base,
            within_sigma(estimate, expected, se, 3.0),
            format!(
                "rho{} estimate={estimate} expected={expected} se={se}",
                i + 1
            ),
        ));
    }
    let sum = result.estimate.iter().sum::<f64>();
    rows.push(CheckRow::new(
        "monte_carlo_normalized",
        base,
        (sum - 1.0).abs() <= 1e-12,
        format!("sum={sum}"),
    ));
    Ok(rows)
}

pub fn cmd_oracle_check(config: &OracleCheckConfig) -> Result<Outcome> {
    let rows = oracle_checks(config)?;
    let data = match config.format {
        OutputFormat::Csv => {
            let mut csv = Csv::with_header(&["check", "seed", "passed", "detail"]);
            for r in &rows {
                csv.row([
                    r.check.clone(),
                    r.seed.to_string(),
                    r.passed.to_string(),
                    r.detail.replace(',', ";"),
                ]);
            }
            csv.into_bytes()
        }
        OutputFormat::Json => json_bytes(&rows),
    };

    let params = ScenarioParams::new(config.monte_carlo.s, config.monte_carlo.p)?;
    let result = monte_carlo_bounded(&params, config.monte_carlo.trials, config.master_seed)?;
    let mut counts = Csv::with_header(&["scenario", "count"]);
    for scenario in Scenario::ALL {
        counts.row([
            scenario.name().to_string(),
            result.counts.get(scenario).to_string(),
        ]);
    }
    let mut estimate = Csv::with_header(&["rho1", "rho2", "se1", "se2", "trials", "seed"]);
    estimate.row([
        num(result.estimate[0]),
        num(result.estimate[1]),
        num(result.standard_error[0]),
        num(result.standard_error[1]),
        result.trials.to_string(),
        result.seed.to_string(),
    ]);

    Ok(Outcome {
        artifacts: vec![
            Artifact::new(format!("oracle_check.{}", extension(config.format)), data),
            Artifact::new("scenario_counts.csv", counts.into_bytes()),
            Artifact::new("monte_carlo.csv", estimate.into_bytes()),
        ],
        failure: summarize_checks(&rows),
    })
}
