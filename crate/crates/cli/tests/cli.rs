mod common;

use std::fs;

use arrowlab_cli::commands::parse_entropy_csv;
use arrowlab_core::scenario::entropy_lower_bound;
use common::*;
use serde_json::Value;

fn read(path: &std::path::Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn entropy_scan_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scan.json",
        r#"{"schema_version":1,"p_values":[1],"s_grid":{"kind":"list","values":[0.5]}}"#,
    );
    let out = dir.path().join("out");
    let run = arrowlab(&[
        "entropy-scan",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert_eq!(
        read(&out.join("entropy_scan.csv")),
        "p,s,Z_b\n1,0.5,0.6931471805599453\n"
    );
}

#[test]
fn entropy_scan_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = arrowlab(&["entropy-scan", "--out", out.to_str().unwrap(), "--svg"]);
    assert!(run.status.success(), "{}", stderr(&run));
    let rows = parse_entropy_csv(&read(&out.join("entropy_scan.csv"))).unwrap();
    assert_eq!(rows.len(), 4 * 997);
    for row in &rows {
        assert!(row.z_b >= entropy_lower_bound(row.p).unwrap() - 1e-12);
        if row.p == 1.0 {
            let s = row.s;
            let mixing = -s * s.ln() - (1.0 - s) * (1.0 - s).ln();
            assert!((row.z_b - mixing).abs() <= 1e-12, "s={s}");
        }
    }
    let svg = read(&out.join("entropy_scan.svg"));
    assert_eq!(svg.matches("<polyline").count(), 4);
}

#[test]
fn svg_flag_is_entropy_scan_only() {
    let dir = tempfile::tempdir().unwrap();
    let run = arrowlab(&["two-time", "--svg", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("--svg"));
}

#[test]
fn two_time_fixture_and_vacuous_final_condition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixture");
    let run = arrowlab(&["two-time", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", stderr(&run));
    let csv = read(&out.join("two_time.csv"));
    let exact: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(exact, ["1/2", "1/2", "0"]);

    let config = write_config(
        dir.path(),
        "vacuous.json",
        r#"{"schema_version":1,"problem":{
            "system":{"cell_count":6,"partition":{"kind":"equal","blocks":3},
                      "dynamics":{"kind":"cyclic_shift","offset":1}},
            "epsilon0":{"kind":"block","label":"D1"},"epsilon_t":{"kind":"full"},
            "t":1,"final_time":2}}"#,
    );
    let out = dir.path().join("vacuous");
    let run = arrowlab(&[
        "two-time",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    for line in read(&out.join("two_time.csv")).lines().skip(1) {
        assert_eq!(line.split(',').nth(5), Some("0"), "{line}");
    }
}

#[test]
fn inconsistent_boundaries_fail_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{"schema_version":1,"problem":{
            "system":{"cell_count":6,"partition":{"kind":"equal","blocks":3},
                      "dynamics":{"kind":"identity"}},
            "epsilon0":{"kind":"block","label":"D1"},"epsilon_t":{"kind":"block","label":"D2"},
            "t":1,"final_time":2}}"#,
    );
    let run = arrowlab(&[
        "two-time",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("inconsistent boundary conditions"));
}

#[test]
fn random_permutations_mix() {
    let seeds: Vec<CampaignSeed> = (0..CAMPAIGN_SEEDS).map(campaign_seed).collect();
    let mean_gap = seeds.iter().map(|s| s.mean_gap).sum::<f64>() / seeds.len() as f64;
    let mixed = seeds.iter().filter(|s| s.max_defect < 0.02).count();
    let close = seeds.iter().filter(|s| s.mean_gap < 0.02).count();
    assert!(mean_gap < 0.02, "mean gap {mean_gap}");
    assert!(close >= 99, "{close} of 100 seeds with mean gap below 0.02");
    assert!(
        mixed >= 99,
        "{mixed} of 100 seeds below the defect threshold"
    );
}

#[test]
fn retrodict_examples() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bayes.json",
        r#"{"schema_version":1,"mode":{"kind":"abstract","prior":[0.5,0.5],"likelihoods":[0.8,0.4]},
            "deltas":[0,0]}"#,
    );
    let out = dir.path().join("bayes");
    let run = arrowlab(&[
        "retrodict",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let report: Value = serde_json::from_str(&read(&out.join("retrodict.json"))).unwrap();
    let posterior: Vec<f64> =
        serde_json::from_value(report["posterior"]["posterior"].clone()).unwrap();
    assert!((posterior[0] - 2.0 / 3.0).abs() < 1e-12 && (posterior[1] - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(
        report["perturbation"]["before"],
        report["perturbation"]["after"]
    );

    let out = dir.path().join("fire");
    let run = arrowlab(&["retrodict", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", stderr(&run));
    let report: Value = serde_json::from_str(&read(&out.join("retrodict.json"))).unwrap();
    let fire = &report["fire_alarm"];
    assert!((fire["p_fire_given_alarm"].as_f64().unwrap() - 0.01 / 0.109).abs() < 1e-12);
    assert_eq!(fire["p_fire_given_alarm_no_drill"].as_f64(), Some(1.0));
}

#[test]
fn impossible_observation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "zero.json",
        r#"{"schema_version":1,"mode":{"kind":"abstract","prior":[0.5,0.5],"likelihoods":[0,0]}}"#,
    );
    let run = arrowlab(&[
        "retrodict",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("observation impossible under hypotheses"));
}

#[test]
fn oracle_check_default_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let run = arrowlab(&["oracle-check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let csv = read(&dir.path().join("oracle_check.csv"));
    assert!(csv.starts_with("check,seed,passed,detail\n"));
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2) == Some("true")));
    assert_eq!(
        csv.lines()
            .filter(|l| l.starts_with("two_time_vs_enumeration,"))
            .count(),
        200
    );
}

#[test]
fn corrupted_permutation_rejected_at_parse_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "corrupt.json",
        r#"{"schema_version":1,"fixtures":[{
            "system":{"cell_count":4,"partition":{"kind":"equal","blocks":2},
                      "dynamics":{"kind":"explicit","map":[1,2,3,1]}},
            "epsilon0":{"kind":"full"},"epsilon_t":{"kind":"full"},"t":1,"final_time":2}]}"#,
    );
    let out = dir.path().join("out");
    let run = arrowlab(&[
        "oracle-check",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("not a bijection"), "{}", stderr(&run));
    assert!(!out.exists(), "nothing is written for a rejected config");
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "typo.json",
        r#"{"schema_version":1,"master_sed":3}"#,
    );
    let run = arrowlab(&["two-time", "--config", config.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("master_sed"), "{}", stderr(&run));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let run = arrowlab(&["two-time", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3), "{}", stderr(&run));
}

#[test]
fn bad_thread_count_is_invalid_input() {
    let run = arrowlab_with_env(&["two-time"], &[("ARROWLAB_THREADS", "zero")]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_thread_count_or_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "small.json",
        r#"{"schema_version":1,"two_time_fixtures":20,"retrodiction_fixtures":20,
            "scenario_draws":50000,"monte_carlo":{"s":0.25,"p":0.5,"trials":50000}}"#,
    );
    let mut files = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let run = arrowlab_with_env(
            &[
                "oracle-check",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "11",
            ],
            &[("ARROWLAB_THREADS", threads)],
        );
        assert!(run.status.success(), "{}", stderr(&run));
        files.push(
            ["oracle_check.csv", "monte_carlo.csv", "scenario_counts.csv"]
                .map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let run = arrowlab(&[
        "entropy-scan",
        "--out",
        first.to_str().unwrap(),
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let manifest_path = first.join("entropy_scan.manifest.json");
    let manifest: Value = serde_json::from_str(&read(&manifest_path)).unwrap();
    assert_eq!(manifest["command"], "entropy-scan");
    assert_eq!(manifest["generator"], arrowlab_core::rng::GENERATOR_ID);
    assert_eq!(manifest["config"]["master_seed"], 5);
    assert_eq!(manifest["outputs"][0]["file"], "entropy_scan.json");

    let second = dir.path().join("second");
    let run = arrowlab(&[
        "entropy-scan",
        "--config",
        manifest_path.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    assert_eq!(
        fs::read(first.join("entropy_scan.json")).unwrap(),
        fs::read(second.join("entropy_scan.json")).unwrap()
    );

    let rerun: Value =
        serde_json::from_str(&read(&second.join("entropy_scan.manifest.json"))).unwrap();
    assert_eq!(
        rerun["outputs"][0]["sha256"],
        manifest["outputs"][0]["sha256"]
    );

    let wrong = arrowlab(&["two-time", "--config", manifest_path.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}
