use std::fs;
use std::io::BufReader;

use lagdmc_core::estimators::read_records_csv;
use lagdmc_core::experiments::{run_experiment, write_outputs, ExperimentConfig, RuntimeInfo};
use lagdmc_core::LaggedAccumulator;

const FINITE: &str = r#"{
  "model": {"kind": "finite", "M": [[0.7, 0.3], [0.4, 0.6]], "G": [1.0, 0.5], "eta0": [0.5, 0.5]},
  "N": 4, "n": 300, "lags": [3, 0], "R": 3, "master_seed": 99,
  "test_functions": [{"kind": "indicator", "states": [0]}, {"kind": "G"}],
  "dump_records": true, "burn_in": 7
}"#;

fn run(config: &ExperimentConfig, dir: &std::path::Path) -> lagdmc_core::experiments::OutputFiles {
    let outcome = run_experiment(config, Some(1)).unwrap();
    let runtime = RuntimeInfo {
        wall_seconds: outcome.wall_seconds,
        workers: 1,
        output_dir: dir.to_path_buf(),
        replication_seconds: vec![],
    };
    write_outputs(dir, config, &outcome, &runtime).unwrap()
}

#[test]
fn dumped_records_reproduce_estimates() {
    let config = ExperimentConfig::from_json(FINITE).unwrap();
    let outcome = run_experiment(&config, Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let runtime = RuntimeInfo {
        wall_seconds: 0.0,
        workers: 1,
        output_dir: dir.path().to_path_buf(),
        replication_seconds: vec![],
    };
    let files = write_outputs(dir.path(), &config, &outcome, &runtime).unwrap();
    assert_eq!(files.record_dumps.len(), 3);
    for (report, path) in outcome.reports.iter().zip(&files.record_dumps) {
        let records = read_records_csv(BufReader::new(fs::File::open(path).unwrap())).unwrap();
        // burn-in dropped, n + max lag kept
        assert_eq!(records.len(), 303);
        assert_eq!(records[0].step, 7);
        let mut acc = LaggedAccumulator::new(&[0, 3], 2, Some(300)).unwrap();
        acc.record_all(&records).unwrap();
        let again = acc.finalize().unwrap();
        assert_eq!(again.ratios, report.estimates);
        assert_eq!(report.g_index, 1);
    }
}

#[test]
fn output_files_have_expected_shape() {
    let config = ExperimentConfig::from_json(FINITE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = run(&config, dir.path());

    let bias = fs::read_to_string(&files.bias_csv).unwrap();
    let lags: Vec<&str> = bias.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(lags, ["0", "3"]);
    for line in bias.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[5], "3");
        // 17 significant digits
        assert_eq!(fields[1].split('e').next().unwrap().len(), 18);
    }

    let variance = fs::read_to_string(&files.variance_csv).unwrap();
    // no independent copy requested
    assert!(variance.lines().skip(1).all(|l| l.split(',').nth(2) == Some("")));

    let estimates = fs::read_to_string(&files.estimates_csv).unwrap();
    assert_eq!(estimates.lines().count(), 1 + 2 * 2);
    let lambda_row = estimates.lines().find(|l| l.starts_with("0,1,")).unwrap();
    let reference: f64 = lambda_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((reference - 0.816227766016838).abs() < 1e-12);

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.meta_json).unwrap()).unwrap();
    assert_eq!(meta["records_per_trajectory"], 310);
    assert_eq!(meta["seeds"]["streams"].as_array().unwrap().len(), 3);
    assert_eq!(meta["config"]["master_seed"], 99);
    assert!(meta["config"].get("output_dir").is_none_or(|v| v.is_null()));
}

#[test]
fn fit_json_explains_missing_fit() {
    let config = ExperimentConfig::from_json(FINITE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = run(&config, dir.path());
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(files.fit_json).unwrap()).unwrap();
    if fit["slope"].is_null() {
        assert!(fit["note"].as_str().unwrap().contains("fit"));
    } else {
        assert!(fit["slope"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn oscillator_sweep_fits_decaying_bias() {
    let config = ExperimentConfig::from_json(
        r#"{"model": {"kind": "harmonic_oscillator"}, "N": 10, "n": 20000,
            "lags": [0, 5, 10, 15, 20], "R": 16, "master_seed": 5, "variance_compare": true}"#,
    )
    .unwrap();
    let outcome = run_experiment(&config, None).unwrap();
    let agg = &outcome.aggregate;
    let b0 = agg.row(0).unwrap().abs_bias.unwrap();
    let b20 = agg.row(20).unwrap().abs_bias.unwrap();
    assert!(b0 > 5.0 * b20, "{b0} vs {b20}");
    let fit = agg.fit.as_ref().unwrap();
    assert!(fit.slope < 0.0);
    for row in agg.rows.iter().filter(|r| r.lag > 0) {
        assert!(row.var_independent.unwrap() > row.var_joint);
    }
}

#[test]
fn validation_names_the_field() {
    let bad = FINITE.replace("\"N\": 4", "\"N\": 0");
    let err = ExperimentConfig::from_json(&bad)
        .and_then(|c| c.validate().map(|_| c))
        .unwrap_err();
    assert!(err.to_string().contains("walkers"), "{err}");
    let no_g = FINITE.replace(", {\"kind\": \"G\"}", "");
    let err = ExperimentConfig::from_json(&no_g)
        .and_then(|c| c.validate().map(|_| c))
        .unwrap_err();
    assert!(err.to_string().contains("test_functions"), "{err}");
}
