mod common;

use sparseclust::bounds;
use sparseclust::harness::{
    binomial_lower_tail, run_trial, sweep, wilson_interval, ExperimentConfig, PGrid, CSV_HEADER,
};
use sparseclust::synth::ShapeKind;

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(48, ShapeKind::RandomUnbalanced, 4, 40);
    c.master_seed = 77;
    c.p_grid = PGrid::Absolute(vec![0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0]);
    c
}

#[test]
fn sweep_rows_match_single_trials() {
    let config = small_config();
    let result = sweep(&config).unwrap();
    for (k, row) in result.rows.iter().enumerate() {
        for t in [0usize, 7, 39] {
            let single = run_trial(&config, row.p, t as u64).unwrap();
            assert_eq!(single.fully_recovered, result.outcomes[k][t]);
        }
        let hits = result.outcomes[k].iter().filter(|&&r| r).count();
        assert_eq!(hits, row.recovered);
        assert!(row.ci_low <= row.rate && row.rate <= row.ci_high);
    }
    assert_eq!(result.rows.last().unwrap().recovered, 40);
}

#[test]
fn recovery_rate_increases_along_grid() {
    let result = sweep(&small_config()).unwrap();
    assert!(result.non_monotone_trials().is_empty());
    for w in result.rows.windows(2) {
        assert!(w[0].recovered <= w[1].recovered);
    }
}

#[test]
fn independent_masks_still_run() {
    let mut config = small_config();
    config.common_random_numbers = false;
    let result = sweep(&config).unwrap();
    assert_eq!(result.rows.len(), 7);
    assert_eq!(result.rows.last().unwrap().recovered, 40);
}

#[test]
fn csv_written_to_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config();
    config.output_path = Some(dir.path().join("sweep.csv"));
    let result = sweep(&config).unwrap();
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text, result.to_csv_string());
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn config_json_forms() {
    let json = r#"{"n_items": 64, "tree_shape": "balanced", "n_min": 8, "trials": 5,
        "alpha": 0.05, "kappa": 3, "master_seed": 1, "p_grid": {"relative_to_thm1": [0.5, 1.0]}}"#;
    let c = ExperimentConfig::from_json(json).unwrap();
    let base = bounds::theorem1_rate(64, 8, 0.05).unwrap().probability();
    assert_eq!(c.resolved_grid().unwrap(), vec![0.5 * base, base.min(1.0)]);
    assert!(c.common_random_numbers);

    let absolute = json.replace(r#"{"relative_to_thm1": [0.5, 1.0]}"#, "[0.9, 0.1, 0.9]");
    assert_eq!(ExperimentConfig::from_json(&absolute).unwrap().resolved_grid().unwrap(), vec![0.1, 0.9]);

    assert!(ExperimentConfig::from_json(&json.replace("\"trials\"", "\"trails\"")).is_err());
    assert!(ExperimentConfig::from_json(&json.replace("\"n_items\": 64", "\"n_items\": 60")).is_err());
    assert!(ExperimentConfig::from_json(&absolute.replace("0.1", "1.1")).is_err());
}

#[test]
fn interval_and_test_helpers() {
    assert_eq!(wilson_interval(1, 1), (0.0, 1.0));
    let (lo, hi) = wilson_interval(50, 100);
    assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    let p = binomial_lower_tail(190, 200, 0.95).unwrap();
    assert!(p > 0.01);
    assert!(binomial_lower_tail(170, 200, 0.95).unwrap() < 0.01);
}

#[test]
fn recovery_holds_at_combined_rate() {
    // The p = 1 clamp at small N makes the linear-size rate trivial, so also
    // check the sharper combined rate, which sits well below 1 here.
    let n_min = 16;
    let p = bounds::theorem1_rate(256, n_min, 0.05).unwrap().probability();
    assert!(p < 0.8);
    let mut config = ExperimentConfig::new(256, ShapeKind::Balanced, n_min, 100);
    config.master_seed = 2024;
    config.p_grid = PGrid::Absolute(vec![p]);
    let row = &sweep(&config).unwrap().rows[0];
    let p_value = binomial_lower_tail(row.recovered, row.trials, 0.95).unwrap();
    assert!(p_value >= 0.01, "recovered {}/{}", row.recovered, row.trials);
}
