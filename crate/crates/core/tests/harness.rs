mod common;

use std::collections::BTreeMap;

use privrec_core::experiment::{
    accuracy_cdf, accuracy_vs_degree, read_report_csv, run_experiment, write_cdf_csv, write_config_json,
    write_degree_csv, write_report_csv, ExperimentConfig, Series,
};
use privrec_core::utility::utility_vector;
use privrec_core::{Graph, Mechanism, UtilityFunctionSpec};

fn config(eps: f64) -> ExperimentConfig {
    ExperimentConfig { laplace_trials: 300, seed: 42, ..ExperimentConfig::new(eps, UtilityFunctionSpec::CommonNeighbors) }
}

fn csv_bytes(report: &privrec_core::experiment::AccuracyReport) -> Vec<u8> {
    let mut buf = Vec::new();
    write_report_csv(report, &mut buf).unwrap();
    buf
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let g = common::stand_in_graph(400, 6, 9);
    let one = run_experiment(&g, &ExperimentConfig { worker_count: 1, ..config(0.3) }).unwrap();
    let four = run_experiment(&g, &ExperimentConfig { worker_count: 4, ..config(0.3) }).unwrap();
    let again = run_experiment(&g, &ExperimentConfig { worker_count: 4, ..config(0.3) }).unwrap();
    assert_eq!(csv_bytes(&one), csv_bytes(&four));
    assert_eq!(csv_bytes(&four), csv_bytes(&again));
    let other_seed = run_experiment(&g, &ExperimentConfig { seed: 43, ..config(0.3) }).unwrap();
    assert_ne!(csv_bytes(&one), csv_bytes(&other_seed));
}

#[test]
fn skipped_set_is_exactly_zero_utility_targets() {
    let g = common::random_graph(60, 0.04, 3);
    let report = run_experiment(&g, &config(0.5)).unwrap();
    let expected: Vec<i64> = g
        .nodes()
        .filter(|&r| utility_vector(&g, r, &UtilityFunctionSpec::CommonNeighbors).unwrap().is_degenerate())
        .map(|r| g.raw_label(r))
        .collect();
    assert!(!expected.is_empty());
    assert_eq!(report.skipped, expected);
    assert_eq!(report.rows.len() + report.skipped.len(), g.n());
}

#[test]
fn row_invariants() {
    let g = common::stand_in_graph(300, 5, 4);
    let cfg = ExperimentConfig { mechanisms: Mechanism::ALL.to_vec(), ..config(0.5) };
    let high = run_experiment(&g, &cfg).unwrap();
    let low = run_experiment(&g, &ExperimentConfig { epsilon: 0.1, ..cfg.clone() }).unwrap();
    let se_cap = 1.0 / (2.0 * (cfg.laplace_trials as f64).sqrt());
    for (h, l) in high.rows.iter().zip(&low.rows) {
        assert_eq!(h.raw_id, l.raw_id);
        for acc in [h.acc_exp, h.acc_lap, h.acc_smooth].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&acc));
        }
        assert!(h.acc_lap_se.unwrap() <= se_cap);
        assert!(h.acc_exp.unwrap() >= l.acc_exp.unwrap());
        assert!(h.acc_exp.unwrap() <= h.ceiling + 1e-9);
        assert!(h.acc_smooth.unwrap() <= h.ceiling + 1e-9);
        assert_eq!(h.candidates + h.degree + 1, g.n());
    }
}

#[test]
fn aggregates_agree_with_the_written_csv() {
    let g = common::stand_in_graph(500, 8, 5);
    let report = run_experiment(&g, &config(0.5)).unwrap();
    let rows = read_report_csv(csv_bytes(&report).as_slice()).unwrap();

    let mut sums: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for row in &rows {
        let mut lo = 1;
        while lo * 2 <= row.degree {
            lo *= 2;
        }
        let e = sums.entry(lo).or_default();
        e.0 += 1;
        e.1 += row.acc_exp.unwrap();
        e.2 += row.ceiling;
    }
    let buckets = accuracy_vs_degree(&report).unwrap();
    assert_eq!(buckets.len(), sums.len());
    for b in &buckets {
        let (count, acc, ceil) = sums[&b.degree_lo];
        assert_eq!(b.nodes, count);
        assert!((b.mean_acc_exp.unwrap() - acc / count as f64).abs() < 1e-12);
        assert!((b.mean_ceiling - ceil / count as f64).abs() < 1e-12);
    }

    let cdf = accuracy_cdf(&report, Series::Ceiling).unwrap();
    for &(threshold, fraction) in &cdf {
        let direct = rows.iter().filter(|r| r.ceiling >= threshold - 1e-12).count() as f64 / rows.len() as f64;
        assert_eq!(fraction, direct);
    }
    assert_eq!(cdf[0].1, 1.0);
}

#[test]
fn single_degree_graph_has_one_bucket() {
    // C8: every node has degree 2
    let g = Graph::from_edges(8, (0..8).map(|i| (i, (i + 1) % 8))).unwrap();
    let report = run_experiment(&g, &config(0.5)).unwrap();
    assert_eq!(accuracy_vs_degree(&report).unwrap().len(), 1);
}

#[test]
fn aggregate_files_have_headers() {
    let g = common::stand_in_graph(120, 4, 6);
    let report = run_experiment(&g, &config(0.5)).unwrap();
    let mut cdf = Vec::new();
    write_cdf_csv(&report, &mut cdf).unwrap();
    let cdf = String::from_utf8(cdf).unwrap();
    assert!(cdf.starts_with("threshold,exp,lap,ceiling\n0.00,1,1,1\n"), "{}", &cdf[..60]);
    assert_eq!(cdf.lines().count(), 102);
    let mut deg = Vec::new();
    write_degree_csv(&report, &mut deg).unwrap();
    assert!(String::from_utf8(deg).unwrap().starts_with("degree_lo,degree_hi,nodes,mean_acc_exp,mean_acc_lap,mean_ceiling\n"));
    let mut json = Vec::new();
    write_config_json(&report, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["config"]["epsilon"], 0.5);
    assert_eq!(v["nodes"], 120);
}
