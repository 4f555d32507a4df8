//! Whole-graph accuracy experiment: one recommendation per target node.
//!
//! For every target the harness computes the utility vector, the exact exponential
//! mechanism accuracy, a Monte Carlo estimate of report-noisy-max accuracy, and the
//! accuracy ceiling. Per-target random streams are derived from the root seed and the
//! node id, so a report is bitwise identical for any worker count.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{alteration_budget, ceiling_for_vector};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mechanisms::{
    argmax_distribution, expected_accuracy, exponential_distribution, linear_smoothing, smoothing_param_for_epsilon,
    LaplaceGroups, Mechanism, MechanismParams,
};
use crate::rng::node_rng;
use crate::utility::{scale_to_unit_sensitivity, utility_vector, UtilityFunctionSpec};

pub const REPORT_HEADER: [&str; 9] =
    ["raw_id", "degree", "candidates", "k", "u_max", "acc_exp", "acc_lap", "acc_lap_se", "ceiling"];
pub const SMOOTHING_COLUMN: &str = "acc_smooth";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub utility: UtilityFunctionSpec,
    pub mechanisms: Vec<Mechanism>,
    pub laplace_trials: usize,
    pub seed: u64,
    pub c_grid: Vec<f64>,
    pub worker_count: usize,
}

impl ExperimentConfig {
    pub fn new(epsilon: f64, utility: UtilityFunctionSpec) -> Self {
        ExperimentConfig {
            epsilon,
            utility,
            mechanisms: vec![Mechanism::Exponential, Mechanism::Laplace],
            laplace_trials: 1000,
            seed: 0,
            c_grid: vec![1.0],
            worker_count: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.laplace_trials == 0 {
            return Err(Error::Config("laplace_trials must be at least 1".into()));
        }
        if self.worker_count == 0 {
            return Err(Error::Config("worker_count must be at least 1".into()));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|&c| !(c > 0.0 && c <= 1.0)) {
            return Err(Error::Config("c grid must be nonempty with values in (0, 1]".into()));
        }
        self.utility.validate()
    }

    fn runs(&self, m: Mechanism) -> bool {
        self.mechanisms.contains(&m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub node: NodeId,
    pub raw_id: i64,
    pub degree: usize,
    pub candidates: usize,
    /// High-utility count at the ceiling-achieving `c`.
    pub k: usize,
    /// Largest unscaled utility.
    pub u_max: f64,
    pub acc_exp: Option<f64>,
    pub acc_lap: Option<f64>,
    pub acc_lap_se: Option<f64>,
    pub acc_smooth: Option<f64>,
    pub ceiling: f64,
    pub t: u64,
    pub c_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeOutcome {
    Evaluated(ReportRow),
    /// The target has no candidate with positive utility.
    Skipped(NodeId),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub rows: Vec<ReportRow>,
    /// Raw ids of skipped targets, ascending.
    pub skipped: Vec<i64>,
    pub config: ExperimentConfig,
}

/// Evaluates one target. Targets with `u_max = 0` come back as [`NodeOutcome::Skipped`].
pub fn evaluate_node(g: &Graph, r: NodeId, cfg: &ExperimentConfig) -> Result<NodeOutcome> {
    let uv = utility_vector(g, r, &cfg.utility)?;
    if uv.is_degenerate() {
        return Ok(NodeOutcome::Skipped(r));
    }
    let scaled = scale_to_unit_sensitivity(&uv);
    let params = MechanismParams::new(cfg.epsilon, 1.0, cfg.seed)?;

    let acc_exp = if cfg.runs(Mechanism::Exponential) {
        Some(expected_accuracy(&exponential_distribution(&scaled, &params)?, &scaled)?)
    } else {
        None
    };

    let (acc_lap, acc_lap_se) = if cfg.runs(Mechanism::Laplace) {
        let groups = LaplaceGroups::new(&scaled, &params)?;
        let mut rng = node_rng(cfg.seed, r);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..cfg.laplace_trials {
            let acc = groups.draw_value(&mut rng) / scaled.u_max();
            sum += acc;
            sum_sq += acc * acc;
        }
        let trials = cfg.laplace_trials as f64;
        let mean = sum / trials;
        let variance = (sum_sq / trials - mean * mean).max(0.0);
        (Some(mean), Some((variance / trials).sqrt()))
    } else {
        (None, None)
    };

    let acc_smooth = if cfg.runs(Mechanism::Smoothing) {
        let x = smoothing_param_for_epsilon(cfg.epsilon, scaled.len())?;
        let dist = linear_smoothing(&argmax_distribution(&scaled)?, x)?;
        Some(expected_accuracy(&dist, &scaled)?)
    } else {
        None
    };

    let t = alteration_budget(g, r, &cfg.utility)?;
    let bound = ceiling_for_vector(&uv, t, cfg.epsilon, &cfg.c_grid)?;

    Ok(NodeOutcome::Evaluated(ReportRow {
        node: r,
        raw_id: g.raw_label(r),
        degree: g.degree(r),
        candidates: uv.len(),
        k: bound.k_used,
        u_max: uv.u_max(),
        acc_exp,
        acc_lap,
        acc_lap_se,
        acc_smooth,
        ceiling: bound.accuracy_ceiling,
        t,
        c_star: bound.c_used,
    }))
}

/// Evaluates every node of `g` on `cfg.worker_count` threads.
pub fn run_experiment(g: &Graph, cfg: &ExperimentConfig) -> Result<AccuracyReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let nodes: Vec<NodeId> = g.nodes().collect();
    let outcomes: Vec<NodeOutcome> =
        pool.install(|| nodes.par_iter().map(|&r| evaluate_node(g, r, cfg)).collect::<Result<_>>())?;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            NodeOutcome::Evaluated(row) => rows.push(row),
            NodeOutcome::Skipped(r) => skipped.push(g.raw_label(r)),
        }
    }
    Ok(AccuracyReport { rows, skipped, config: cfg.clone() })
}

/// A per-node column of the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Mechanism(Mechanism),
    Ceiling,
}

impl Series {
    pub fn name(self) -> &'static str {
        match self {
            Series::Mechanism(m) => m.short_name(),
            Series::Ceiling => "ceiling",
        }
    }
}

impl AccuracyReport {
    /// Values of `series` over evaluated nodes, in node order.
    pub fn series(&self, series: Series) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let v = match series {
                    Series::Mechanism(Mechanism::Exponential) => row.acc_exp,
                    Series::Mechanism(Mechanism::Laplace) => row.acc_lap,
                    Series::Mechanism(Mechanism::Smoothing) => row.acc_smooth,
                    Series::Ceiling => Some(row.ceiling),
                };
                v.ok_or_else(|| Error::Config(format!("series {} was not computed", series.name())))
            })
            .collect()
    }

    pub fn available_series(&self) -> Vec<Series> {
        let mut out: Vec<Series> = Mechanism::ALL
            .into_iter()
            .filter(|m| self.config.mechanisms.contains(m))
            .map(Series::Mechanism)
            .collect();
        out.push(Series::Ceiling);
        out
    }

    /// Evaluated plus skipped targets.
    pub fn total_nodes(&self) -> usize {
        self.rows.len() + self.skipped.len()
    }

    /// Rows ordered by decreasing ceiling, ties by raw id.
    pub fn ranked_by_ceiling(&self) -> Vec<&ReportRow> {
        let mut rows: Vec<&ReportRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.ceiling.total_cmp(&a.ceiling).then(a.raw_id.cmp(&b.raw_id)));
        rows
    }
}

/// Fraction of `values` strictly above `threshold`, over `denominator` nodes.
pub fn fraction_above(values: &[f64], threshold: f64, denominator: usize) -> f64 {
    if denominator == 0 {
        return 0.0;
    }
    values.iter().filter(|&&v| v > threshold).count() as f64 / denominator as f64
}

/// Thresholds `0.00, 0.01, ..., 1.00` with the fraction of evaluable nodes whose value is
/// at least the threshold.
pub fn accuracy_cdf(report: &AccuracyReport, series: Series) -> Result<Vec<(f64, f64)>> {
    if report.rows.is_empty() {
        return Err(Error::Domain("report has no evaluated nodes".into()));
    }
    let values = report.series(series)?;
    let n = values.len() as f64;
    Ok((0..=100)
        .map(|i| {
            let threshold = i as f64 / 100.0;
            // guard against 0.29 * 100 style rounding in the grid
            let count = values.iter().filter(|&&v| v >= threshold - 1e-12).count();
            (threshold, count as f64 / n)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeBucket {
    /// Inclusive lower degree (0 or a power of two).
    pub degree_lo: usize,
    /// Exclusive upper degree.
    pub degree_hi: usize,
    pub nodes: usize,
    pub mean_acc_exp: Option<f64>,
    pub mean_acc_lap: Option<f64>,
    pub mean_ceiling: f64,
}

fn bucket_of(degree: usize) -> (usize, usize) {
    if degree == 0 {
        (0, 1)
    } else {
        let lo = 1usize << (usize::BITS - 1 - degree.leading_zeros());
        (lo, lo * 2)
    }
}

/// Mean accuracy and ceiling per power-of-two degree bucket.
pub fn accuracy_vs_degree(report: &AccuracyReport) -> Result<Vec<DegreeBucket>> {
    if report.rows.is_empty() {
        return Err(Error::Domain("report has no evaluated nodes".into()));
    }
    let mut buckets: std::collections::BTreeMap<usize, (usize, Vec<&ReportRow>)> = Default::default();
    for row in &report.rows {
        let (lo, hi) = bucket_of(row.degree);
        buckets.entry(lo).or_insert_with(|| (hi, Vec::new())).1.push(row);
    }
    let mean = |xs: Vec<Option<f64>>| -> Option<f64> {
        let n = xs.len() as f64;
        xs.into_iter().sum::<Option<f64>>().map(|s| s / n)
    };
    Ok(buckets
        .into_iter()
        .map(|(lo, (hi, rows))| DegreeBucket {
            degree_lo: lo,
            degree_hi: hi,
            nodes: rows.len(),
            mean_acc_exp: mean(rows.iter().map(|r| r.acc_exp).collect()),
            mean_acc_lap: mean(rows.iter().map(|r| r.acc_lap).collect()),
            mean_ceiling: rows.iter().map(|r| r.ceiling).sum::<f64>() / rows.len() as f64,
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the per-node report. The `acc_smooth` column is appended only when the
/// smoothing mechanism ran.
pub fn write_report_csv<W: Write>(report: &AccuracyReport, w: W) -> Result<()> {
    let smoothing = report.config.mechanisms.contains(&Mechanism::Smoothing);
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    if smoothing {
        header.push(SMOOTHING_COLUMN);
    }
    out.write_record(&header).map_err(csv_err)?;
    for row in &report.rows {
        let mut record = vec![
            row.raw_id.to_string(),
            row.degree.to_string(),
            row.candidates.to_string(),
            row.k.to_string(),
            row.u_max.to_string(),
            opt(row.acc_exp),
            opt(row.acc_lap),
            opt(row.acc_lap_se),
            row.ceiling.to_string(),
        ];
        if smoothing {
            record.push(opt(row.acc_smooth));
        }
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(report: &AccuracyReport, w: W) -> Result<()> {
    let series = report.available_series();
    let tables = series.iter().map(|&s| accuracy_cdf(report, s)).collect::<Result<Vec<_>>>()?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["threshold".to_string()];
    header.extend(series.iter().map(|s| s.name().to_string()));
    out.write_record(&header).map_err(csv_err)?;
    for i in 0..=100 {
        let mut record = vec![format!("{:.2}", tables[0][i].0)];
        record.extend(tables.iter().map(|t| t[i].1.to_string()));
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_degree_csv<W: Write>(report: &AccuracyReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["degree_lo", "degree_hi", "nodes", "mean_acc_exp", "mean_acc_lap", "mean_ceiling"])
        .map_err(csv_err)?;
    for b in accuracy_vs_degree(report)? {
        out.write_record([
            b.degree_lo.to_string(),
            b.degree_hi.to_string(),
            b.nodes.to_string(),
            opt(b.mean_acc_exp),
            opt(b.mean_acc_lap),
            b.mean_ceiling.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Nodes in decreasing-ceiling order with their achieved accuracies.
pub fn write_ranked_csv<W: Write>(report: &AccuracyReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "raw_id", "ceiling", "acc_exp", "acc_lap"]).map_err(csv_err)?;
    for (rank, row) in report.ranked_by_ceiling().into_iter().enumerate() {
        out.write_record([
            (rank + 1).to_string(),
            row.raw_id.to_string(),
            row.ceiling.to_string(),
            opt(row.acc_exp),
            opt(row.acc_lap),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    nodes: usize,
    evaluated: usize,
    skipped: &'a [i64],
}

/// JSON provenance record: configuration plus evaluated/skipped counts.
pub fn write_config_json<W: Write>(report: &AccuracyReport, mut w: W) -> Result<()> {
    let sidecar = Sidecar {
        config: &report.config,
        nodes: report.total_nodes(),
        evaluated: report.rows.len(),
        skipped: &report.skipped,
    };
    serde_json::to_writer_pretty(&mut w, &sidecar).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// One row of a report CSV as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub raw_id: i64,
    pub degree: usize,
    pub candidates: usize,
    pub k: usize,
    pub u_max: f64,
    pub acc_exp: Option<f64>,
    pub acc_lap: Option<f64>,
    pub acc_lap_se: Option<f64>,
    pub ceiling: f64,
    pub acc_smooth: Option<f64>,
}

impl CsvRow {
    pub fn column(&self, name: &str) -> Result<Option<f64>> {
        Ok(match name {
            "acc_exp" => self.acc_exp,
            "acc_lap" => self.acc_lap,
            "acc_lap_se" => self.acc_lap_se,
            "acc_smooth" => self.acc_smooth,
            "ceiling" => Some(self.ceiling),
            "u_max" => Some(self.u_max),
            other => return Err(Error::Config(format!("unknown report column {other:?}"))),
        })
    }
}

/// Parses a report written by [`write_report_csv`].
pub fn read_report_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    let expected: Vec<&str> = REPORT_HEADER.to_vec();
    let got: Vec<&str> = header.iter().collect();
    if got.len() < expected.len() || got[..expected.len()] != expected[..] {
        return Err(Error::Parse { line: 1, message: format!("unexpected header {got:?}") });
    }
    let smooth_col = got.iter().position(|&h| h == SMOOTHING_COLUMN);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(csv_err)?;
        let field = |j: usize| record.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64> {
            field(j).parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {} is not a number: {:?}", got[j], field(j)),
            })
        };
        let maybe = |j: usize| -> Result<Option<f64>> { if field(j).is_empty() { Ok(None) } else { num(j).map(Some) } };
        let int = |j: usize| -> Result<i64> {
            field(j).parse::<i64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {} is not an integer: {:?}", got[j], field(j)),
            })
        };
        rows.push(CsvRow {
            raw_id: int(0)?,
            degree: int(1)? as usize,
            candidates: int(2)? as usize,
            k: int(3)? as usize,
            u_max: num(4)?,
            acc_exp: maybe(5)?,
            acc_lap: maybe(6)?,
            acc_lap_se: maybe(7)?,
            ceiling: num(8)?,
            acc_smooth: match smooth_col {
                Some(j) => maybe(j)?,
                None => None,
            },
        });
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), message: e.to_string() }
}
