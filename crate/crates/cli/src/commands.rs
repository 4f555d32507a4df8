use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use privrec_core::audit::{privacy_audit, AuditMechanism, MAX_LAPLACE_AUDIT_NODES};
use privrec_core::bounds::{alteration_budget, ceiling_for_vector};
use privrec_core::experiment::{
    read_report_csv, run_experiment, write_cdf_csv, write_config_json, write_degree_csv, write_ranked_csv,
    write_report_csv, AccuracyReport, CsvRow, ExperimentConfig,
};
use privrec_core::graph::{load_path, write_cache};
use privrec_core::mechanisms::{
    argmax_distribution, exponential_distribution, laplace_group_probabilities, laplace_recommend, linear_smoothing,
    smoothing_param_for_epsilon,
};
use privrec_core::rng::node_rng;
use privrec_core::utility::{scale_to_unit_sensitivity, utility_vector};
use privrec_core::{Graph, Mechanism, MechanismParams, RecommendationDistribution};

use crate::args::{
    AuditArgs, BoundsArgs, Command, CompareArgs, EvaluateArgs, IngestArgs, MechanismKind, RecommendArgs, StatsArgs,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

const EXPLAIN_ROWS: usize = 10;

#[derive(Debug)]
pub enum CliError {
    /// Flag values that parse but do not make sense together.
    Usage(String),
    /// Unreadable, malformed or unsuitable input.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<privrec_core::Error> for CliError {
    fn from(e: privrec_core::Error) -> Self {
        match e {
            privrec_core::Error::Config(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;
type ReportWriter = fn(&AccuracyReport, &mut BufWriter<File>) -> privrec_core::Result<()>;

fn with_path<T>(path: &Path, r: privrec_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        privrec_core::Error::Config(m) => CliError::Usage(m),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    with_path(path, load_path(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn json_line<W: Write, T: serde::Serialize + ?Sized>(out: &mut W, value: &T) -> CliResult {
    serde_json::to_writer(&mut *out, value).map_err(|e| CliError::Data(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn dispatch<W: Write>(command: Command, out: &mut W) -> CliResult {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Recommend(a) => recommend(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Bounds(a) => bounds(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Audit(a) => audit(a, out),
    }
}

fn ingest<W: Write>(a: IngestArgs, out: &mut W) -> CliResult {
    let input = &a.input.input;
    let g = load_graph(input)?;
    let output = a.output.unwrap_or_else(|| input.with_extension("prvg"));
    if output == *input {
        return Err(CliError::Usage(format!("refusing to overwrite the input {}", input.display())));
    }
    let mut w = create(&output)?;
    with_path(&output, write_cache(&g, &mut w))?;
    w.flush()?;
    json_line(out, &serde_json::json!({ "output": output, "nodes": g.n(), "edges": g.m() }))
}

fn stats<W: Write>(a: StatsArgs, out: &mut W) -> CliResult {
    let g = load_graph(&a.input.input)?;
    json_line(out, &g.stats())
}

fn recommend<W: Write>(a: RecommendArgs, out: &mut W) -> CliResult {
    let g = load_graph(&a.input.input)?;
    let r = g.node_for_label(a.target)?;
    let spec = a.utility.spec();
    spec.validate()?;
    let uv = utility_vector(&g, r, &spec)?;
    if uv.is_empty() {
        return Err(CliError::Data(format!("node {} is adjacent to every other node; nothing to recommend", a.target)));
    }
    let scaled = scale_to_unit_sensitivity(&uv);
    let params = MechanismParams::new(a.epsilon, 1.0, a.seed.seed)?;
    let mut rng = node_rng(a.seed.seed, r);

    let (pick, dist) = match a.mechanism {
        MechanismKind::Lap => {
            let pick = laplace_recommend(&scaled, &params, &mut rng)?;
            let dist = if a.explain { Some(laplace_distribution(&scaled, &params)?) } else { None };
            (pick, dist)
        }
        MechanismKind::Exp | MechanismKind::Smooth => {
            let dist = if a.mechanism == MechanismKind::Exp {
                exponential_distribution(&scaled, &params)?
            } else {
                let x = smoothing_param_for_epsilon(a.epsilon, scaled.len())?;
                linear_smoothing(&argmax_distribution(&scaled)?, x)?
            };
            (dist.sampler().draw(&mut rng), Some(dist))
        }
    };
    writeln!(out, "{}", g.raw_label(pick))?;
    if a.explain {
        let dist = dist.expect("distribution computed for --explain");
        writeln!(out, "raw_id,utility,probability")?;
        for (node, p) in dist.top(EXPLAIN_ROWS) {
            let u = uv.values()[uv.position(node).expect("candidate of the utility vector")];
            writeln!(out, "{},{},{}", g.raw_label(node), u, p)?;
        }
    }
    Ok(())
}

/// Exact report-noisy-max probabilities, shared evenly within equal-utility groups.
fn laplace_distribution(
    uv: &privrec_core::UtilityVector,
    params: &MechanismParams,
) -> Result<RecommendationDistribution, CliError> {
    let groups = laplace_group_probabilities(uv, params)?;
    let by_value: Vec<(f64, f64)> = groups.iter().map(|&(u, size, p)| (u, p / size as f64)).collect();
    let weights = uv
        .values()
        .iter()
        .map(|v| by_value.iter().find(|(u, _)| u == v).map_or(0.0, |&(_, p)| p))
        .collect();
    Ok(RecommendationDistribution::from_weights(uv.candidates().to_vec(), weights)?)
}

fn evaluate<W: Write>(a: EvaluateArgs, out: &mut W) -> CliResult {
    let g = load_graph(&a.input.input)?;
    let mut mechanisms: Vec<Mechanism> = Vec::new();
    for m in a.mechanism {
        let m = Mechanism::from(m);
        if !mechanisms.contains(&m) {
            mechanisms.push(m);
        }
    }
    let cfg = ExperimentConfig {
        epsilon: a.epsilon,
        utility: a.utility.spec(),
        mechanisms,
        laplace_trials: a.trials,
        seed: a.seed.seed,
        c_grid: a.c_grid.c_grid,
        worker_count: a.workers,
    };
    cfg.validate()?;
    let report = run_experiment(&g, &cfg)?;

    let dir = &a.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let outputs: [(&str, ReportWriter); 5] = [
        ("report.csv", |r, w| write_report_csv(r, w)),
        ("cdf.csv", |r, w| write_cdf_csv(r, w)),
        ("by_degree.csv", |r, w| write_degree_csv(r, w)),
        ("ranked.csv", |r, w| write_ranked_csv(r, w)),
        ("config.json", |r, w| write_config_json(r, w)),
    ];
    for (name, write) in outputs {
        let path = dir.join(name);
        let mut w = create(&path)?;
        with_path(&path, write(&report, &mut w))?;
        w.flush()?;
    }
    json_line(
        out,
        &serde_json::json!({
            "output_dir": dir,
            "nodes": report.total_nodes(),
            "evaluated": report.rows.len(),
            "skipped": report.skipped.len(),
        }),
    )
}

fn bounds<W: Write>(a: BoundsArgs, out: &mut W) -> CliResult {
    let g = load_graph(&a.input.input)?;
    let spec = a.utility.spec();
    spec.validate()?;
    writeln!(out, "raw_id,degree,k,t,c_star,ceiling")?;
    for r in g.nodes() {
        let uv = utility_vector(&g, r, &spec)?;
        if uv.is_degenerate() {
            continue;
        }
        let t = alteration_budget(&g, r, &spec)?;
        let b = ceiling_for_vector(&uv, t, a.epsilon, &a.c_grid.c_grid)?;
        writeln!(out, "{},{},{},{},{},{}", g.raw_label(r), g.degree(r), b.k_used, t, b.c_used, b.accuracy_ceiling)?;
    }
    Ok(())
}

fn read_column(path: &Path, column: &str) -> Result<BTreeMap<i64, f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let rows: Vec<CsvRow> = with_path(path, read_report_csv(io::BufReader::new(file)))?;
    let mut values = BTreeMap::new();
    for row in rows {
        if let Some(v) = row.column(column)? {
            values.insert(row.raw_id, v);
        }
    }
    if values.is_empty() {
        return Err(CliError::Data(format!("{}: column {column} is absent or empty", path.display())));
    }
    Ok(values)
}

fn compare<W: Write>(a: CompareArgs, out: &mut W) -> CliResult {
    let left = read_column(&a.left, &a.left_column)?;
    let right = read_column(&a.right, &a.right_column)?;
    let pairs: Vec<(f64, f64)> = left.iter().filter_map(|(id, &l)| right.get(id).map(|&r| (l, r))).collect();
    if pairs.is_empty() {
        return Err(CliError::Data("the two reports share no raw_id".into()));
    }
    let n = pairs.len() as f64;
    let mean_left = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_right = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut deltas: Vec<f64> = pairs.iter().map(|&(l, r)| r - l).collect();
    deltas.sort_by(f64::total_cmp);
    let median_delta = if deltas.len() % 2 == 1 {
        deltas[deltas.len() / 2]
    } else {
        0.5 * (deltas[deltas.len() / 2 - 1] + deltas[deltas.len() / 2])
    };
    let max_abs_delta = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    json_line(
        out,
        &serde_json::json!({
            "left": a.left,
            "right": a.right,
            "left_column": a.left_column,
            "right_column": a.right_column,
            "joined": pairs.len(),
            "left_only": left.len() - pairs.len(),
            "right_only": right.len() - pairs.len(),
            "mean_left": mean_left,
            "mean_right": mean_right,
            "mean_delta": mean_right - mean_left,
            "median_delta": median_delta,
            "max_abs_delta": max_abs_delta,
            "right_higher": deltas.iter().filter(|&&d| d > 0.0).count(),
            "left_higher": deltas.iter().filter(|&&d| d < 0.0).count(),
        }),
    )
}

fn audit<W: Write>(a: AuditArgs, out: &mut W) -> CliResult {
    let (mechanism, epsilon) = match a.mechanism {
        MechanismKind::Smooth => {
            let x = a.weight.ok_or_else(|| CliError::Usage("--mechanism smooth requires --weight".into()))?;
            (AuditMechanism::Smoothing { x }, a.epsilon.unwrap_or(0.0))
        }
        other => {
            if a.weight.is_some() {
                return Err(CliError::Usage("--weight applies only to --mechanism smooth".into()));
            }
            let epsilon = a.epsilon.ok_or_else(|| CliError::Usage("--epsilon is required".into()))?;
            if other == MechanismKind::Lap && a.max_nodes > MAX_LAPLACE_AUDIT_NODES {
                return Err(CliError::Usage(format!(
                    "--mechanism lap supports --max-nodes up to {MAX_LAPLACE_AUDIT_NODES}"
                )));
            }
            let m = if other == MechanismKind::Exp { AuditMechanism::Exponential } else { AuditMechanism::Laplace };
            (m, epsilon)
        }
    };
    let report = privacy_audit(mechanism, epsilon, a.max_nodes)?;
    json_line(out, &report)
}
