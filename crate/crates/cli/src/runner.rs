//! Runs one experiment and renders its CSV and JSON outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ergopart::amenable::{metric_covering_on_points, temperedness_profile, DEFAULT_CANDIDATES};
use ergopart::complexity::{self, covering_number, ComplexityProfile, NameTable, Verdict};
use ergopart::pattern_entropy::{self, max_pattern_profile, orbit_join_entropy};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Quantity};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum LogBase {
    #[default]
    Nat,
    Bit,
}

impl LogBase {
    /// Converts a value in nats.
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            LogBase::Nat => nats,
            LogBase::Bit => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Nat => "nat",
            LogBase::Bit => "bit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Overrides the config seed.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub log_base: LogBase,
    /// Record per-row wall time; otherwise the column is 0 so outputs stay byte-identical.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions { seed: None, out_dir: PathBuf::from("out"), log_base: LogBase::Nat, timing: false }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub name: String,
    pub quantity: Quantity,
    pub verdict: String,
    pub header: Vec<&'static str>,
    pub records: Vec<Vec<String>>,
    /// `(n, headline value)` per row, used by compare.
    pub series: Vec<(usize, f64)>,
    pub metadata: Value,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        render_csv(&self.header, &self.records)
    }
}

pub fn render_csv(header: &[&str], records: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

struct Clock {
    on: bool,
    start: Instant,
}

impl Clock {
    fn start(on: bool) -> Clock {
        Clock { on, start: Instant::now() }
    }

    fn ms(&self) -> String {
        if self.on {
            format!("{:.3}", self.start.elapsed().as_secs_f64() * 1e3)
        } else {
            "0".into()
        }
    }
}

fn thresholds() -> Value {
    json!({
        "plateau_rule": complexity::PLATEAU_RULE,
        "growing_rule": complexity::GROWING_RULE,
        "mass_tolerance": ergopart::partition::MASS_TOL,
        "refinement_tolerance": ergopart::partition::REFINEMENT_TOL,
        "exact_solver_max_cells": complexity::EXACT_MAX_CELLS,
        "zero_trend_factor": pattern_entropy::ZERO_TREND_FACTOR,
        "positive_trend_spread": pattern_entropy::STABLE_SPREAD,
        "exhaustive_budget": pattern_entropy::EXHAUSTIVE_BUDGET,
        "metric_candidate_pool": DEFAULT_CANDIDATES,
        "ball": "open: normalized Hamming or mean distance strictly below epsilon",
    })
}

fn cover_row(e: &complexity::CoverEntry, ms: String) -> Vec<String> {
    vec![e.n.to_string(), e.cover_size.to_string(), e.solver.as_str().into(), e.covered_mass.to_string(), ms]
}

/// Computes an experiment without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let seq = cfg.sequence()?;
    let mut records = Vec::new();
    let mut series = Vec::new();
    let (header, verdict, result): (Vec<&'static str>, String, Value) = match cfg.quantity {
        Quantity::EntropyProfile => {
            let sys = cfg.build_system()?;
            let alpha = cfg.build_partition(&sys)?;
            let mut rows = Vec::new();
            for w in &seq.windows {
                let clock = Clock::start(opts.timing);
                let h = orbit_join_entropy(&alpha, &sys, w)?;
                let shown = opts.log_base.scale(h);
                let per = shown / w.len() as f64;
                records.push(vec![w.len().to_string(), shown.to_string(), per.to_string(), clock.ms()]);
                series.push((w.len(), shown));
                rows.push(json!({"n": w.len(), "entropy": shown, "entropy_rate": per}));
            }
            (vec!["n", "entropy", "entropy_rate", "wall_time_ms"], "none".into(), Value::Array(rows))
        }
        Quantity::ComplexityProfile => {
            let sys = cfg.build_system()?;
            let alpha = cfg.build_partition(&sys)?;
            let eps = cfg.epsilon.expect("validated");
            let mut entries = Vec::new();
            for w in &seq.windows {
                let clock = Clock::start(opts.timing);
                let family = sys.orbit_partitions(&alpha, w)?;
                let table = NameTable::build(&family, cfg.table_mode(seed))?;
                let e = covering_number(&table, eps, cfg.cover_solver())?;
                records.push(cover_row(&e, clock.ms()));
                series.push((e.n, e.cover_size as f64));
                entries.push(e);
            }
            let profile = ComplexityProfile::from_entries(eps, entries);
            let v = profile.verdict.as_str().to_string();
            (
                vec!["n", "cover_size", "solver", "covered_mass", "wall_time_ms"],
                v,
                serde_json::to_value(&profile).expect("serializable"),
            )
        }
        Quantity::PatternEntropy => {
            let sys = cfg.build_system()?;
            let alpha = cfg.build_partition(&sys)?;
            let elements = seq.windows.last().expect("nonempty sequence");
            let family = sys.orbit_partitions(&alpha, elements)?;
            let strategy = cfg.strategy();
            let n_values = cfg.n_values.clone().expect("validated");
            let mut p_star = Vec::new();
            let mut rows = Vec::new();
            for &n in &n_values {
                let clock = Clock::start(opts.timing);
                let entry = max_pattern_profile(&family, n, strategy)?;
                let shown = opts.log_base.scale(entry.p_star);
                records.push(vec![
                    n.to_string(),
                    shown.to_string(),
                    (shown / n as f64).to_string(),
                    strategy.label(),
                    entry.bound_kind.as_str().into(),
                    clock.ms(),
                ]);
                series.push((n, shown));
                rows.push(serde_json::to_value(&entry).expect("serializable"));
                p_star.push(entry.p_star);
            }
            let rates: Vec<f64> = n_values.iter().zip(&p_star).map(|(n, p)| p / *n as f64).collect();
            let (_, verdict) = pattern_entropy::trend_verdict(&rates, alpha.len());
            (
                vec!["n", "p_star", "rate", "strategy", "bound_kind", "wall_time_ms"],
                verdict.as_str().into(),
                json!({"entries": rows, "elements": elements.len()}),
            )
        }
        Quantity::MetricProfile | Quantity::Crosscheck => {
            let sys = cfg.build_system()?;
            let eps = cfg.epsilon.expect("validated");
            let metric = cfg.metric(&sys);
            let points = sys.space().sample_points(cfg.metric_samples(), seed)?;
            let crosscheck = cfg.quantity == Quantity::Crosscheck;
            let alpha = if crosscheck { Some(cfg.build_partition(&sys)?) } else { None };
            let mut partition_entries = Vec::new();
            let mut partition_records = Vec::new();
            if let Some(alpha) = &alpha {
                for w in &seq.windows {
                    let clock = Clock::start(opts.timing);
                    let family = sys.orbit_partitions(alpha, w)?;
                    let table = NameTable::build(&family, cfg.table_mode(seed))?;
                    let e = covering_number(&table, eps, cfg.cover_solver())?;
                    let mut row = cover_row(&e, clock.ms());
                    row.insert(0, "partition".into());
                    partition_records.push(row);
                    partition_entries.push(e);
                }
            }
            let mut metric_entries = Vec::new();
            for w in &seq.windows {
                let clock = Clock::start(opts.timing);
                let e = metric_covering_on_points(&sys, metric, w, eps, &points, DEFAULT_CANDIDATES)?;
                let mut row = vec![
                    e.n.to_string(),
                    e.cover_size.to_string(),
                    "greedy_sampled".into(),
                    e.covered_mass.to_string(),
                    clock.ms(),
                ];
                if crosscheck {
                    row.insert(0, "metric".into());
                } else {
                    series.push((e.n, e.cover_size as f64));
                }
                records.push(row);
                metric_entries.push(e);
            }
            let metric_sizes: Vec<usize> = metric_entries.iter().map(|e| e.cover_size).collect();
            let metric_verdict = Verdict::of_sizes(&metric_sizes);
            let metric_json = json!({
                "entries": metric_entries,
                "verdict": metric_verdict.as_str(),
                "samples": points.len(),
                "upper_bound": true,
            });
            if crosscheck {
                let partition = ComplexityProfile::from_entries(eps, partition_entries);
                for (n, c) in partition.entries.iter().map(|e| (e.n, e.cover_size)) {
                    series.push((n, c as f64));
                }
                partition_records.append(&mut records);
                records = partition_records;
                let agree = partition.verdict == metric_verdict && partition.verdict != Verdict::Inconclusive;
                let verdict = if agree { "agree" } else { "disagree" };
                (
                    vec!["profile", "n", "cover_size", "solver", "covered_mass", "wall_time_ms"],
                    format!("{verdict} (partition {}, metric {})", partition.verdict.as_str(), metric_verdict.as_str()),
                    json!({
                        "partition": partition,
                        "metric": metric_json,
                        "agree": agree,
                    }),
                )
            } else {
                (
                    vec!["n", "cover_size", "solver", "covered_mass", "wall_time_ms"],
                    metric_verdict.as_str().into(),
                    metric_json,
                )
            }
        }
        Quantity::TemperedCheck => {
            let n_max = cfg.n_max.expect("validated");
            let report = temperedness_profile(&seq, n_max)?;
            for (n, c) in &report.c_values {
                records.push(vec![n.to_string(), c.numer().to_string(), c.denom().to_string(), c.to_f64().to_string()]);
                series.push((*n, c.to_f64()));
            }
            let verdict = match &report.c_max {
                Some(c) => format!("c_max {c} up to n = {}", report.n_checked),
                None => "no n ≥ 2 checked".into(),
            };
            (
                vec!["n", "c_numerator", "c_denominator", "c_value"],
                verdict,
                serde_json::to_value(&report).expect("serializable"),
            )
        }
    };
    let metadata = json!({
        "name": cfg.name,
        "quantity": cfg.quantity.as_str(),
        "schema_version": cfg.schema_version,
        "seed": seed,
        "epsilon": cfg.epsilon,
        "log_base": opts.log_base.as_str(),
        "config": serde_json::to_value(cfg).expect("serializable"),
        "thresholds": thresholds(),
        "verdict": verdict,
        "columns": header,
        "result": result,
    });
    Ok(RunOutput { name: cfg.name.clone(), quantity: cfg.quantity, verdict, header, records, series, metadata })
}

/// Output file paths for a config under `out_dir`.
pub fn output_paths(cfg: &ExperimentConfig, out_dir: &Path) -> (PathBuf, PathBuf) {
    let csv = cfg.output.csv.clone().unwrap_or_else(|| format!("{}.csv", cfg.name));
    let json = cfg.output.json.clone().unwrap_or_else(|| format!("{}.json", cfg.name));
    (out_dir.join(csv), out_dir.join(json))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Executes and writes the CSV and JSON files; returns their paths.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(RunOutput, PathBuf, PathBuf), CliError> {
    let out = execute(cfg, opts)?;
    let (csv_path, json_path) = output_paths(cfg, &opts.out_dir);
    write_file(&csv_path, &out.csv())?;
    let mut json = serde_json::to_string_pretty(&out.metadata).expect("serializable");
    json.push('\n');
    write_file(&json_path, &json)?;
    Ok((out, csv_path, json_path))
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub left: RunOutput,
    pub right: RunOutput,
}

impl Comparison {
    pub fn same_verdict(&self) -> bool {
        self.left.verdict == self.right.verdict
    }

    /// Long-format table: one row per profile entry of either run.
    pub fn csv(&self) -> String {
        let mut records = Vec::new();
        for (side, out) in [("a", &self.left), ("b", &self.right)] {
            for (n, v) in &out.series {
                records.push(vec![
                    side.into(),
                    out.name.clone(),
                    out.quantity.as_str().into(),
                    out.verdict.clone(),
                    n.to_string(),
                    v.to_string(),
                ]);
            }
        }
        render_csv(&["side", "experiment", "quantity", "verdict", "n", "value"], &records)
    }

    /// Side-by-side text table.
    pub fn table(&self) -> String {
        let (a, b) = (&self.left, &self.right);
        let mut s = format!("{:>6}  {:>14}  {:>6}  {:>14}\n", "n(a)", a.name, "n(b)", b.name);
        for i in 0..a.series.len().max(b.series.len()) {
            let cell = |o: &RunOutput| match o.series.get(i) {
                Some((n, v)) => (n.to_string(), v.to_string()),
                None => (String::new(), String::new()),
            };
            let ((na, va), (nb, vb)) = (cell(a), cell(b));
            s.push_str(&format!("{na:>6}  {va:>14}  {nb:>6}  {vb:>14}\n"));
        }
        s.push_str(&format!("verdict  {}: {}  |  {}: {}\n", a.name, a.verdict, b.name, b.verdict));
        s
    }
}

pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig, opts: &RunOptions) -> Result<Comparison, CliError> {
    Ok(Comparison { left: execute(a, opts)?, right: execute(b, opts)? })
}
