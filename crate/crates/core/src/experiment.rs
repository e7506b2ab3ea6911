//! Single runs and parameter sweeps, with CSV reporting.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, TraceSource};
use crate::engine::{self, EngineOptions, MemoryMode, MigrationLogEntry, RunTally};
use crate::error::{Error, Result};
use crate::metrics::{LifetimeModel, MetricReport};
use crate::trace::{generate_synthetic, parse_trace, split_by_core, MemoryRequest};

/// Result table columns, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "config_hash",
    "policy",
    "seed",
    "weighted_speedup",
    "max_slowdown",
    "energy_efficiency",
    "pcm_lifetime_years",
    "dram_row_hit_rate",
    "pcm_row_hit_rate",
    "migrations",
    "timestamp",
];

pub const MIGRATION_LOG_COLUMNS: [&str; 5] = ["cycle", "pcm_row", "direction", "victim", "dirty"];

/// First 16 hex digits of the SHA-256 of the canonical config, output paths
/// excluded.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut canonical = cfg.clone();
    canonical.output = ExperimentConfig::defaults().output;
    let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
    hex::encode(&digest[..8])
}

/// Label for the policy column; homogeneous memories have no placement policy.
pub fn policy_label(cfg: &ExperimentConfig) -> &'static str {
    match cfg.system().effective_mode() {
        MemoryMode::Hybrid => cfg.policy.policy.name(),
        m => m.name(),
    }
}

pub fn load_traces(cfg: &ExperimentConfig) -> Result<Vec<Vec<MemoryRequest>>> {
    match cfg.trace.source {
        TraceSource::Synthetic => generate_synthetic(&cfg.synthetic_spec()),
        TraceSource::File => {
            let path = &cfg.trace.path;
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            split_by_core(&parse_trace(&text)?, cfg.engine.cores)
        }
    }
}

/// One row of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub config_hash: String,
    pub policy: String,
    pub seed: u64,
    pub report: MetricReport,
    pub timestamp: u64,
}

fn opt(v: Option<f64>, none: &str) -> String {
    v.map_or_else(|| none.to_string(), |x| x.to_string())
}

impl CsvRow {
    pub fn fields(&self) -> [String; 11] {
        let r = &self.report;
        [
            self.config_hash.clone(),
            self.policy.clone(),
            self.seed.to_string(),
            r.weighted_speedup.to_string(),
            r.max_slowdown.to_string(),
            r.energy_efficiency.to_string(),
            opt(r.pcm_lifetime_years, "unbounded"),
            opt(r.dram_row_hit_rate, ""),
            opt(r.pcm_row_hit_rate, ""),
            r.migrations.to_string(),
            self.timestamp.to_string(),
        ]
    }

    /// The row as CSV text without the trailing timestamp.
    pub fn deterministic_part(&self) -> String {
        let fields = self.fields();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&fields[..fields.len() - 1]).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub row: CsvRow,
    pub tally: RunTally,
}

impl Outcome {
    pub fn migration_log(&self) -> &[MigrationLogEntry] {
        &self.tally.migration_log
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Shared run plus one alone run per core, reduced to a report and CSV row.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let traces = load_traces(cfg)?;
    run_experiment_on(cfg, &traces)
}

/// As [`run_experiment`] with the traces supplied by the caller.
pub fn run_experiment_on(cfg: &ExperimentConfig, traces: &[Vec<MemoryRequest>]) -> Result<Outcome> {
    let system = cfg.system();
    let options = EngineOptions {
        record_requests: false,
        record_migrations: cfg.output.log_migrations,
    };
    let tally = engine::run_with(traces, &system, options)?;
    let alone = traces
        .par_iter()
        .map(|t| engine::run_alone(t, &system))
        .collect::<Result<Vec<f64>>>()?;
    let lifetime = LifetimeModel {
        endurance: cfg.metrics.endurance,
        cpu_freq_hz: cfg.engine.clock_hz,
        pcm_rows: cfg.topology.pcm_rows,
        row_size: cfg.topology.row_size,
    };
    let report = MetricReport::derive(&tally, &alone, &lifetime)?;
    Ok(Outcome {
        row: CsvRow {
            config_hash: config_hash(cfg),
            policy: policy_label(cfg).to_string(),
            seed: cfg.experiment.seed,
            report,
            timestamp: now(),
        },
        tally,
    })
}

/// Runs `base` once per value of `axis`, in parallel; results keep value order.
pub fn run_sweep(base: &ExperimentConfig, axis: &str, values: &[String]) -> Result<Vec<Outcome>> {
    if values.is_empty() {
        return Err(Error::validation("values", "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|v| base.with_axis(axis, v))
        .collect::<Result<Vec<_>>>()?;
    configs.par_iter().map(run_experiment).collect()
}

/// Appends rows to one CSV file, writing the header when the file is new.
/// Safe to share between threads; each row is written whole.
pub struct CsvAppender {
    inner: Mutex<csv::Writer<File>>,
    path: std::path::PathBuf,
}

impl CsvAppender {
    pub fn open(path: &Path) -> Result<Self> {
        let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        if fresh {
            w.write_record(CSV_COLUMNS)
                .and_then(|_| w.flush().map_err(csv::Error::from))
                .map_err(|e| Error::io(path, e.into()))?;
        }
        Ok(CsvAppender {
            inner: Mutex::new(w),
            path: path.to_path_buf(),
        })
    }

    pub fn append(&self, row: &CsvRow) -> Result<()> {
        let mut w = self.inner.lock().expect("appender lock");
        w.write_record(row.fields())
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| Error::io(&self.path, e.into()))
    }
}

pub fn write_migration_log(path: &Path, log: &[MigrationLogEntry]) -> Result<()> {
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(MIGRATION_LOG_COLUMNS).map_err(io)?;
    for m in log {
        w.write_record([
            m.cycle.to_string(),
            m.pcm_row.to_string(),
            m.direction.name().to_string(),
            m.victim.map_or_else(String::new, |v| v.to_string()),
            m.dirty.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every core's requests, core by core, in the text trace format.
pub fn write_trace_file(path: &Path, traces: &[Vec<MemoryRequest>]) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    let text = crate::trace::write_trace(traces.iter().flatten());
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            "[engine]\ncores = 2\n[trace.synthetic]\nrequests_per_core = 400\nreuse_factor = 16\nhits_per_activation = 16\nnum_rows_low_rbl = 8\nnum_rows_high_rbl = 8\n[topology]\ndram_rows = 4\n",
        )
        .unwrap()
    }

    #[test]
    fn hash_ignores_output_paths_only() {
        let a = small();
        let mut b = a.clone();
        b.output.csv = "elsewhere.csv".into();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&a.with_seed(99)));
        assert_eq!(config_hash(&a).len(), 16);
    }

    #[test]
    fn labels_follow_effective_mode() {
        let a = small();
        assert_eq!(policy_label(&a), "rbla-dyn");
        assert_eq!(policy_label(&a.with_axis("dram_rows", "0").unwrap()), "all-pcm");
        assert_eq!(policy_label(&a.with_axis("mode", "all-dram").unwrap()), "all-dram");
    }

    #[test]
    fn sweep_rows_equal_single_runs() {
        let base = small();
        let values: Vec<String> = ["freq", "rbla"].map(String::from).to_vec();
        let swept = run_sweep(&base, "policy", &values).unwrap();
        for (v, out) in values.iter().zip(&swept) {
            let single = run_experiment(&base.with_axis("policy", v).unwrap()).unwrap();
            assert_eq!(out.row.deterministic_part(), single.row.deterministic_part());
            assert_eq!(out.row.policy, *v);
        }
    }

    #[test]
    fn sweep_guards() {
        let base = small();
        assert!(run_sweep(&base, "policy", &[]).is_err());
        let err = run_sweep(&base, "nonsense", &["1".into()]).unwrap_err();
        assert!(err.to_string().contains("valid axes"));
    }

    #[test]
    fn missing_trace_file_is_io_error() {
        let mut cfg = small();
        cfg.trace.source = TraceSource::File;
        cfg.trace.path = "/nonexistent/trace.txt".into();
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn appender_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let row = run_experiment(&small()).unwrap().row;
        CsvAppender::open(&path).unwrap().append(&row).unwrap();
        CsvAppender::open(&path).unwrap().append(&row).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1], lines[2]);
    }
}
