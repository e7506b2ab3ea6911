//! Experiment configuration: TOML files layered over the shipped defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::Topology;
use crate::device::{EnergyParams, TimingParams};
use crate::engine::{MemoryMode, SystemConfig, BASE_INTERVAL_CYCLES};
use crate::error::{Error, Result};
use crate::policy::PolicyConfig;
use crate::trace::SyntheticSpec;

/// The defaults file shipped with the source tree.
pub const DEFAULTS_TOML: &str = include_str!("../../../configs/defaults.toml");

/// Parameters a sweep may vary, with the config key each one sets.
pub const SWEEP_AXES: &[(&str, &str)] = &[
    ("policy", "policy.policy"),
    ("miss_thresh", "policy.miss_thresh"),
    ("stats_store", "policy.stats_store"),
    ("mode", "engine.mode"),
    ("cores", "engine.cores"),
    ("interval_scale", "engine.interval_scale"),
    ("t_act_read_pcm", "timing.t_act_read_pcm"),
    ("t_act_write_pcm", "timing.t_act_write_pcm"),
    ("t_migration", "timing.t_migration"),
    ("dram_rows", "topology.dram_rows"),
    ("write_fraction", "trace.synthetic.write_fraction"),
    ("reuse_factor", "trace.synthetic.reuse_factor"),
    ("seed", "experiment.seed"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub timing: TimingParams,
    pub energy: EnergyParams,
    pub policy: PolicyConfig,
    pub engine: EngineSection,
    pub trace: TraceSection,
    pub metrics: MetricsSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub mode: MemoryMode,
    pub cores: u32,
    pub interval_scale: f64,
    /// 0 runs to drain.
    pub run_length: u64,
    pub prewarm_banks: bool,
    /// Converts cycles to seconds for the lifetime estimate.
    pub clock_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSource {
    Synthetic,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub source: TraceSource,
    pub path: PathBuf,
    pub synthetic: SyntheticKnobs,
}

/// The workload half of [`SyntheticSpec`]; geometry and seed come from other
/// sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticKnobs {
    pub cores_per_bank: u32,
    pub num_rows_low_rbl: u64,
    pub num_rows_high_rbl: u64,
    pub hits_per_activation: u64,
    pub reuse_factor: u64,
    pub active_rows: u64,
    pub write_fraction: f64,
    pub requests_per_core: u64,
    pub gap_min: u64,
    pub gap_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub endurance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: PathBuf,
    pub migration_log: PathBuf,
    pub log_migrations: bool,
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::validation(origin, e.to_string()))
}

/// Recursively overlays `top` onto `base`. Tables merge; anything else replaces.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn from_table(table: toml::Table) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::validation("config", e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn defaults() -> Self {
        Self::from_toml_str("").expect("shipped defaults are valid")
    }

    /// Parses `text` as overrides of the shipped defaults and validates the
    /// result.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table = parse_table(DEFAULTS_TOML, "defaults")?;
        merge(&mut table, parse_table(text, "config")?);
        from_table(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.system().validate()?;
        let e = &self.engine;
        if e.cores == 0 {
            return Err(Error::validation("engine.cores", "must be at least 1"));
        }
        if !(e.interval_scale.is_finite() && e.interval_scale > 0.0) {
            return Err(Error::validation("engine.interval_scale", "must be positive"));
        }
        if !(e.clock_hz.is_finite() && e.clock_hz > 0.0) {
            return Err(Error::validation("engine.clock_hz", "must be positive"));
        }
        if !(self.metrics.endurance.is_finite() && self.metrics.endurance > 0.0) {
            return Err(Error::validation("metrics.endurance", "must be positive"));
        }
        match self.trace.source {
            TraceSource::Synthetic => self.synthetic_spec().validate(),
            TraceSource::File if self.trace.path.as_os_str().is_empty() => Err(
                Error::validation("trace.path", "required when trace.source = \"file\""),
            ),
            TraceSource::File => Ok(()),
        }
    }

    pub fn interval_length(&self) -> u64 {
        (BASE_INTERVAL_CYCLES as f64 * self.engine.interval_scale).round() as u64
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            topology: self.topology,
            timing: self.timing,
            energy: self.energy,
            policy: self.policy,
            mode: self.engine.mode,
            interval_length: self.interval_length(),
            run_length: (self.engine.run_length > 0).then_some(self.engine.run_length),
            prewarm_banks: self.engine.prewarm_banks,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let k = &self.trace.synthetic;
        SyntheticSpec {
            cores: self.engine.cores,
            cores_per_bank: k.cores_per_bank,
            num_rows_low_rbl: k.num_rows_low_rbl,
            num_rows_high_rbl: k.num_rows_high_rbl,
            hits_per_activation: k.hits_per_activation,
            reuse_factor: k.reuse_factor,
            active_rows: k.active_rows,
            write_fraction: k.write_fraction,
            requests_per_core: k.requests_per_core,
            gap_min: k.gap_min,
            gap_max: k.gap_max,
            banks: self.topology.pcm_bank_count(),
            row_size: self.topology.row_size,
            line_size: self.topology.line_size,
            rng_seed: self.experiment.seed,
        }
    }

    /// Returns a copy with one sweep axis set from its textual value.
    pub fn with_axis(&self, axis: &str, value: &str) -> Result<Self> {
        let key = SWEEP_AXES
            .iter()
            .find(|(name, _)| *name == axis)
            .map(|(_, key)| *key)
            .ok_or_else(|| {
                let names: Vec<&str> = SWEEP_AXES.iter().map(|(n, _)| *n).collect();
                Error::validation(
                    "axis",
                    format!("unknown axis {axis:?}; valid axes: {}", names.join(", ")),
                )
            })?;
        let mut table = toml::Table::try_from(self).expect("config serializes");
        let (path, leaf) = key.rsplit_once('.').expect("axis keys are dotted");
        let mut section = &mut table;
        for part in path.split('.') {
            section = section
                .get_mut(part)
                .and_then(toml::Value::as_table_mut)
                .expect("axis key exists in config");
        }
        let slot = section.get_mut(leaf).expect("axis key exists in config");
        let bad = || Error::validation(key, format!("cannot use {value:?} here"));
        *slot = match slot {
            toml::Value::String(_) => toml::Value::String(value.to_string()),
            toml::Value::Integer(_) => toml::Value::Integer(value.parse().map_err(|_| bad())?),
            toml::Value::Float(_) => toml::Value::Float(value.parse().map_err(|_| bad())?),
            toml::Value::Boolean(_) => toml::Value::Boolean(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        from_table(table)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.experiment.seed = seed;
        cfg
    }
}
