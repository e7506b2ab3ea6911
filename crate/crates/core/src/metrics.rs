//! System-level metrics derived from run tallies.

use serde::{Deserialize, Serialize};

use crate::engine::RunTally;
use crate::error::{Error, Result};

pub const SECONDS_PER_YEAR: f64 = 365.25 * 24.0 * 3600.0;

fn check_pair(shared: &[f64], alone: &[f64]) -> Result<()> {
    if shared.len() != alone.len() || shared.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "need equal-length non-empty IPC vectors, got {} and {}",
            shared.len(),
            alone.len()
        )));
    }
    Ok(())
}

/// Sum over cores of shared-run IPC relative to alone-run IPC.
pub fn weighted_speedup(ipc_shared: &[f64], ipc_alone: &[f64]) -> Result<f64> {
    check_pair(ipc_shared, ipc_alone)?;
    ipc_shared
        .iter()
        .zip(ipc_alone)
        .map(|(&s, &a)| {
            if a <= 0.0 {
                Err(Error::UndefinedMetric("alone IPC is zero".into()))
            } else {
                Ok(s / a)
            }
        })
        .sum()
}

/// Largest per-core slowdown (alone IPC over shared IPC). Lower is fairer.
pub fn max_slowdown(ipc_shared: &[f64], ipc_alone: &[f64]) -> Result<f64> {
    check_pair(ipc_shared, ipc_alone)?;
    let mut worst = f64::MIN;
    for (&s, &a) in ipc_shared.iter().zip(ipc_alone) {
        if s <= 0.0 {
            return Err(Error::UndefinedMetric("shared IPC is zero".into()));
        }
        worst = worst.max(a / s);
    }
    Ok(worst)
}

/// Performance per unit of average power, with power taken as energy per cycle.
pub fn energy_efficiency(weighted_speedup: f64, total_energy: f64, total_cycles: u64) -> Result<f64> {
    if total_energy <= 0.0 || total_cycles == 0 {
        return Err(Error::UndefinedMetric(
            "energy efficiency needs positive energy and cycles".into(),
        ));
    }
    Ok(weighted_speedup / (total_energy / total_cycles as f64))
}

/// PCM lifetime in years under ideal wear leveling, or `None` when nothing is
/// written. `cell_writes` and the capacity are both in bytes of cells.
pub fn pcm_lifetime(
    cell_writes: u64,
    pcm_capacity_rows: u64,
    row_size: u64,
    endurance: f64,
    wall_time_seconds: f64,
) -> Result<Option<f64>> {
    if pcm_capacity_rows == 0 || row_size == 0 || endurance <= 0.0 || wall_time_seconds <= 0.0 {
        return Err(Error::UndefinedMetric(
            "lifetime needs positive capacity, endurance and run time".into(),
        ));
    }
    if cell_writes == 0 {
        return Ok(None);
    }
    let cells = pcm_capacity_rows as f64 * row_size as f64;
    let write_rate = cell_writes as f64 / wall_time_seconds;
    Ok(Some(endurance * cells / write_rate / SECONDS_PER_YEAR))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub weighted_speedup: f64,
    pub max_slowdown: f64,
    pub energy_efficiency: f64,
    /// `None` when PCM saw no writes.
    pub pcm_lifetime_years: Option<f64>,
    pub dram_row_hit_rate: Option<f64>,
    pub pcm_row_hit_rate: Option<f64>,
    pub migrations: u64,
    pub ipc_shared: Vec<f64>,
    pub ipc_alone: Vec<f64>,
    pub total_energy: u64,
    pub total_cycles: u64,
}

/// Inputs for the lifetime estimate that are not part of a run tally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeModel {
    pub endurance: f64,
    pub cpu_freq_hz: f64,
    pub pcm_rows: u64,
    pub row_size: u64,
}

impl MetricReport {
    pub fn derive(shared: &RunTally, ipc_alone: &[f64], lifetime: &LifetimeModel) -> Result<Self> {
        let ipc_shared = shared.ipcs();
        let ws = weighted_speedup(&ipc_shared, ipc_alone)?;
        let ms = max_slowdown(&ipc_shared, ipc_alone)?;
        let energy = shared.total_energy();
        let ee = energy_efficiency(ws, energy as f64, shared.total_cycles)?;
        let wall = shared.total_cycles as f64 / lifetime.cpu_freq_hz;
        let years = pcm_lifetime(
            shared.pcm_cell_writes,
            lifetime.pcm_rows,
            lifetime.row_size,
            lifetime.endurance,
            wall,
        )?;
        Ok(MetricReport {
            weighted_speedup: ws,
            max_slowdown: ms,
            energy_efficiency: ee,
            pcm_lifetime_years: years,
            dram_row_hit_rate: shared.dram.row_hit_rate(),
            pcm_row_hit_rate: shared.pcm.row_hit_rate(),
            migrations: shared.migrations,
            ipc_shared,
            ipc_alone: ipc_alone.to_vec(),
            total_energy: energy,
            total_cycles: shared.total_cycles,
        })
    }
}
