//! Cycle loop driving in-order cores against the hybrid memory controller.
//!
//! Each core alternates between `compute_gap` cycles of work and a single
//! outstanding memory request, on which it stalls. Time advances from event to
//! event (request issue, completion, resource release, interval boundary); no
//! state changes between events, so skipping idle cycles is exact.
//!
//! A dispatched request holds its bank for activation (on a miss) plus column
//! access, and its channel for `t_bus`. It completes after activation, column
//! access and bus transfer.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::controller::{
    migrate_row, schedule_next, Direction, MemorySystem, RemapTable, RequestQueueEntry, Target,
    Topology,
};
use crate::device::{
    access_energy, access_latency, Device, EnergyParams, RowOutcome, TimingParams,
};
use crate::error::{Error, Result};
use crate::policy::{Decision, IntervalCounters, Policy, PolicyConfig};
use crate::trace::{AccessKind, MemoryRequest};

/// Base adaptation and counter-reset interval before `interval_scale`.
pub const BASE_INTERVAL_CYCLES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryMode {
    /// Small DRAM cache in front of PCM, managed by the placement policy.
    Hybrid,
    /// Every row served by DRAM, with the PCM organization and DRAM timing.
    AllDram,
    /// Every row served by PCM; no DRAM and no migration.
    AllPcm,
}

impl MemoryMode {
    pub fn name(self) -> &'static str {
        match self {
            MemoryMode::Hybrid => "hybrid",
            MemoryMode::AllDram => "all-dram",
            MemoryMode::AllPcm => "all-pcm",
        }
    }
}

/// Everything that determines a simulation besides the traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub topology: Topology,
    pub timing: TimingParams,
    pub energy: EnergyParams,
    pub policy: PolicyConfig,
    pub mode: MemoryMode,
    pub interval_length: u64,
    /// Stop at this cycle instead of running every trace to completion.
    pub run_length: Option<u64>,
    /// Open, before cycle 0, the row of the first access to each bank.
    pub prewarm_banks: bool,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.timing.validate()?;
        self.energy.validate()?;
        self.policy.validate()?;
        if self.interval_length == 0 {
            return Err(Error::validation(
                "engine.interval_scale",
                "interval length rounds to zero cycles",
            ));
        }
        if self.run_length == Some(0) {
            return Err(Error::validation("engine.run_length", "must be positive"));
        }
        Ok(())
    }

    /// A hybrid system without DRAM capacity degenerates to all-PCM.
    pub fn effective_mode(&self) -> MemoryMode {
        match self.mode {
            MemoryMode::Hybrid if self.topology.dram_rows == 0 => MemoryMode::AllPcm,
            m => m,
        }
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            topology: Topology::default(),
            timing: TimingParams::default(),
            energy: EnergyParams::default(),
            policy: PolicyConfig::default(),
            mode: MemoryMode::Hybrid,
            interval_length: BASE_INTERVAL_CYCLES / 100,
            run_length: None,
            prewarm_banks: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    pub record_requests: bool,
    pub record_migrations: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CoreTally {
    /// Compute cycles plus completed memory requests.
    pub instructions: u64,
    pub cycles: u64,
    pub compute_cycles: u64,
    pub stall_cycles: u64,
    pub requests: u64,
}

impl CoreTally {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.instructions as f64 / self.cycles as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DeviceTally {
    pub row_hits: u64,
    pub row_misses: u64,
    pub reads: u64,
    pub writes: u64,
    pub access_energy: u64,
    pub static_energy: u64,
    /// Sum of device service latencies (activation plus column access).
    pub service_cycles: u64,
}

impl DeviceTally {
    pub fn accesses(&self) -> u64 {
        self.row_hits + self.row_misses
    }

    pub fn row_hit_rate(&self) -> Option<f64> {
        let n = self.accesses();
        (n > 0).then(|| self.row_hits as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntervalRecord {
    pub index: u64,
    pub end_cycle: u64,
    pub migrations: u64,
    pub reads_dram: u64,
    pub writes_dram: u64,
    pub cost: u64,
    pub benefit: u64,
    pub net_benefit: i64,
    pub thresh_before: u32,
    pub thresh_after: u32,
    /// Channel cycles reserved by migrations started in this interval.
    pub migration_channel_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RequestRecord {
    pub core: usize,
    pub index: usize,
    pub arrival: u64,
    pub dispatch: u64,
    pub completion: u64,
    pub device: Device,
    pub hit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MigrationLogEntry {
    /// Transfer start.
    pub cycle: u64,
    /// Transfer end; the channels are busy over `cycle..end`.
    pub end: u64,
    /// Cycle of the caching decision that caused the transfer.
    pub decided: u64,
    pub pcm_row: u64,
    pub direction: Direction,
    pub victim: Option<u64>,
    pub dirty: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTally {
    pub cores: Vec<CoreTally>,
    pub dram: DeviceTally,
    pub pcm: DeviceTally,
    /// Rows moved between devices, dirty writebacks included.
    pub migrations: u64,
    pub migration_channel_cycles: u64,
    pub migration_energy: u64,
    /// Bytes of PCM cells written by demand writes and writebacks.
    pub pcm_cell_writes: u64,
    pub total_cycles: u64,
    pub intervals: Vec<IntervalRecord>,
    pub requests: Vec<RequestRecord>,
    pub migration_log: Vec<MigrationLogEntry>,
}

impl RunTally {
    pub fn device(&self, device: Device) -> &DeviceTally {
        match device {
            Device::Dram => &self.dram,
            Device::Pcm => &self.pcm,
        }
    }

    fn device_mut(&mut self, device: Device) -> &mut DeviceTally {
        match device {
            Device::Dram => &mut self.dram,
            Device::Pcm => &mut self.pcm,
        }
    }

    pub fn total_energy(&self) -> u64 {
        self.dram.access_energy
            + self.dram.static_energy
            + self.pcm.access_energy
            + self.pcm.static_energy
            + self.migration_energy
    }

    pub fn ipcs(&self) -> Vec<f64> {
        self.cores.iter().map(CoreTally::ipc).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Computing { issue_at: u64 },
    Waiting { issued_at: u64, done_at: Option<u64> },
    Done,
}

struct Core<'a> {
    trace: &'a [MemoryRequest],
    rows: Vec<(u64, u64)>,
    cursor: usize,
    phase: Phase,
    phase_start: u64,
    tally: CoreTally,
}

/// Runs every trace to completion (or to `run_length`) and returns the tallies.
pub fn run(traces: &[Vec<MemoryRequest>], system: &SystemConfig) -> Result<RunTally> {
    run_with(traces, system, EngineOptions::default())
}

pub fn run_with(
    traces: &[Vec<MemoryRequest>],
    system: &SystemConfig,
    options: EngineOptions,
) -> Result<RunTally> {
    system.validate()?;
    if traces.is_empty() {
        return Err(Error::validation("engine.cores", "no core traces supplied"));
    }
    let mut cores = Vec::with_capacity(traces.len());
    for (i, trace) in traces.iter().enumerate() {
        if trace.is_empty() {
            return Err(Error::validation("trace", format!("core {i} has an empty trace")));
        }
        let rows = trace
            .iter()
            .map(|r| system.topology.map_address(r.address))
            .collect::<Result<Vec<_>>>()?;
        cores.push(Core {
            trace,
            rows,
            cursor: 0,
            phase: Phase::Computing {
                issue_at: trace[0].compute_gap,
            },
            phase_start: 0,
            tally: CoreTally::default(),
        });
    }
    Ok(Simulation::new(system, options).run(cores))
}

/// Alone-run IPC of one core's trace with the whole memory system to itself.
pub fn run_alone(trace: &[MemoryRequest], system: &SystemConfig) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::UndefinedMetric(
            "alone IPC of an empty trace".into(),
        ));
    }
    let solo: Vec<MemoryRequest> = trace
        .iter()
        .map(|r| MemoryRequest { core_id: 0, ..*r })
        .collect();
    let tally = run(&[solo], system)?;
    Ok(tally.cores[0].ipc())
}

struct Simulation<'s> {
    sys: &'s SystemConfig,
    mode: MemoryMode,
    options: EngineOptions,
    mem: MemorySystem,
    remap: RemapTable,
    policy: Policy,
    queue: Vec<RequestQueueEntry>,
    row_ready: HashMap<u64, u64>,
    next_boundary: u64,
    interval_migration_cycles: u64,
    tally: RunTally,
}

impl<'s> Simulation<'s> {
    fn new(sys: &'s SystemConfig, options: EngineOptions) -> Self {
        let mode = sys.effective_mode();
        let t = &sys.topology;
        let mem = match mode {
            // homogeneous DRAM keeps the PCM organization
            MemoryMode::AllDram => MemorySystem::new(t.pcm_channels, 0, t.banks_per_channel),
            MemoryMode::AllPcm => MemorySystem::new(0, t.pcm_channels, t.banks_per_channel),
            MemoryMode::Hybrid => {
                MemorySystem::new(t.dram_channels, t.pcm_channels, t.banks_per_channel)
            }
        };
        let dram_rows = if mode == MemoryMode::Hybrid { t.dram_rows } else { 0 };
        Simulation {
            sys,
            mode,
            options,
            mem,
            remap: RemapTable::new(dram_rows),
            policy: Policy::new(&sys.policy),
            queue: Vec::new(),
            row_ready: HashMap::new(),
            next_boundary: sys.interval_length,
            interval_migration_cycles: 0,
            tally: RunTally::default(),
        }
    }

    fn resolve(&self, pcm_row: u64, column: u64) -> Target {
        let t = &self.sys.topology;
        match self.mode {
            MemoryMode::AllDram => Target {
                device: Device::Dram,
                bank: t.pcm_bank(pcm_row),
                row: pcm_row,
                column,
            },
            MemoryMode::AllPcm => Target {
                device: Device::Pcm,
                bank: t.pcm_bank(pcm_row),
                row: pcm_row,
                column,
            },
            MemoryMode::Hybrid => match self.remap.lookup(pcm_row) {
                Some(slot) => Target {
                    device: Device::Dram,
                    bank: t.dram_bank(slot),
                    row: slot,
                    column,
                },
                None => Target {
                    device: Device::Pcm,
                    bank: t.pcm_bank(pcm_row),
                    row: pcm_row,
                    column,
                },
            },
        }
    }

    fn prewarm(&mut self, cores: &[Core<'_>]) {
        for core in cores {
            for &(row, col) in &core.rows {
                let target = self.resolve(row, col);
                let bank = self.mem.bank_mut(target.device, target.bank);
                if bank.open_row.is_none() {
                    bank.open_row = Some(target.row);
                }
            }
        }
    }

    fn run(mut self, mut cores: Vec<Core<'_>>) -> RunTally {
        if self.sys.prewarm_banks {
            self.prewarm(&cores);
        }
        let limit = self.sys.run_length.unwrap_or(u64::MAX);
        let mut now = 0u64;
        loop {
            self.complete(&mut cores, now);
            if self.mode == MemoryMode::Hybrid {
                while self.next_boundary <= now {
                    self.close_interval();
                }
            }
            self.issue(&mut cores, now);
            while let Some(i) = schedule_next(&self.queue, &self.mem, now) {
                let entry = self.queue.remove(i);
                self.dispatch(entry, &mut cores, now);
            }

            if cores.iter().all(|c| c.phase == Phase::Done) {
                break;
            }
            let next = self.next_event(&cores, now);
            assert!(next > now, "simulation failed to make progress at cycle {now}");
            if next >= limit {
                now = limit;
                // completions landing exactly on the limit still count
                self.complete(&mut cores, now);
                break;
            }
            now = next;
        }
        self.finish(cores, now)
    }

    fn complete(&mut self, cores: &mut [Core<'_>], now: u64) {
        for core in cores.iter_mut() {
            let Phase::Waiting {
                issued_at,
                done_at: Some(done),
            } = core.phase
            else {
                continue;
            };
            if done != now {
                continue;
            }
            core.tally.stall_cycles += now - issued_at;
            core.tally.requests += 1;
            core.cursor += 1;
            core.phase_start = now;
            core.phase = match core.trace.get(core.cursor) {
                Some(next) => Phase::Computing {
                    issue_at: now + next.compute_gap,
                },
                None => Phase::Done,
            };
            if core.phase == Phase::Done {
                core.tally.cycles = now;
            }
        }
    }

    fn issue(&mut self, cores: &mut [Core<'_>], now: u64) {
        for (idx, core) in cores.iter_mut().enumerate() {
            if core.phase != (Phase::Computing { issue_at: now }) {
                continue;
            }
            core.tally.compute_cycles += now - core.phase_start;
            core.phase_start = now;
            core.phase = Phase::Waiting {
                issued_at: now,
                done_at: None,
            };
            let (pcm_row, column) = core.rows[core.cursor];
            self.queue.push(RequestQueueEntry {
                request: core.trace[core.cursor],
                core: idx,
                index: core.cursor,
                arrival: now,
                pcm_row,
                target: self.resolve(pcm_row, column),
                ready_at: self.row_ready.get(&pcm_row).copied().unwrap_or(0),
            });
        }
    }

    fn dispatch(&mut self, entry: RequestQueueEntry, cores: &mut [Core<'_>], now: u64) {
        let t = self.sys.timing;
        let e = self.sys.energy;
        let kind = entry.request.kind;
        let target = entry.target;
        let device = target.device;

        let outcome = self.mem.bank_mut(device, target.bank).access(target.row);
        let service = access_latency(device, kind, outcome, &t);
        self.mem
            .bank_mut(device, target.bank)
            .occupy_until(now + service);
        self.mem
            .channel_mut(device, target.bank.channel)
            .occupy_until(now + t.t_bus);
        let done = now + service + t.t_bus;

        let core_idx = entry.core;
        let core = &mut cores[core_idx];
        core.phase = Phase::Waiting {
            issued_at: entry.arrival,
            done_at: Some(done),
        };

        let dev = self.tally.device_mut(device);
        match outcome {
            RowOutcome::Hit => dev.row_hits += 1,
            RowOutcome::Miss => dev.row_misses += 1,
        }
        match kind {
            AccessKind::Read => dev.reads += 1,
            AccessKind::Write => dev.writes += 1,
        }
        dev.access_energy += access_energy(device, kind, outcome, &e);
        dev.service_cycles += service;
        if device == Device::Pcm && kind == AccessKind::Write {
            self.tally.pcm_cell_writes += self.sys.topology.line_size;
        }
        if self.options.record_requests {
            self.tally.requests.push(RequestRecord {
                core: core_idx,
                index: entry.index,
                arrival: entry.arrival,
                dispatch: now,
                completion: done,
                device,
                hit: outcome == RowOutcome::Hit,
            });
        }

        if self.mode != MemoryMode::Hybrid {
            return;
        }
        if device == Device::Dram {
            self.remap.touch(target.row, kind == AccessKind::Write);
        }
        let decision = self
            .policy
            .on_memory_access(entry.pcm_row, device, kind, outcome);
        if decision == Decision::CacheRow && self.remap.capacity() > 0 {
            self.migrate(entry.pcm_row, now);
        }
    }

    fn migrate(&mut self, pcm_row: u64, now: u64) {
        let rec = migrate_row(
            pcm_row,
            &mut self.remap,
            &mut self.mem,
            now,
            &self.sys.topology,
            &self.sys.timing,
        );
        let moved = rec.migrations();
        self.policy.record_migrations(moved);
        self.tally.migrations += moved;
        self.tally.migration_channel_cycles += rec.channel_busy_cycles();
        self.interval_migration_cycles += rec.channel_busy_cycles();
        self.tally.migration_energy += moved * self.sys.energy.e_migration;

        self.row_ready.insert(pcm_row, rec.fill.end);
        let mut touched = vec![pcm_row];
        if let Some(v) = rec.victim {
            let ready = rec.writeback.map_or(now, |w| w.end);
            self.row_ready.insert(v.pcm_row, ready);
            touched.push(v.pcm_row);
        }
        if let Some(wb) = rec.writeback {
            self.tally.pcm_cell_writes += self.sys.topology.row_size;
            if self.options.record_migrations {
                self.tally.migration_log.push(MigrationLogEntry {
                    cycle: wb.start,
                    end: wb.end,
                    decided: now,
                    pcm_row: wb.pcm_row,
                    direction: Direction::ToPcm,
                    victim: None,
                    dirty: true,
                });
            }
        }
        if self.options.record_migrations {
            self.tally.migration_log.push(MigrationLogEntry {
                cycle: rec.fill.start,
                end: rec.fill.end,
                decided: now,
                pcm_row,
                direction: Direction::ToDram,
                victim: rec.victim.map(|v| v.pcm_row),
                dirty: rec.victim.is_some_and(|v| v.dirty),
            });
        }

        // queued requests to the moved rows follow them to their new home
        for i in 0..self.queue.len() {
            let row = self.queue[i].pcm_row;
            if touched.contains(&row) {
                let column = self.queue[i].target.column;
                self.queue[i].target = self.resolve(row, column);
                self.queue[i].ready_at = self.row_ready[&row];
            }
        }
    }

    fn close_interval(&mut self) {
        let out = self.policy.end_interval(&self.sys.timing);
        let IntervalCounters {
            migrations,
            reads_dram,
            writes_dram,
        } = out.counters;
        self.tally.intervals.push(IntervalRecord {
            index: self.tally.intervals.len() as u64,
            end_cycle: self.next_boundary,
            migrations,
            reads_dram,
            writes_dram,
            cost: out.cost,
            benefit: out.benefit,
            net_benefit: out.net_benefit,
            thresh_before: out.thresh_before,
            thresh_after: out.thresh_after,
            migration_channel_cycles: self.interval_migration_cycles,
        });
        self.interval_migration_cycles = 0;
        self.next_boundary += self.sys.interval_length;
    }

    fn next_event(&self, cores: &[Core<'_>], now: u64) -> u64 {
        let mut next = u64::MAX;
        for core in cores {
            match core.phase {
                Phase::Computing { issue_at } => next = next.min(issue_at),
                Phase::Waiting {
                    done_at: Some(d), ..
                } => next = next.min(d),
                _ => {}
            }
        }
        for e in &self.queue {
            let ready = e.arrival.max(e.ready_at).max(self.mem.free_at(&e.target));
            next = next.min(ready.max(now + 1));
        }
        if self.mode == MemoryMode::Hybrid {
            next = next.min(self.next_boundary);
        }
        next
    }

    fn finish(mut self, cores: Vec<Core<'_>>, end: u64) -> RunTally {
        let mut total = 0;
        for mut core in cores {
            match core.phase {
                Phase::Done => {}
                Phase::Computing { .. } => {
                    core.tally.compute_cycles += end - core.phase_start;
                    core.tally.cycles = end;
                }
                Phase::Waiting { issued_at, .. } => {
                    core.tally.stall_cycles += end - issued_at;
                    core.tally.cycles = end;
                }
            }
            core.tally.instructions = core.tally.compute_cycles + core.tally.requests;
            total = total.max(core.tally.cycles);
            self.tally.cores.push(core.tally);
        }
        self.tally.total_cycles = total;
        let e = self.sys.energy;
        if self.mode != MemoryMode::AllPcm {
            self.tally.dram.static_energy = e.e_static_dram * total;
        }
        if self.mode != MemoryMode::AllDram {
            self.tally.pcm.static_energy = e.e_static_pcm * total;
        }
        self.tally
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(core: u32, gap: u64, kind: AccessKind, row: u64) -> MemoryRequest {
        MemoryRequest {
            core_id: core,
            kind,
            address: row * 4096,
            compute_gap: gap,
        }
    }

    fn all(mode: MemoryMode) -> SystemConfig {
        SystemConfig {
            mode,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn idle_dram_miss_latency_is_sum_of_components() {
        let sys = all(MemoryMode::AllDram);
        let t = sys.timing;
        let tally = run_with(
            &[vec![req(0, 0, AccessKind::Read, 3)]],
            &sys,
            EngineOptions {
                record_requests: true,
                ..Default::default()
            },
        )
        .unwrap();
        let r = tally.requests[0];
        assert_eq!(r.completion - r.arrival, t.t_act_dram + t.t_row_hit + t.t_bus);
        assert_eq!(tally.cores[0].cycles, t.t_act_dram + t.t_row_hit + t.t_bus);
        assert_eq!(tally.cores[0].instructions, 1);
    }

    #[test]
    fn compute_gap_precedes_issue() {
        let sys = all(MemoryMode::AllPcm);
        let t = sys.timing;
        let tally = run(
            &[vec![
                req(0, 10, AccessKind::Read, 3),
                req(0, 5, AccessKind::Read, 3),
            ]],
            &sys,
        )
        .unwrap();
        let c = tally.cores[0];
        let first = t.t_act_read_pcm + t.t_row_hit + t.t_bus;
        let second = t.t_row_hit + t.t_bus;
        assert_eq!(c.cycles, 10 + first + 5 + second);
        assert_eq!(c.compute_cycles, 15);
        assert_eq!(c.stall_cycles, first + second);
        assert_eq!(c.instructions, 17);
    }

    #[test]
    fn empty_trace_is_rejected() {
        let sys = SystemConfig::default();
        assert!(run(&[vec![]], &sys).is_err());
        assert!(matches!(
            run_alone(&[], &sys),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn out_of_range_address_fails_before_running() {
        let sys = SystemConfig::default();
        let bad = req(0, 0, AccessKind::Read, sys.topology.pcm_rows);
        assert!(matches!(run(&[vec![bad]], &sys), Err(Error::Address { .. })));
    }

    #[test]
    fn hybrid_migrates_after_threshold_and_serves_from_dram() {
        let sys = SystemConfig {
            policy: PolicyConfig {
                policy: crate::policy::PolicyKind::Rbla,
                miss_thresh: 2,
                ..PolicyConfig::default()
            },
            ..SystemConfig::default()
        };
        // rows 0 and 8 conflict in PCM bank 0
        let trace: Vec<_> = (0..20)
            .map(|i| req(0, 0, AccessKind::Read, if i % 2 == 0 { 0 } else { 8 }))
            .collect();
        let tally = run_with(
            &[trace],
            &sys,
            EngineOptions {
                record_requests: true,
                record_migrations: true,
            },
        )
        .unwrap();
        assert_eq!(tally.migrations, 2);
        assert_eq!(tally.migration_log.len(), 2);
        assert!(tally.dram.accesses() > 0);
        assert_eq!(
            tally.migration_channel_cycles,
            tally.migrations * sys.timing.t_migration
        );
        // accesses after a migration wait for the fill
        let fill_end = tally.migration_log[0].cycle + sys.timing.t_migration;
        let first_dram = tally
            .requests
            .iter()
            .find(|r| r.device == Device::Dram)
            .unwrap();
        assert!(first_dram.dispatch >= fill_end);
    }

    #[test]
    fn zero_dram_rows_degenerates_to_all_pcm() {
        let mut sys = SystemConfig::default();
        sys.topology.dram_rows = 0;
        assert_eq!(sys.effective_mode(), MemoryMode::AllPcm);
        let trace: Vec<_> = (0..50)
            .map(|i| req(0, 0, AccessKind::Read, (i % 2) * 8))
            .collect();
        let hybrid = run(&[trace.clone()], &sys).unwrap();
        let pcm = run(&[trace], &all(MemoryMode::AllPcm)).unwrap();
        assert_eq!(hybrid.migrations, 0);
        assert_eq!(hybrid, pcm);
    }

    #[test]
    fn fixed_run_length_truncates() {
        let sys = SystemConfig {
            run_length: Some(1000),
            mode: MemoryMode::AllPcm,
            ..SystemConfig::default()
        };
        let trace: Vec<_> = (0..100).map(|_| req(0, 10, AccessKind::Read, 1)).collect();
        let tally = run(&[trace], &sys).unwrap();
        let c = tally.cores[0];
        assert_eq!(c.cycles, 1000);
        assert_eq!(c.compute_cycles + c.stall_cycles, 1000);
        assert!(c.requests < 100);
    }

    #[test]
    fn prewarm_opens_first_rows() {
        let sys = SystemConfig {
            mode: MemoryMode::AllPcm,
            prewarm_banks: true,
            ..SystemConfig::default()
        };
        let tally = run(&[vec![req(0, 0, AccessKind::Read, 5)]], &sys).unwrap();
        assert_eq!(tally.pcm.row_hits, 1);
        assert_eq!(tally.pcm.row_misses, 0);
    }
}
