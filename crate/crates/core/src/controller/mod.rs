//! Hybrid memory controller: address mapping, DRAM cache directory,
//! FR-FCFS request selection and row migration.

mod remap;
mod topology;

pub use remap::{Eviction, RemapTable};
pub use topology::{BankId, Topology};

use serde::Serialize;

use crate::device::{BankState, Device, TimingParams};
use crate::trace::MemoryRequest;

/// Where a PCM row currently lives. `row` is the slot id for DRAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    pub device: Device,
    pub row: u64,
}

pub fn route(pcm_row: u64, remap: &RemapTable) -> Route {
    match remap.lookup(pcm_row) {
        Some(slot) => Route {
            device: Device::Dram,
            row: slot,
        },
        None => Route {
            device: Device::Pcm,
            row: pcm_row,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub device: Device,
    pub bank: BankId,
    /// Row id as seen by the bank's row buffer.
    pub row: u64,
    pub column: u64,
}

#[derive(Debug, Clone)]
pub struct RequestQueueEntry {
    pub request: MemoryRequest,
    /// Index of the issuing core in the simulation.
    pub core: usize,
    /// Position of the request in its core's trace.
    pub index: usize,
    pub arrival: u64,
    pub pcm_row: u64,
    pub target: Target,
    /// Earliest cycle the row's data is stable (not mid-migration).
    pub ready_at: u64,
}

#[derive(Debug, Clone)]
pub struct ChannelState {
    pub busy_until: u64,
    pub banks: Vec<BankState>,
}

impl ChannelState {
    fn new(banks: u32) -> Self {
        ChannelState {
            busy_until: 0,
            banks: vec![BankState::default(); banks as usize],
        }
    }

    pub fn is_idle(&self, cycle: u64) -> bool {
        self.busy_until <= cycle
    }

    pub fn occupy_until(&mut self, cycle: u64) {
        self.busy_until = self.busy_until.max(cycle);
    }
}

/// Channel and bank occupancy of both devices.
#[derive(Debug, Clone)]
pub struct MemorySystem {
    dram: Vec<ChannelState>,
    pcm: Vec<ChannelState>,
}

impl MemorySystem {
    pub fn new(dram_channels: u32, pcm_channels: u32, banks_per_channel: u32) -> Self {
        MemorySystem {
            dram: (0..dram_channels)
                .map(|_| ChannelState::new(banks_per_channel))
                .collect(),
            pcm: (0..pcm_channels)
                .map(|_| ChannelState::new(banks_per_channel))
                .collect(),
        }
    }

    pub fn channel(&self, device: Device, channel: u32) -> &ChannelState {
        match device {
            Device::Dram => &self.dram[channel as usize],
            Device::Pcm => &self.pcm[channel as usize],
        }
    }

    pub fn channel_mut(&mut self, device: Device, channel: u32) -> &mut ChannelState {
        match device {
            Device::Dram => &mut self.dram[channel as usize],
            Device::Pcm => &mut self.pcm[channel as usize],
        }
    }

    pub fn bank(&self, device: Device, id: BankId) -> &BankState {
        &self.channel(device, id.channel).banks[id.bank as usize]
    }

    pub fn bank_mut(&mut self, device: Device, id: BankId) -> &mut BankState {
        &mut self.channel_mut(device, id.channel).banks[id.bank as usize]
    }

    /// Earliest cycle at or after which both the bank and its channel are idle.
    pub fn free_at(&self, target: &Target) -> u64 {
        let ch = self.channel(target.device, target.bank.channel);
        ch.busy_until
            .max(ch.banks[target.bank.bank as usize].busy_until)
    }
}

/// FR-FCFS: among entries whose bank and channel are idle and whose row is not
/// mid-migration, prefer row buffer hits, then the earliest arrival, then the
/// lowest queue index.
pub fn schedule_next(
    queue: &[RequestQueueEntry],
    mem: &MemorySystem,
    cycle: u64,
) -> Option<usize> {
    let mut best: Option<((bool, u64, usize), usize)> = None;
    for (i, e) in queue.iter().enumerate() {
        if e.arrival > cycle || e.ready_at > cycle {
            continue;
        }
        let ch = mem.channel(e.target.device, e.target.bank.channel);
        let bank = &ch.banks[e.target.bank.bank as usize];
        if !ch.is_idle(cycle) || !bank.is_idle(cycle) {
            continue;
        }
        let miss = bank.open_row != Some(e.target.row);
        let key = (miss, e.arrival, i);
        if best.is_none_or(|(k, _)| key < k) {
            best = Some((key, i));
        }
    }
    best.map(|(_, i)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "pcm_to_dram")]
    ToDram,
    #[serde(rename = "dram_to_pcm")]
    ToPcm,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ToDram => "pcm_to_dram",
            Direction::ToPcm => "dram_to_pcm",
        }
    }
}

/// One row moved across the channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub pcm_row: u64,
    pub direction: Direction,
    pub dram_channel: u32,
    pub pcm_channel: u32,
    pub start: u64,
    pub end: u64,
}

impl Transfer {
    pub fn duration(&self) -> u64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MigrationRecord {
    pub pcm_row: u64,
    pub slot: u64,
    pub victim: Option<Eviction>,
    /// Present only when the victim was dirty.
    pub writeback: Option<Transfer>,
    pub fill: Transfer,
}

impl MigrationRecord {
    /// Rows moved, counting a dirty writeback as its own migration.
    pub fn migrations(&self) -> u64 {
        1 + self.writeback.is_some() as u64
    }

    pub fn channel_busy_cycles(&self) -> u64 {
        self.fill.duration() + self.writeback.map_or(0, |w| w.duration())
    }
}

/// Moves `pcm_row` into the DRAM cache no earlier than `cycle`.
///
/// A dirty LRU victim is written back first; each transfer holds its PCM and
/// DRAM channel for `t_migration` cycles. Panics if the row is already cached.
pub fn migrate_row(
    pcm_row: u64,
    remap: &mut RemapTable,
    mem: &mut MemorySystem,
    cycle: u64,
    topology: &Topology,
    timing: &TimingParams,
) -> MigrationRecord {
    assert!(
        !remap.contains(pcm_row),
        "migrating row {pcm_row} which is already in DRAM"
    );
    let (slot, victim) = remap.insert(pcm_row);
    let dram_channel = topology.dram_bank(slot).channel;

    let mut transfer = |row: u64, direction: Direction, earliest: u64| {
        let pcm_channel = topology.pcm_bank(row).channel;
        let start = earliest
            .max(mem.channel(Device::Dram, dram_channel).busy_until)
            .max(mem.channel(Device::Pcm, pcm_channel).busy_until);
        let end = start + timing.t_migration;
        mem.channel_mut(Device::Dram, dram_channel).occupy_until(end);
        mem.channel_mut(Device::Pcm, pcm_channel).occupy_until(end);
        Transfer {
            pcm_row: row,
            direction,
            dram_channel,
            pcm_channel,
            start,
            end,
        }
    };

    let writeback = victim
        .filter(|v| v.dirty)
        .map(|v| transfer(v.pcm_row, Direction::ToPcm, cycle));
    let fill = transfer(
        pcm_row,
        Direction::ToDram,
        writeback.map_or(cycle, |w| w.end),
    );
    MigrationRecord {
        pcm_row,
        slot,
        victim,
        writeback,
        fill,
    }
}
