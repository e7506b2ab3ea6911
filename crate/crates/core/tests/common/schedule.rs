//! A deliberately naive FR-FCFS reference: steps one cycle at a time and
//! rescans every pending request at every cycle.

use std::collections::HashMap;

use hybridsim::controller::Topology;
use hybridsim::device::{Device, TimingParams};
use hybridsim::engine::{self, EngineOptions, MemoryMode, SystemConfig};
use hybridsim::trace::{AccessKind, MemoryRequest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two banks on one channel.
pub fn two_bank_topology() -> Topology {
    Topology {
        dram_channels: 1,
        pcm_channels: 1,
        banks_per_channel: 2,
        dram_rows: 0,
        pcm_rows: 64,
        ..Topology::default()
    }
}

pub fn homogeneous(mode: MemoryMode, timing: TimingParams) -> SystemConfig {
    SystemConfig {
        topology: two_bank_topology(),
        timing,
        mode,
        ..SystemConfig::default()
    }
}

/// Up to `max_requests` requests over 1 to 3 cores, rows 0..6 on two banks.
pub fn random_case(seed: u64, max_requests: usize) -> Vec<Vec<MemoryRequest>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cores = rng.random_range(1..=3usize);
    let total = rng.random_range(cores..=max_requests);
    let mut traces = vec![Vec::new(); cores];
    for i in 0..total {
        // every core gets at least one request
        let core = if i < cores { i } else { rng.random_range(0..cores) };
        let row = rng.random_range(0..6u64);
        traces[core].push(MemoryRequest {
            core_id: core as u32,
            kind: if rng.random_bool(0.3) {
                AccessKind::Write
            } else {
                AccessKind::Read
            },
            address: row * 4096 + rng.random_range(0..64u64) * 64,
            compute_gap: rng.random_range(0..40),
        });
    }
    traces
}

/// Completion cycle of every request, per core, as scheduled by the engine.
pub fn engine_completions(traces: &[Vec<MemoryRequest>], sys: &SystemConfig) -> Vec<Vec<u64>> {
    let tally = engine::run_with(
        traces,
        sys,
        EngineOptions {
            record_requests: true,
            record_migrations: false,
        },
    )
    .expect("valid case");
    let mut out: Vec<Vec<u64>> = traces.iter().map(|t| vec![0; t.len()]).collect();
    for r in &tally.requests {
        out[r.core][r.index] = r.completion;
    }
    out
}

/// Completion cycles under the scheduling rules, for a single-device memory
/// with `device` timing and the given channel and bank interleaving.
pub fn reference_completions(
    traces: &[Vec<MemoryRequest>],
    device: Device,
    t: &TimingParams,
    row_size: u64,
    channels: u64,
    banks: u64,
) -> Vec<Vec<u64>> {
    let n = traces.len();
    let activation = |write: bool| match (device, write) {
        (Device::Dram, _) => t.t_act_dram,
        (Device::Pcm, false) => t.t_act_read_pcm,
        (Device::Pcm, true) => t.t_act_write_pcm,
    };
    let locate = |r: &MemoryRequest| {
        let row = r.address / row_size;
        (row % channels, (row / channels) % banks, row)
    };

    let mut cursor = vec![0usize; n];
    let mut issue_at: Vec<Option<u64>> = traces.iter().map(|t| t.first().map(|r| r.compute_gap)).collect();
    let mut done_at: Vec<Option<u64>> = vec![None; n];
    let mut pending: Vec<(usize, u64)> = Vec::new();
    let mut open: HashMap<(u64, u64), u64> = HashMap::new();
    let mut bank_free: HashMap<(u64, u64), u64> = HashMap::new();
    let mut channel_free: HashMap<u64, u64> = HashMap::new();
    let mut out: Vec<Vec<u64>> = vec![Vec::new(); n];

    let mut now = 0u64;
    loop {
        for c in 0..n {
            if done_at[c] == Some(now) {
                out[c].push(now);
                done_at[c] = None;
                cursor[c] += 1;
                issue_at[c] = traces[c].get(cursor[c]).map(|r| now + r.compute_gap);
            }
        }
        for c in 0..n {
            if issue_at[c] == Some(now) {
                pending.push((c, now));
                issue_at[c] = None;
            }
        }
        loop {
            let mut best: Option<(bool, u64, usize)> = None;
            for &(c, arrival) in &pending {
                let (ch, bank, row) = locate(&traces[c][cursor[c]]);
                if bank_free.get(&(ch, bank)).copied().unwrap_or(0) > now
                    || channel_free.get(&ch).copied().unwrap_or(0) > now
                {
                    continue;
                }
                let miss = open.get(&(ch, bank)) != Some(&row);
                let key = (miss, arrival, c);
                if best.is_none() || Some(key) < best {
                    best = Some(key);
                }
            }
            let Some((miss, _, c)) = best else { break };
            pending.retain(|&(p, _)| p != c);
            let r = &traces[c][cursor[c]];
            let (ch, bank, row) = locate(r);
            let service = t.t_row_hit
                + if miss {
                    activation(r.kind == AccessKind::Write)
                } else {
                    0
                };
            bank_free.insert((ch, bank), now + service);
            channel_free.insert(ch, now + t.t_bus);
            open.insert((ch, bank), row);
            done_at[c] = Some(now + service + t.t_bus);
        }
        if (0..n).all(|c| cursor[c] == traces[c].len()) {
            return out;
        }
        now += 1;
    }
}
