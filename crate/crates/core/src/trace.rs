//! Memory request traces: the text format, a seeded synthetic generator with
//! controllable row buffer locality, and an offline per-row locality profile.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::Topology;
use crate::device::BankState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessKind {
    Read,
    Write,
}

/// One memory request from a core, preceded by `compute_gap` cycles of
/// non-memory work on that core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoryRequest {
    pub core_id: u32,
    pub kind: AccessKind,
    pub address: u64,
    pub compute_gap: u64,
}

impl fmt::Display for MemoryRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            AccessKind::Read => 'R',
            AccessKind::Write => 'W',
        };
        write!(
            f,
            "{} {} {} {:#X}",
            self.core_id, self.compute_gap, kind, self.address
        )
    }
}

/// Parses `<core_id> <compute_gap> <R|W> <hex address>` with single-space separators.
pub fn parse_trace_line(line: &str, line_no: usize) -> Result<MemoryRequest> {
    let err = |field: &'static str, reason: String| Error::Parse {
        line: line_no,
        field,
        reason,
    };
    let mut fields = line.split(' ');
    let mut next = |field: &'static str| {
        fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| err(field, "missing or empty field".into()))
    };

    let core = next("core_id")?;
    let gap = next("compute_gap")?;
    let kind = next("kind")?;
    let address = next("address")?;
    if fields.next().is_some() {
        return Err(err("line", "more than four fields".into()));
    }

    let core_id = parse_decimal(core).map_err(|r| err("core_id", r))?;
    let core_id = u32::try_from(core_id).map_err(|_| err("core_id", "out of range".into()))?;
    let compute_gap = parse_decimal(gap).map_err(|r| err("compute_gap", r))?;
    let kind = match kind {
        "R" => AccessKind::Read,
        "W" => AccessKind::Write,
        other => return Err(err("kind", format!("expected R or W, got {other:?}"))),
    };
    let digits = address
        .strip_prefix("0x")
        .ok_or_else(|| err("address", "missing 0x prefix".into()))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(err("address", format!("not a hex number: {address:?}")));
    }
    let address =
        u64::from_str_radix(digits, 16).map_err(|e| err("address", e.to_string()))?;

    Ok(MemoryRequest {
        core_id,
        kind,
        address,
        compute_gap,
    })
}

fn parse_decimal(s: &str) -> std::result::Result<u64, String> {
    if s.starts_with('-') {
        return Err(format!("negative value {s}"));
    }
    if !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("not a decimal integer: {s:?}"));
    }
    s.parse::<u64>().map_err(|e| e.to_string())
}

/// Parses a whole trace file. Lines starting with `#` and empty lines are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<MemoryRequest>> {
    text.split('\n')
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| parse_trace_line(l, i + 1))
        .collect()
}

/// Serializes requests in the text trace format, one per LF-terminated line.
pub fn write_trace<'a>(requests: impl IntoIterator<Item = &'a MemoryRequest>) -> String {
    let mut out = String::new();
    for r in requests {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Groups a merged trace into per-core sequences, preserving order.
pub fn split_by_core(requests: &[MemoryRequest], cores: u32) -> Result<Vec<Vec<MemoryRequest>>> {
    let mut per_core = vec![Vec::new(); cores as usize];
    for r in requests {
        let slot = per_core.get_mut(r.core_id as usize).ok_or_else(|| {
            Error::validation(
                "trace.core_id",
                format!("core {} but only {cores} cores configured", r.core_id),
            )
        })?;
        slot.push(*r);
    }
    Ok(per_core)
}

/// Knobs of the synthetic workload.
///
/// Every row receives `reuse_factor` accesses per pass. Low-RBL rows are
/// visited round-robin within a group of `active_rows` rows mapped to one bank,
/// so every visit finds a different row open (a filler row in the same bank is
/// interleaved when the group has a single row). High-RBL rows are accessed in
/// runs of `hits_per_activation` consecutive columns. Cores are dealt
/// round-robin into groups of `cores_per_bank`; each group owns a disjoint
/// subset of banks, split between the two classes. Rows are never shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub cores: u32,
    /// Cores sharing each bank; 1 gives every core private banks.
    pub cores_per_bank: u32,
    pub num_rows_low_rbl: u64,
    pub num_rows_high_rbl: u64,
    pub hits_per_activation: u64,
    pub reuse_factor: u64,
    /// Rows of one class visited concurrently by a core.
    pub active_rows: u64,
    pub write_fraction: f64,
    pub requests_per_core: u64,
    pub gap_min: u64,
    pub gap_max: u64,
    /// Number of distinct banks; rows congruent modulo this share a bank.
    pub banks: u64,
    pub row_size: u64,
    pub line_size: u64,
    pub rng_seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.write_fraction) {
            return Err(Error::validation(
                "trace.synthetic.write_fraction",
                format!("{} is outside [0, 1]", self.write_fraction),
            ));
        }
        for (field, v) in [
            ("engine.cores", self.cores as u64),
            ("trace.synthetic.cores_per_bank", self.cores_per_bank as u64),
            ("trace.synthetic.hits_per_activation", self.hits_per_activation),
            ("trace.synthetic.reuse_factor", self.reuse_factor),
            ("trace.synthetic.active_rows", self.active_rows),
            ("trace.synthetic.banks", self.banks),
            ("trace.synthetic.row_size", self.row_size),
            ("trace.synthetic.line_size", self.line_size),
        ] {
            if v == 0 {
                return Err(Error::validation(field, "must be at least 1"));
            }
        }
        if self.gap_min > self.gap_max {
            return Err(Error::validation("trace.synthetic.gap_min", "exceeds gap_max"));
        }
        if self.line_size > self.row_size {
            return Err(Error::validation("trace.synthetic.line_size", "exceeds row_size"));
        }
        Ok(())
    }

    fn lines_per_row(&self) -> u64 {
        self.row_size / self.line_size
    }
}

/// One scheduling unit of a stream: a single access or an uninterrupted run.
#[derive(Debug, Clone, Copy)]
struct Burst {
    row: u64,
    first_line: u64,
    len: u64,
}

/// Allocates distinct row ids within chosen banks for one core.
struct RowAllocator {
    banks: u64,
    cores: u64,
    core: u64,
    next: HashMap<u64, u64>,
}

impl RowAllocator {
    fn row_in_bank(&mut self, bank: u64) -> u64 {
        let k = self.next.entry(bank).or_insert(0);
        let row = bank + self.banks * (*k * self.cores + self.core);
        *k += 1;
        row
    }
}

/// Per-pass access pattern of one locality class.
fn build_class(
    spec: &SyntheticSpec,
    alloc: &mut RowAllocator,
    banks: &[u64],
    rows: u64,
    high_rbl: bool,
) -> Vec<Burst> {
    let mut out = Vec::new();
    if rows == 0 {
        return out;
    }
    let lines = spec.lines_per_row();
    let groups = rows.div_ceil(spec.active_rows);
    let mut fillers: HashMap<u64, u64> = HashMap::new();
    let mut remaining = rows;
    for g in 0..groups {
        let bank = banks[(g as usize) % banks.len()];
        let size = remaining.min(spec.active_rows);
        remaining -= size;
        let group: Vec<u64> = (0..size).map(|_| alloc.row_in_bank(bank)).collect();
        if high_rbl {
            let runs = spec.reuse_factor.div_ceil(spec.hits_per_activation);
            for run in 0..runs {
                let done = run * spec.hits_per_activation;
                let len = spec.hits_per_activation.min(spec.reuse_factor - done);
                for &row in &group {
                    out.push(Burst {
                        row,
                        first_line: done % lines,
                        len,
                    });
                }
            }
        } else {
            let filler = (group.len() == 1)
                .then(|| *fillers.entry(bank).or_insert_with(|| alloc.row_in_bank(bank)));
            for visit in 0..spec.reuse_factor {
                for &row in &group {
                    out.push(Burst {
                        row,
                        first_line: visit % lines,
                        len: 1,
                    });
                    if let Some(f) = filler {
                        out.push(Burst {
                            row: f,
                            first_line: visit % lines,
                            len: 1,
                        });
                    }
                }
            }
        }
    }
    out
}

fn core_seed(seed: u64, core: u32) -> u64 {
    seed ^ (core as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Generates one request sequence per core, deterministic in `spec.rng_seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<Vec<MemoryRequest>>> {
    spec.validate()?;
    if spec.num_rows_low_rbl == 0 && spec.num_rows_high_rbl == 0 {
        return Err(Error::EmptyTrace);
    }
    (0..spec.cores).map(|c| generate_core(spec, c)).collect()
}

fn generate_core(spec: &SyntheticSpec, core: u32) -> Result<Vec<MemoryRequest>> {
    let groups = spec.cores.div_ceil(spec.cores_per_bank) as u64;
    let owned: Vec<u64> = if spec.banks >= groups {
        (0..spec.banks)
            .filter(|b| b % groups == core as u64 % groups)
            .collect()
    } else {
        (0..spec.banks).collect()
    };
    let split = owned.len().div_ceil(2);
    let (low_banks, high_banks) = if owned.len() >= 2 {
        (&owned[..split], &owned[split..])
    } else {
        (&owned[..], &owned[..])
    };

    let mut alloc = RowAllocator {
        banks: spec.banks,
        cores: spec.cores as u64,
        core: core as u64,
        next: HashMap::new(),
    };
    let low = build_class(spec, &mut alloc, low_banks, spec.num_rows_low_rbl, false);
    let high = build_class(spec, &mut alloc, high_banks, spec.num_rows_high_rbl, true);

    let low_accesses: u64 = low.iter().map(|b| b.len).sum();
    let high_accesses: u64 = high.iter().map(|b| b.len).sum();
    // Pick a unit from the low stream with probability p so that the expected
    // access share of each class matches its per-pass volume.
    let p_low = if high.is_empty() {
        1.0
    } else if low.is_empty() {
        0.0
    } else {
        let mean_low = low_accesses as f64 / low.len() as f64;
        let mean_high = high_accesses as f64 / high.len() as f64;
        let (a, b) = (low_accesses as f64, high_accesses as f64);
        a * mean_high / (a * mean_high + b * mean_low)
    };

    let max_address = u64::MAX / spec.row_size;
    let mut rng = ChaCha8Rng::seed_from_u64(core_seed(spec.rng_seed, core));
    let mut out = Vec::with_capacity(spec.requests_per_core as usize);
    let (mut li, mut hi) = (0usize, 0usize);
    while (out.len() as u64) < spec.requests_per_core {
        let take_low = rng.random_bool(p_low);
        let burst = if take_low {
            let b = low[li % low.len()];
            li += 1;
            b
        } else {
            let b = high[hi % high.len()];
            hi += 1;
            b
        };
        if burst.row >= max_address {
            return Err(Error::validation("trace.synthetic", "row id overflows address space"));
        }
        let lines = spec.lines_per_row();
        for k in 0..burst.len {
            if out.len() as u64 == spec.requests_per_core {
                break;
            }
            let line = (burst.first_line + k) % lines;
            let kind = if rng.random_bool(spec.write_fraction) {
                AccessKind::Write
            } else {
                AccessKind::Read
            };
            out.push(MemoryRequest {
                core_id: core,
                kind,
                address: burst.row * spec.row_size + line * spec.line_size,
                compute_gap: rng.random_range(spec.gap_min..=spec.gap_max),
            });
        }
    }
    Ok(out)
}

/// Exact access and row-miss counts of one row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RowProfile {
    pub accesses: u64,
    pub row_misses: u64,
}

/// Replays `trace` in order, single-issue, against closed PCM banks and counts
/// accesses and row buffer misses per row. Unbounded tracking.
pub fn trace_rbl_profile(
    trace: &[MemoryRequest],
    topology: &Topology,
) -> BTreeMap<u64, RowProfile> {
    let mut banks: HashMap<(u32, u32), BankState> = HashMap::new();
    let mut profile: BTreeMap<u64, RowProfile> = BTreeMap::new();
    for r in trace {
        let row = r.address / topology.row_size;
        let id = topology.pcm_bank(row);
        let outcome = banks.entry((id.channel, id.bank)).or_default().access(row);
        let p = profile.entry(row).or_default();
        p.accesses += 1;
        if outcome == crate::device::RowOutcome::Miss {
            p.row_misses += 1;
        }
    }
    profile
}
