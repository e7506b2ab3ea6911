//! Data placement policies deciding which PCM rows to cache in DRAM.
//!
//! FREQ counts every access to a PCM row; RBLA counts only row buffer misses,
//! so rows that mostly hit in the PCM row buffer stay in PCM. The `-Dyn`
//! variants retune the threshold every interval by hill climbing on the
//! estimated net benefit of migrations.

mod adaptation;
mod stats_store;

pub use adaptation::{
    adjust_threshold, compute_benefit, compute_cost, ClimbDirection, IntervalCounters,
    PolicyState,
};
pub use stats_store::{SetAssociativeStore, StatsStore, TouchEvent, UnboundedStore, COUNTER_MAX};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::device::{Device, RowOutcome, TimingParams};
use crate::error::{Error, Result};
use crate::trace::AccessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Freq,
    FreqDyn,
    Rbla,
    RblaDyn,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Freq,
        PolicyKind::FreqDyn,
        PolicyKind::Rbla,
        PolicyKind::RblaDyn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Freq => "freq",
            PolicyKind::FreqDyn => "freq-dyn",
            PolicyKind::Rbla => "rbla",
            PolicyKind::RblaDyn => "rbla-dyn",
        }
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, PolicyKind::FreqDyn | PolicyKind::RblaDyn)
    }

    pub fn counts_misses_only(self) -> bool {
        matches!(self, PolicyKind::Rbla | PolicyKind::RblaDyn)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::validation(
                    "policy.policy",
                    format!("unknown policy {s:?}; expected freq, freq-dyn, rbla or rbla-dyn"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreKind {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub policy: PolicyKind,
    /// Initial (or, for static policies, fixed) caching threshold.
    pub miss_thresh: u32,
    pub thresh_min: u32,
    pub thresh_max: u32,
    pub stats_store: StoreKind,
    pub stats_sets: usize,
    pub stats_ways: usize,
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresh_min == 0 {
            return Err(Error::validation("policy.thresh_min", "must be at least 1"));
        }
        if self.thresh_max < self.thresh_min || self.thresh_max > COUNTER_MAX as u32 {
            return Err(Error::validation(
                "policy.thresh_max",
                format!("must lie in [thresh_min, {COUNTER_MAX}]"),
            ));
        }
        if !(self.thresh_min..=self.thresh_max).contains(&self.miss_thresh) {
            return Err(Error::validation(
                "policy.miss_thresh",
                format!(
                    "{} is outside [{}, {}]",
                    self.miss_thresh, self.thresh_min, self.thresh_max
                ),
            ));
        }
        if self.stats_sets == 0 || self.stats_ways == 0 {
            return Err(Error::validation(
                "policy.stats_sets",
                "stats store geometry must be non-empty",
            ));
        }
        Ok(())
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            policy: PolicyKind::RblaDyn,
            miss_thresh: 2,
            thresh_min: 1,
            thresh_max: COUNTER_MAX as u32,
            stats_store: StoreKind::Bounded,
            stats_sets: 128,
            stats_ways: 16,
        }
    }
}

/// Strictly exceeding the threshold triggers caching.
pub fn should_cache(counter: u8, thresh: u32) -> bool {
    counter as u32 > thresh
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    None,
    CacheRow,
}

/// Accounting for one closed adaptation interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalOutcome {
    pub counters: IntervalCounters,
    pub cost: u64,
    pub benefit: u64,
    pub net_benefit: i64,
    pub thresh_before: u32,
    pub thresh_after: u32,
}

#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    store: StatsStore,
    state: PolicyState,
}

impl Policy {
    pub fn new(config: &PolicyConfig) -> Self {
        let store = match config.stats_store {
            StoreKind::Bounded => StatsStore::bounded(config.stats_sets, config.stats_ways),
            StoreKind::Unbounded => StatsStore::unbounded(),
        };
        Policy {
            kind: config.policy,
            store,
            state: PolicyState::new(config.miss_thresh, config.thresh_min, config.thresh_max),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn store(&self) -> &StatsStore {
        &self.store
    }

    /// Feeds one demand access. PCM accesses update the stats store and may
    /// trigger caching; DRAM accesses (all to rows this policy migrated)
    /// accumulate the interval's benefit counters.
    pub fn on_memory_access(
        &mut self,
        row: u64,
        device: Device,
        kind: AccessKind,
        outcome: RowOutcome,
    ) -> Decision {
        match device {
            Device::Dram => {
                match kind {
                    AccessKind::Read => self.state.counters.reads_dram += 1,
                    AccessKind::Write => self.state.counters.writes_dram += 1,
                }
                Decision::None
            }
            Device::Pcm => {
                let event = match (self.kind.counts_misses_only(), outcome) {
                    (false, _) => TouchEvent::Access,
                    (true, RowOutcome::Miss) => TouchEvent::RowMiss,
                    (true, RowOutcome::Hit) => TouchEvent::RowHit,
                };
                let counter = self.store.touch(row, event);
                if should_cache(counter, self.state.miss_thresh) {
                    // statistics of a cached row are stale
                    self.store.remove(row);
                    Decision::CacheRow
                } else {
                    Decision::None
                }
            }
        }
    }

    pub fn record_migrations(&mut self, rows_moved: u64) {
        self.state.counters.migrations += rows_moved;
    }

    /// Closes the interval: resets the stats store counters and, for dynamic
    /// policies, takes one hill-climbing step.
    pub fn end_interval(&mut self, timing: &TimingParams) -> IntervalOutcome {
        let counters = self.state.counters;
        let cost = compute_cost(counters.migrations, timing.t_migration);
        let benefit = compute_benefit(counters.reads_dram, counters.writes_dram, timing);
        let net_benefit = benefit as i64 - cost as i64;
        let thresh_before = self.state.miss_thresh;
        self.store.reset_counters();
        if self.kind.is_dynamic() {
            self.state = adjust_threshold(&self.state, net_benefit);
        } else {
            self.state.counters = IntervalCounters::default();
        }
        IntervalOutcome {
            counters,
            cost,
            benefit,
            net_benefit,
            thresh_before,
            thresh_after: self.state.miss_thresh,
        }
    }
}
