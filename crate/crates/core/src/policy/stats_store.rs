//! Per-row counters kept by the controller for recently accessed PCM rows.

use std::collections::HashMap;

/// Largest value of a 5-bit saturating counter.
pub const COUNTER_MAX: u8 = 31;
const COUNTER_BITS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchEvent {
    RowMiss,
    RowHit,
    /// Counted regardless of row buffer outcome.
    Access,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    tag: u64,
    counter: u8,
}

fn bump(counter: &mut u8, event: TouchEvent) {
    match event {
        TouchEvent::RowMiss | TouchEvent::Access => {
            *counter = counter.saturating_add(1).min(COUNTER_MAX)
        }
        TouchEvent::RowHit => {}
    }
}

/// Set-associative store with true LRU within each set.
///
/// Each set is kept in recency order, most recent first, so an entry's index
/// is its LRU position.
#[derive(Debug, Clone)]
pub struct SetAssociativeStore {
    ways: usize,
    sets: Vec<Vec<Entry>>,
}

impl SetAssociativeStore {
    pub fn new(sets: usize, ways: usize) -> Self {
        assert!(sets > 0 && ways > 0, "stats store needs at least one set and way");
        SetAssociativeStore {
            ways,
            sets: vec![Vec::with_capacity(ways); sets],
        }
    }

    fn locate(&self, row: u64) -> (usize, u64) {
        let n = self.sets.len() as u64;
        ((row % n) as usize, row / n)
    }

    pub fn touch(&mut self, row: u64, event: TouchEvent) -> u8 {
        let ways = self.ways;
        let (set, tag) = self.locate(row);
        let set = &mut self.sets[set];
        let mut entry = match set.iter().position(|e| e.tag == tag) {
            Some(i) => set.remove(i),
            None => {
                if set.len() == ways {
                    set.pop();
                }
                Entry { tag, counter: 0 }
            }
        };
        bump(&mut entry.counter, event);
        set.insert(0, entry);
        entry.counter
    }

    pub fn counter(&self, row: u64) -> Option<u8> {
        let (set, tag) = self.locate(row);
        self.sets[set]
            .iter()
            .find(|e| e.tag == tag)
            .map(|e| e.counter)
    }

    /// LRU position of `row` within its set, 0 being most recent.
    pub fn lru_position(&self, row: u64) -> Option<usize> {
        let (set, tag) = self.locate(row);
        self.sets[set].iter().position(|e| e.tag == tag)
    }

    pub fn remove(&mut self, row: u64) {
        let (set, tag) = self.locate(row);
        self.sets[set].retain(|e| e.tag != tag);
    }

    pub fn reset_counters(&mut self) {
        for e in self.sets.iter_mut().flatten() {
            e.counter = 0;
        }
    }

    pub fn rows(&self) -> Vec<u64> {
        let n = self.sets.len() as u64;
        let mut rows: Vec<u64> = self
            .sets
            .iter()
            .enumerate()
            .flat_map(|(s, set)| set.iter().map(move |e| e.tag * n + s as u64))
            .collect();
        rows.sort_unstable();
        rows
    }

    pub fn set_occupancy(&self, set: usize) -> usize {
        self.sets[set].len()
    }

    /// Total storage for the given tag width, with 5-bit counters and
    /// log2(ways)-bit LRU positions.
    pub fn storage_bits(&self, tag_bits: u64) -> u64 {
        let lru_bits = (self.ways as u64).next_power_of_two().trailing_zeros() as u64;
        let entries = (self.sets.len() * self.ways) as u64;
        entries * (tag_bits + COUNTER_BITS + lru_bits)
    }
}

/// Idealized store that never evicts.
#[derive(Debug, Clone, Default)]
pub struct UnboundedStore {
    counters: HashMap<u64, u8>,
}

impl UnboundedStore {
    pub fn touch(&mut self, row: u64, event: TouchEvent) -> u8 {
        let c = self.counters.entry(row).or_insert(0);
        bump(c, event);
        *c
    }
}

#[derive(Debug, Clone)]
pub enum StatsStore {
    SetAssociative(SetAssociativeStore),
    Unbounded(UnboundedStore),
}

impl StatsStore {
    pub fn bounded(sets: usize, ways: usize) -> Self {
        StatsStore::SetAssociative(SetAssociativeStore::new(sets, ways))
    }

    pub fn unbounded() -> Self {
        StatsStore::Unbounded(UnboundedStore::default())
    }

    /// Looks up (allocating if absent) the row's entry, applies `event` and
    /// refreshes recency. Returns the counter after the update.
    pub fn touch(&mut self, row: u64, event: TouchEvent) -> u8 {
        match self {
            StatsStore::SetAssociative(s) => s.touch(row, event),
            StatsStore::Unbounded(s) => s.touch(row, event),
        }
    }

    pub fn counter(&self, row: u64) -> Option<u8> {
        match self {
            StatsStore::SetAssociative(s) => s.counter(row),
            StatsStore::Unbounded(s) => s.counters.get(&row).copied(),
        }
    }

    pub fn remove(&mut self, row: u64) {
        match self {
            StatsStore::SetAssociative(s) => s.remove(row),
            StatsStore::Unbounded(s) => {
                s.counters.remove(&row);
            }
        }
    }

    /// Zeroes every counter; tags and recency order are kept.
    pub fn reset_counters(&mut self) {
        match self {
            StatsStore::SetAssociative(s) => s.reset_counters(),
            StatsStore::Unbounded(s) => s.counters.values_mut().for_each(|c| *c = 0),
        }
    }

    pub fn rows(&self) -> Vec<u64> {
        match self {
            StatsStore::SetAssociative(s) => s.rows(),
            StatsStore::Unbounded(s) => {
                let mut rows: Vec<u64> = s.counters.keys().copied().collect();
                rows.sort_unstable();
                rows
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn new_row_miss_starts_at_one() {
        let mut s = StatsStore::bounded(128, 16);
        assert_eq!(s.touch(42, TouchEvent::RowMiss), 1);
        assert_eq!(s.touch(42, TouchEvent::RowMiss), 2);
    }

    #[test]
    fn row_hit_leaves_counter() {
        let mut s = StatsStore::bounded(128, 16);
        s.touch(42, TouchEvent::RowMiss);
        assert_eq!(s.touch(42, TouchEvent::RowHit), 1);
        // a first-touch hit still allocates, at zero
        assert_eq!(s.touch(43, TouchEvent::RowHit), 0);
        assert_eq!(s.counter(43), Some(0));
    }

    #[test]
    fn counter_saturates() {
        let mut s = StatsStore::bounded(128, 16);
        for _ in 0..40 {
            s.touch(1, TouchEvent::Access);
        }
        assert_eq!(s.counter(1), Some(31));
        assert_eq!(s.touch(1, TouchEvent::RowMiss), 31);
    }

    #[test]
    fn reset_keeps_tags() {
        let mut s = StatsStore::bounded(128, 16);
        for _ in 0..3 {
            s.touch(1, TouchEvent::RowMiss);
        }
        for _ in 0..40 {
            s.touch(2, TouchEvent::RowMiss);
        }
        s.touch(3, TouchEvent::RowHit);
        let before = s.rows();
        s.reset_counters();
        assert_eq!(s.rows(), before);
        for r in [1, 2, 3] {
            assert_eq!(s.counter(r), Some(0));
        }
    }

    #[test]
    fn lru_eviction_within_set() {
        let mut s = SetAssociativeStore::new(4, 2);
        // rows 0, 4, 8 all map to set 0
        s.touch(0, TouchEvent::RowMiss);
        s.touch(4, TouchEvent::RowMiss);
        s.touch(0, TouchEvent::RowMiss);
        s.touch(8, TouchEvent::RowMiss);
        assert_eq!(s.counter(4), None);
        assert_eq!(s.counter(0), Some(2));
        assert_eq!(s.lru_position(8), Some(0));
        assert_eq!(s.lru_position(0), Some(1));
    }

    #[test]
    fn default_geometry_occupies_9_25_kib() {
        let s = SetAssociativeStore::new(128, 16);
        // 28-bit tags + 5-bit counter + 4-bit LRU position = 37 bits per entry
        assert_eq!(s.storage_bits(28), 9 * 8192 + 2048);
        assert_eq!(s.storage_bits(28) as f64 / 8.0 / 1024.0, 9.25);
    }

    proptest! {
        #[test]
        fn store_invariants(ops in proptest::collection::vec((0u64..512, 0u8..3), 0..600)) {
            let mut s = SetAssociativeStore::new(8, 4);
            let mut u = UnboundedStore::default();
            for (row, ev) in ops {
                let ev = [TouchEvent::RowMiss, TouchEvent::RowHit, TouchEvent::Access][ev as usize];
                let c = s.touch(row, ev);
                prop_assert!(c <= COUNTER_MAX);
                prop_assert_eq!(s.lru_position(row), Some(0));
                // bounded counters never exceed the unbounded reference
                let cu = u.touch(row, ev);
                prop_assert!(c <= cu);
                for set in 0..8 {
                    prop_assert!(s.set_occupancy(set) <= 4);
                    let positions: Vec<usize> = s.sets[set]
                        .iter()
                        .map(|e| s.lru_position(e.tag * 8 + set as u64).unwrap())
                        .collect();
                    let expect: Vec<usize> = (0..positions.len()).collect();
                    prop_assert_eq!(positions, expect);
                }
            }
        }
    }
}
