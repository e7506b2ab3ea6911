use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A row pushed out of the DRAM cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eviction {
    pub pcm_row: u64,
    pub slot: u64,
    pub dirty: bool,
}

#[derive(Debug, Clone, Copy)]
struct SlotEntry {
    pcm_row: u64,
    dirty: bool,
    stamp: u64,
}

/// Fully associative DRAM cache directory with LRU replacement.
///
/// `forward` maps PCM row ids to DRAM slots and `slots` holds the reverse
/// direction; every slot is either occupied or on the free list.
#[derive(Debug, Clone)]
pub struct RemapTable {
    forward: HashMap<u64, u64>,
    slots: Vec<Option<SlotEntry>>,
    free: BTreeSet<u64>,
    lru: BTreeMap<u64, u64>,
    clock: u64,
}

impl RemapTable {
    pub fn new(dram_rows: u64) -> Self {
        RemapTable {
            forward: HashMap::new(),
            slots: vec![None; dram_rows as usize],
            free: (0..dram_rows).collect(),
            lru: BTreeMap::new(),
            clock: 0,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn occupied(&self) -> u64 {
        self.forward.len() as u64
    }

    pub fn lookup(&self, pcm_row: u64) -> Option<u64> {
        self.forward.get(&pcm_row).copied()
    }

    pub fn contains(&self, pcm_row: u64) -> bool {
        self.forward.contains_key(&pcm_row)
    }

    pub fn is_dirty(&self, pcm_row: u64) -> Option<bool> {
        let slot = self.lookup(pcm_row)?;
        self.slots[slot as usize].map(|e| e.dirty)
    }

    /// Records a demand access to a cached row, refreshing its recency.
    pub fn touch(&mut self, slot: u64, write: bool) {
        let stamp = self.tick();
        let entry = self.slots[slot as usize]
            .as_mut()
            .expect("touched an empty DRAM slot");
        self.lru.remove(&entry.stamp);
        entry.stamp = stamp;
        entry.dirty |= write;
        self.lru.insert(stamp, slot);
    }

    /// Least recently used occupied slot.
    pub fn lru_victim(&self) -> Option<Eviction> {
        let (_, &slot) = self.lru.iter().next()?;
        let e = self.slots[slot as usize].expect("LRU list names an empty slot");
        Some(Eviction {
            pcm_row: e.pcm_row,
            slot,
            dirty: e.dirty,
        })
    }

    /// Places `pcm_row` in a free slot, evicting the LRU row first when full.
    ///
    /// Panics if the row is already cached or the table has no capacity.
    pub fn insert(&mut self, pcm_row: u64) -> (u64, Option<Eviction>) {
        assert!(
            !self.forward.contains_key(&pcm_row),
            "row {pcm_row} is already cached in DRAM"
        );
        assert!(self.capacity() > 0, "DRAM cache has no capacity");
        let victim = if self.free.is_empty() {
            let v = self.lru_victim().expect("full cache has an LRU entry");
            self.evict(v.pcm_row);
            Some(v)
        } else {
            None
        };
        let slot = self.free.pop_first().expect("a slot was freed");
        let stamp = self.tick();
        self.slots[slot as usize] = Some(SlotEntry {
            pcm_row,
            dirty: false,
            stamp,
        });
        self.lru.insert(stamp, slot);
        self.forward.insert(pcm_row, slot);
        (slot, victim)
    }

    pub fn evict(&mut self, pcm_row: u64) -> Option<Eviction> {
        let slot = self.forward.remove(&pcm_row)?;
        let e = self.slots[slot as usize]
            .take()
            .expect("forward map names an empty slot");
        self.lru.remove(&e.stamp);
        self.free.insert(slot);
        Some(Eviction {
            pcm_row,
            slot,
            dirty: e.dirty,
        })
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Checks that the forward and reverse maps agree and every slot is accounted for.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut occupied = 0u64;
        for (slot, entry) in self.slots.iter().enumerate() {
            let slot = slot as u64;
            match entry {
                Some(e) => {
                    occupied += 1;
                    if self.forward.get(&e.pcm_row) != Some(&slot) {
                        return Err(format!("slot {slot} not mirrored in forward map"));
                    }
                    if self.free.contains(&slot) {
                        return Err(format!("occupied slot {slot} on free list"));
                    }
                    if self.lru.get(&e.stamp) != Some(&slot) {
                        return Err(format!("slot {slot} missing from LRU order"));
                    }
                }
                None => {
                    if !self.free.contains(&slot) {
                        return Err(format!("empty slot {slot} missing from free list"));
                    }
                }
            }
        }
        if occupied != self.forward.len() as u64 || occupied != self.lru.len() as u64 {
            return Err("occupancy counts disagree".into());
        }
        if occupied + self.free.len() as u64 != self.capacity() {
            return Err("occupied + free != capacity".into());
        }
        Ok(())
    }
}
