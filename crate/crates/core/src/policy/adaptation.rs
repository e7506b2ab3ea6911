//! Interval cost/benefit accounting and hill-climbing of the caching threshold.

use serde::{Deserialize, Serialize};

use crate::device::TimingParams;
use crate::trace::AccessKind;
use crate::device::Device;

/// Channel cycles spent moving rows.
pub fn compute_cost(num_migrations: u64, t_migration: u64) -> u64 {
    num_migrations * t_migration
}

/// Cycles saved by serving reads and writes from DRAM instead of PCM, using
/// row buffer miss latencies of both devices.
pub fn compute_benefit(reads_dram: u64, writes_dram: u64, t: &TimingParams) -> u64 {
    let read_delta = t.miss_latency(Device::Pcm, AccessKind::Read)
        - t.miss_latency(Device::Dram, AccessKind::Read);
    let write_delta = t.miss_latency(Device::Pcm, AccessKind::Write)
        - t.miss_latency(Device::Dram, AccessKind::Write);
    reads_dram * read_delta + writes_dram * write_delta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClimbDirection {
    Up,
    Down,
}

impl ClimbDirection {
    fn reversed(self) -> Self {
        match self {
            ClimbDirection::Up => ClimbDirection::Down,
            ClimbDirection::Down => ClimbDirection::Up,
        }
    }
}

/// Counts gathered over one adaptation interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntervalCounters {
    pub migrations: u64,
    pub reads_dram: u64,
    pub writes_dram: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyState {
    pub miss_thresh: u32,
    pub direction: ClimbDirection,
    pub prev_net_benefit: i64,
    pub counters: IntervalCounters,
    pub thresh_min: u32,
    pub thresh_max: u32,
}

impl PolicyState {
    pub fn new(miss_thresh: u32, thresh_min: u32, thresh_max: u32) -> Self {
        PolicyState {
            miss_thresh: miss_thresh.clamp(thresh_min, thresh_max),
            direction: ClimbDirection::Up,
            prev_net_benefit: 0,
            counters: IntervalCounters::default(),
            thresh_min,
            thresh_max,
        }
    }
}

/// One hill-climbing step: keep climbing while net benefit improves, turn
/// around otherwise, then move the threshold by one within its bounds.
pub fn adjust_threshold(state: &PolicyState, net_benefit: i64) -> PolicyState {
    let direction = if net_benefit > state.prev_net_benefit {
        state.direction
    } else {
        state.direction.reversed()
    };
    let miss_thresh = match direction {
        ClimbDirection::Up => state.miss_thresh.saturating_add(1),
        ClimbDirection::Down => state.miss_thresh.saturating_sub(1),
    }
    .clamp(state.thresh_min, state.thresh_max);
    PolicyState {
        miss_thresh,
        direction,
        prev_net_benefit: net_benefit,
        counters: IntervalCounters::default(),
        ..*state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(thresh: u32, direction: ClimbDirection, prev: i64) -> PolicyState {
        PolicyState {
            miss_thresh: thresh,
            direction,
            prev_net_benefit: prev,
            counters: IntervalCounters {
                migrations: 3,
                reads_dram: 10,
                writes_dram: 1,
            },
            thresh_min: 1,
            thresh_max: 31,
        }
    }

    #[test]
    fn cost_examples() {
        assert_eq!(compute_cost(4, 1000), 4000);
        assert_eq!(compute_cost(0, 12345), 0);
        assert_eq!(compute_cost(1, 800), 800);
    }

    #[test]
    fn benefit_examples() {
        // read delta 130, write delta 460
        let t = TimingParams {
            t_act_dram: 40,
            t_act_read_pcm: 170,
            t_act_write_pcm: 500,
            ..TimingParams::default()
        };
        assert_eq!(compute_benefit(10, 2, &t), 2220);
        assert_eq!(compute_benefit(0, 0, &t), 0);
        assert!(compute_benefit(0, 1, &t) > compute_benefit(1, 0, &t));
    }

    #[test]
    fn improving_net_benefit_keeps_direction() {
        let next = adjust_threshold(&state(2, ClimbDirection::Up, 100), 150);
        assert_eq!(next.miss_thresh, 3);
        assert_eq!(next.direction, ClimbDirection::Up);
        assert_eq!(next.prev_net_benefit, 150);
        assert_eq!(next.counters, IntervalCounters::default());
    }

    #[test]
    fn worse_net_benefit_reverses() {
        let next = adjust_threshold(&state(3, ClimbDirection::Up, 150), 90);
        assert_eq!(next.miss_thresh, 2);
        assert_eq!(next.direction, ClimbDirection::Down);
        assert_eq!(next.prev_net_benefit, 90);
    }

    #[test]
    fn equal_net_benefit_reverses() {
        let next = adjust_threshold(&state(3, ClimbDirection::Up, 150), 150);
        assert_eq!(next.direction, ClimbDirection::Down);
    }

    #[test]
    fn clamps_at_bounds() {
        let next = adjust_threshold(&state(1, ClimbDirection::Down, 0), 10);
        assert_eq!(next.miss_thresh, 1);
        assert_eq!(next.direction, ClimbDirection::Down);
        let next = adjust_threshold(&state(31, ClimbDirection::Up, 0), 10);
        assert_eq!(next.miss_thresh, 31);
    }

    #[test]
    fn constant_net_benefit_oscillates_with_period_two() {
        let mut s = PolicyState::new(2, 1, 31);
        let mut seen = Vec::new();
        for _ in 0..10 {
            s = adjust_threshold(&s, 500);
            seen.push(s.miss_thresh);
        }
        // first step climbs (500 > 0), then the walk flips every interval
        assert_eq!(&seen[..4], &[3, 2, 3, 2]);
    }

    proptest! {
        #[test]
        fn threshold_stays_in_bounds(nets in proptest::collection::vec(-10_000i64..10_000, 0..100), init in 1u32..=31) {
            let mut s = PolicyState::new(init, 1, 31);
            for n in nets {
                let next = adjust_threshold(&s, n);
                prop_assert!((1..=31).contains(&next.miss_thresh));
                prop_assert!(next.miss_thresh.abs_diff(s.miss_thresh) <= 1);
                s = next;
            }
        }
    }
}
