//! DRAM and PCM bank models.
//!
//! Both technologies are organized as banks with a single row buffer. A row
//! buffer hit costs the same column access on either device; a miss pays the
//! device- and direction-specific array activation on top of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::AccessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    Dram,
    Pcm,
}

impl Device {
    pub fn name(self) -> &'static str {
        match self {
            Device::Dram => "dram",
            Device::Pcm => "pcm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowOutcome {
    Hit,
    Miss,
}

/// Latency parameters, in memory-controller cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingParams {
    /// Column access on an open row, identical for both devices.
    pub t_row_hit: u64,
    pub t_act_dram: u64,
    pub t_act_read_pcm: u64,
    /// Array cost of a PCM row buffer miss on the write path.
    pub t_act_write_pcm: u64,
    /// Channel occupancy of one cache-line transfer.
    pub t_bus: u64,
    /// Channel occupancy of moving one full row between devices.
    pub t_migration: u64,
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_row_hit == 0 {
            return Err(Error::validation("timing.t_row_hit", "must be positive"));
        }
        if self.t_act_read_pcm <= self.t_act_dram {
            return Err(Error::validation(
                "timing.t_act_read_pcm",
                format!(
                    "must exceed t_act_dram ({} <= {})",
                    self.t_act_read_pcm, self.t_act_dram
                ),
            ));
        }
        if self.t_act_write_pcm < self.t_act_read_pcm {
            return Err(Error::validation(
                "timing.t_act_write_pcm",
                format!(
                    "must be at least t_act_read_pcm ({} < {})",
                    self.t_act_write_pcm, self.t_act_read_pcm
                ),
            ));
        }
        if self.t_migration == 0 {
            return Err(Error::validation("timing.t_migration", "must be positive"));
        }
        Ok(())
    }

    /// Array activation paid on a row buffer miss.
    pub fn activation(&self, device: Device, kind: AccessKind) -> u64 {
        match (device, kind) {
            (Device::Dram, _) => self.t_act_dram,
            (Device::Pcm, AccessKind::Read) => self.t_act_read_pcm,
            (Device::Pcm, AccessKind::Write) => self.t_act_write_pcm,
        }
    }

    /// Full latency of a row buffer miss (`t_read,dram`, `t_write,pcm`, ...).
    pub fn miss_latency(&self, device: Device, kind: AccessKind) -> u64 {
        self.activation(device, kind) + self.t_row_hit
    }
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            t_row_hit: 15,
            t_act_dram: 40,
            t_act_read_pcm: 170,
            t_act_write_pcm: 500,
            t_bus: 4,
            t_migration: 800,
        }
    }
}

/// Energy parameters in abstract integer units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub e_row_hit: u64,
    pub e_act_dram: u64,
    pub e_act_read_pcm: u64,
    pub e_act_write_pcm: u64,
    /// Background energy per cycle while the device is present.
    pub e_static_dram: u64,
    pub e_static_pcm: u64,
    pub e_migration: u64,
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        if self.e_act_read_pcm <= self.e_act_dram {
            return Err(Error::validation(
                "energy.e_act_read_pcm",
                "must exceed e_act_dram",
            ));
        }
        if self.e_act_write_pcm < self.e_act_read_pcm {
            return Err(Error::validation(
                "energy.e_act_write_pcm",
                "must be at least e_act_read_pcm",
            ));
        }
        Ok(())
    }

    pub fn activation(&self, device: Device, kind: AccessKind) -> u64 {
        match (device, kind) {
            (Device::Dram, _) => self.e_act_dram,
            (Device::Pcm, AccessKind::Read) => self.e_act_read_pcm,
            (Device::Pcm, AccessKind::Write) => self.e_act_write_pcm,
        }
    }

    pub fn static_per_cycle(&self, device: Device) -> u64 {
        match device {
            Device::Dram => self.e_static_dram,
            Device::Pcm => self.e_static_pcm,
        }
    }
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            e_row_hit: 4,
            e_act_dram: 20,
            e_act_read_pcm: 60,
            e_act_write_pcm: 200,
            e_static_dram: 1,
            e_static_pcm: 1,
            e_migration: 600,
        }
    }
}

/// Open-row register and occupancy of one bank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BankState {
    pub open_row: Option<u64>,
    pub busy_until: u64,
}

impl BankState {
    /// Latches `row` into the row buffer and reports whether it was already there.
    pub fn access(&mut self, row: u64) -> RowOutcome {
        let outcome = if self.open_row == Some(row) {
            RowOutcome::Hit
        } else {
            RowOutcome::Miss
        };
        self.open_row = Some(row);
        outcome
    }

    /// Marks the bank busy until `cycle`; occupancy never moves backwards.
    pub fn occupy_until(&mut self, cycle: u64) {
        self.busy_until = self.busy_until.max(cycle);
    }

    pub fn is_idle(&self, cycle: u64) -> bool {
        self.busy_until <= cycle
    }
}

/// Pure form of [`BankState::access`].
pub fn bank_access(state: BankState, row: u64) -> (RowOutcome, BankState) {
    let mut next = state;
    let outcome = next.access(row);
    (outcome, next)
}

pub fn access_latency(
    device: Device,
    kind: AccessKind,
    outcome: RowOutcome,
    t: &TimingParams,
) -> u64 {
    match outcome {
        RowOutcome::Hit => t.t_row_hit,
        RowOutcome::Miss => t.miss_latency(device, kind),
    }
}

pub fn access_energy(
    device: Device,
    kind: AccessKind,
    outcome: RowOutcome,
    e: &EnergyParams,
) -> u64 {
    match outcome {
        RowOutcome::Hit => e.e_row_hit,
        RowOutcome::Miss => e.activation(device, kind) + e.e_row_hit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KINDS: [AccessKind; 2] = [AccessKind::Read, AccessKind::Write];

    #[test]
    fn hit_keeps_row_open() {
        let s = BankState {
            open_row: Some(5),
            busy_until: 0,
        };
        let (o, s) = bank_access(s, 5);
        assert_eq!(o, RowOutcome::Hit);
        assert_eq!(s.open_row, Some(5));
    }

    #[test]
    fn miss_replaces_open_row() {
        let s = BankState {
            open_row: Some(5),
            busy_until: 0,
        };
        let (o, s) = bank_access(s, 7);
        assert_eq!(o, RowOutcome::Miss);
        assert_eq!(s.open_row, Some(7));

        let (o, s) = bank_access(BankState::default(), 7);
        assert_eq!(o, RowOutcome::Miss);
        assert_eq!(s.open_row, Some(7));
    }

    #[test]
    fn latency_examples() {
        let t = TimingParams::default();
        assert_eq!(
            access_latency(Device::Dram, AccessKind::Read, RowOutcome::Hit, &t),
            t.t_row_hit
        );
        assert_eq!(
            access_latency(Device::Pcm, AccessKind::Read, RowOutcome::Hit, &t),
            t.t_row_hit
        );
        let t = TimingParams {
            t_act_read_pcm: 200,
            t_row_hit: 10,
            ..TimingParams::default()
        };
        assert_eq!(
            access_latency(Device::Pcm, AccessKind::Read, RowOutcome::Miss, &t),
            210
        );
    }

    #[test]
    fn energy_examples() {
        let e = EnergyParams::default();
        assert_eq!(
            access_energy(Device::Dram, AccessKind::Read, RowOutcome::Hit, &e),
            access_energy(Device::Pcm, AccessKind::Write, RowOutcome::Hit, &e)
        );
        let e = EnergyParams {
            e_act_write_pcm: 50,
            e_row_hit: 2,
            ..EnergyParams::default()
        };
        assert_eq!(
            access_energy(Device::Pcm, AccessKind::Write, RowOutcome::Miss, &e),
            52
        );
    }

    #[test]
    fn default_params_are_valid() {
        TimingParams::default().validate().unwrap();
        EnergyParams::default().validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let t = TimingParams {
            t_act_read_pcm: 30,
            ..TimingParams::default()
        };
        let err = t.validate().unwrap_err().to_string();
        assert!(err.contains("t_act_read_pcm"), "{err}");
        let t = TimingParams {
            t_row_hit: 0,
            ..TimingParams::default()
        };
        assert!(t.validate().unwrap_err().to_string().contains("t_row_hit"));
    }

    fn timing() -> impl Strategy<Value = TimingParams> {
        (1u64..100, 0u64..300, 1u64..300, 0u64..500, 0u64..20, 1u64..2000).prop_map(
            |(hit, act_dram, read_gap, write_gap, bus, mig)| TimingParams {
                t_row_hit: hit,
                t_act_dram: act_dram,
                t_act_read_pcm: act_dram + read_gap,
                t_act_write_pcm: act_dram + read_gap + write_gap,
                t_bus: bus,
                t_migration: mig,
            },
        )
    }

    fn energy() -> impl Strategy<Value = EnergyParams> {
        (0u64..50, 0u64..100, 1u64..100, 0u64..200).prop_map(|(hit, dram, rgap, wgap)| {
            EnergyParams {
                e_row_hit: hit,
                e_act_dram: dram,
                e_act_read_pcm: dram + rgap,
                e_act_write_pcm: dram + rgap + wgap,
                ..EnergyParams::default()
            }
        })
    }

    proptest! {
        #[test]
        fn hit_symmetry_and_miss_asymmetry(t in timing(), e in energy()) {
            t.validate().unwrap();
            e.validate().unwrap();
            for kind in KINDS {
                prop_assert_eq!(
                    access_latency(Device::Dram, kind, RowOutcome::Hit, &t),
                    access_latency(Device::Pcm, kind, RowOutcome::Hit, &t)
                );
                prop_assert_eq!(
                    access_energy(Device::Dram, kind, RowOutcome::Hit, &e),
                    access_energy(Device::Pcm, kind, RowOutcome::Hit, &e)
                );
                prop_assert!(
                    access_latency(Device::Pcm, kind, RowOutcome::Miss, &t)
                        > access_latency(Device::Dram, kind, RowOutcome::Miss, &t)
                );
                prop_assert!(
                    access_energy(Device::Pcm, kind, RowOutcome::Miss, &e)
                        > access_energy(Device::Dram, kind, RowOutcome::Miss, &e)
                );
            }
            prop_assert!(
                access_latency(Device::Pcm, AccessKind::Write, RowOutcome::Miss, &t)
                    >= access_latency(Device::Pcm, AccessKind::Read, RowOutcome::Miss, &t)
            );
        }

        #[test]
        fn replaying_accesses_is_deterministic(rows in proptest::collection::vec(0u64..4, 0..40)) {
            let replay = |rows: &[u64]| {
                let mut bank = BankState::default();
                rows.iter().map(|&r| bank.access(r)).collect::<Vec<_>>()
            };
            prop_assert_eq!(replay(&rows), replay(&rows));
        }
    }
}
