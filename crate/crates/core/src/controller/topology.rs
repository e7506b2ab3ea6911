use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Channel, bank and capacity layout of the hybrid memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub dram_channels: u32,
    pub pcm_channels: u32,
    pub banks_per_channel: u32,
    /// Bytes per memory row; also the migration granularity.
    pub row_size: u64,
    /// Bytes per demand transfer.
    pub line_size: u64,
    /// DRAM cache capacity in rows. Zero leaves only PCM.
    pub dram_rows: u64,
    pub pcm_rows: u64,
}

/// A bank coordinate within one device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BankId {
    pub channel: u32,
    pub bank: u32,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("topology.dram_channels", self.dram_channels as u64),
            ("topology.pcm_channels", self.pcm_channels as u64),
            ("topology.banks_per_channel", self.banks_per_channel as u64),
            ("topology.row_size", self.row_size),
            ("topology.line_size", self.line_size),
            ("topology.pcm_rows", self.pcm_rows),
        ] {
            if value == 0 {
                return Err(Error::validation(field, "must be at least 1"));
            }
        }
        if self.line_size > self.row_size {
            return Err(Error::validation(
                "topology.line_size",
                "must not exceed row_size",
            ));
        }
        if self.dram_rows >= self.pcm_rows {
            return Err(Error::validation(
                "topology.dram_rows",
                format!(
                    "DRAM cache must be smaller than PCM ({} >= {})",
                    self.dram_rows, self.pcm_rows
                ),
            ));
        }
        self.pcm_rows
            .checked_mul(self.row_size)
            .ok_or_else(|| Error::validation("topology.pcm_rows", "capacity overflows 64 bits"))?;
        Ok(())
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.pcm_rows * self.row_size
    }

    /// Splits a byte address into its PCM row id and column offset.
    pub fn map_address(&self, address: u64) -> Result<(u64, u64)> {
        if address >= self.capacity_bytes() {
            return Err(Error::Address {
                address,
                limit: self.capacity_bytes(),
            });
        }
        Ok((address / self.row_size, address % self.row_size))
    }

    /// Number of distinct PCM banks; rows congruent modulo this value share a bank.
    pub fn pcm_bank_count(&self) -> u64 {
        self.pcm_channels as u64 * self.banks_per_channel as u64
    }

    pub fn pcm_bank(&self, row: u64) -> BankId {
        interleave(row, self.pcm_channels, self.banks_per_channel)
    }

    pub fn dram_bank(&self, slot: u64) -> BankId {
        interleave(slot, self.dram_channels, self.banks_per_channel)
    }
}

// channel bits lowest, then bank bits
fn interleave(row: u64, channels: u32, banks: u32) -> BankId {
    let channel = (row % channels as u64) as u32;
    let bank = ((row / channels as u64) % banks as u64) as u32;
    BankId { channel, bank }
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            dram_channels: 1,
            pcm_channels: 1,
            banks_per_channel: 8,
            row_size: 4096,
            line_size: 64,
            dram_rows: 128,
            pcm_rows: 1 << 16,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_mapping_examples() {
        let t = Topology::default();
        assert_eq!(t.map_address(0).unwrap(), (0, 0));
        assert_eq!(t.map_address(4096).unwrap(), (1, 0));
        assert_eq!(t.map_address(8191).unwrap(), (1, 4095));
    }

    #[test]
    fn out_of_range_address_is_rejected() {
        let t = Topology {
            pcm_rows: 4,
            dram_rows: 1,
            ..Topology::default()
        };
        assert!(matches!(
            t.map_address(4 * 4096),
            Err(Error::Address { .. })
        ));
        assert!(t.map_address(4 * 4096 - 1).is_ok());
    }

    #[test]
    fn rows_sharing_a_bank() {
        let t = Topology {
            pcm_channels: 2,
            banks_per_channel: 4,
            ..Topology::default()
        };
        assert_eq!(t.pcm_bank_count(), 8);
        for row in 0..64 {
            assert_eq!(t.pcm_bank(row), t.pcm_bank(row + 8));
        }
        assert_ne!(t.pcm_bank(0), t.pcm_bank(1));
        assert_eq!(t.pcm_bank(3), BankId { channel: 1, bank: 1 });
    }

    #[test]
    fn validation() {
        Topology::default().validate().unwrap();
        let bad = Topology {
            dram_rows: 1 << 16,
            ..Topology::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("dram_rows"));
        let bad = Topology {
            banks_per_channel: 0,
            ..Topology::default()
        };
        assert!(bad
            .validate()
            .unwrap_err()
            .to_string()
            .contains("banks_per_channel"));
        let all_pcm = Topology {
            dram_rows: 0,
            ..Topology::default()
        };
        all_pcm.validate().unwrap();
    }
}
