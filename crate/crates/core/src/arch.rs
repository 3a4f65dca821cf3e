//! Hardware description: PE grid, neighbor topology, memory subsystem.

use core::fmt;

/// Memory interconnect between the PE array and the banked scratchpad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BusKind {
    /// Single shared channel; every access serializes.
    OneToM,
    /// One channel per bank, blocked address mapping (bank = word / bank_words).
    NToM,
    /// One channel per bank, word-interleaved mapping (bank = word % n_banks).
    Interleaved,
}

/// Placement of the DMA ports that carry PE accesses to the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DmaPlacement {
    /// One port shared by each grid column.
    PerColumn,
    /// One private port per PE.
    PerPE,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemorySubsystem {
    pub bus: BusKind,
    pub n_banks: u32,
    pub bank_words: u32,
    pub dma: DmaPlacement,
    /// Cycles one granted access occupies its channel and bank.
    pub mem_latency_cc: u32,
}

impl MemorySubsystem {
    pub fn capacity_words(&self) -> u32 {
        self.n_banks * self.bank_words
    }

    /// Bank holding `word_addr` under this bus's address mapping. OneToM has
    /// a single serializing channel, so every access lands on resource 0.
    pub fn bank_of(&self, word_addr: u32) -> Result<u32, AddressOutOfRange> {
        if word_addr >= self.capacity_words() {
            return Err(AddressOutOfRange {
                word_addr,
                capacity_words: self.capacity_words(),
            });
        }
        Ok(match self.bus {
            BusKind::OneToM => 0,
            BusKind::NToM => word_addr / self.bank_words,
            BusKind::Interleaved => word_addr % self.n_banks,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddressOutOfRange {
    pub word_addr: u32,
    pub capacity_words: u32,
}

impl fmt::Display for AddressOutOfRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "word address {} outside memory capacity of {} words",
            self.word_addr, self.capacity_words
        )
    }
}

impl core::error::Error for AddressOutOfRange {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
    Top,
    Bottom,
}

/// Grid position, row 0 at the top, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PECoord {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub rows: u8,
    pub cols: u8,
    /// Whether neighbor links wrap around grid edges.
    pub torus: bool,
    pub registers_per_pe: u8,
    pub word_bytes: u32,
    pub clock_period_ns: f64,
    pub mem: MemorySubsystem,
    /// Hardware multiplier latency override; None defers to the
    /// characterization's SMUL entry.
    pub mul_latency_cc: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArchError {
    /// A field that must be positive is zero (or non-finite for the clock).
    NonPositive { field: &'static str },
}

impl fmt::Display for ArchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchError::NonPositive { field } => write!(f, "{field} must be positive"),
        }
    }
}

impl core::error::Error for ArchError {}

impl Architecture {
    pub fn n_pes(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        let positive: [(&'static str, bool); 8] = [
            ("rows", self.rows >= 1),
            ("cols", self.cols >= 1),
            ("registers_per_pe", self.registers_per_pe >= 1),
            ("word_bytes", self.word_bytes >= 1),
            ("clock_period_ns", self.clock_period_ns > 0.0 && self.clock_period_ns.is_finite()),
            ("mem.n_banks", self.mem.n_banks >= 1),
            ("mem.bank_words", self.mem.bank_words >= 1),
            ("mem.mem_latency_cc", self.mem.mem_latency_cc >= 1),
        ];
        for (field, ok) in positive {
            if !ok {
                return Err(ArchError::NonPositive { field });
            }
        }
        if self.mul_latency_cc == Some(0) {
            return Err(ArchError::NonPositive { field: "mul_latency_cc" });
        }
        Ok(())
    }

    /// Adjacent coordinate in `dir`; wraps on a torus, otherwise None past
    /// the grid edge.
    pub fn neighbor_of(&self, at: PECoord, dir: Direction) -> Option<PECoord> {
        let rows = self.rows as usize;
        let cols = self.cols as usize;
        debug_assert!(at.row < rows && at.col < cols);
        let (row, col) = match dir {
            Direction::Left => {
                if at.col > 0 {
                    (at.row, at.col - 1)
                } else if self.torus {
                    (at.row, cols - 1)
                } else {
                    return None;
                }
            }
            Direction::Right => {
                if at.col + 1 < cols {
                    (at.row, at.col + 1)
                } else if self.torus {
                    (at.row, 0)
                } else {
                    return None;
                }
            }
            Direction::Top => {
                if at.row > 0 {
                    (at.row - 1, at.col)
                } else if self.torus {
                    (rows - 1, at.col)
                } else {
                    return None;
                }
            }
            Direction::Bottom => {
                if at.row + 1 < rows {
                    (at.row + 1, at.col)
                } else if self.torus {
                    (0, at.col)
                } else {
                    return None;
                }
            }
        };
        Some(PECoord { row, col })
    }

    /// DMA channel carrying accesses from `pe`.
    pub fn channel_of(&self, pe: PECoord) -> u32 {
        match self.mem.dma {
            DmaPlacement::PerColumn => pe.col as u32,
            DmaPlacement::PerPE => (pe.row * self.cols as usize + pe.col) as u32,
        }
    }
}

/// 4x4 reference instance used across unit tests.
#[cfg(test)]
pub fn test_arch() -> Architecture {
    Architecture {
        rows: 4,
        cols: 4,
        torus: true,
        registers_per_pe: 4,
        word_bytes: 4,
        clock_period_ns: 10.0,
        mem: MemorySubsystem {
            bus: BusKind::OneToM,
            n_banks: 4,
            bank_words: 4096,
            dma: DmaPlacement::PerColumn,
            mem_latency_cc: 4,
        },
        mul_latency_cc: None,
    }
}
