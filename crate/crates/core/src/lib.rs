//! Behavioral simulation and characterization-driven latency/energy
//! estimation for time-multiplexed CGRAs.
//!
//! A kernel is an ordered list of instructions; each instruction assigns one
//! operation to every processing element (PE) of the grid. All PEs share a
//! program counter and advance together once the slowest PE of a step has
//! finished. Execution semantics live in [`sim`] and are untimed; latency is
//! reconstructed from the trace by [`timing`] and energy by [`power`], both
//! parameterized by a characterization profile ([`charmodel`]) whose fidelity
//! is selected through the cumulative case ladder i--vi.
//!
//! The crate is `no_std` (with `alloc`); file IO, JSON schemas and the CLI
//! live in the companion `cgra-estim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arch;
pub mod asm;
pub mod bitstream;
pub mod charmodel;
pub mod grid;
pub mod isa;
pub mod power;
pub mod sim;
pub mod timing;

pub use arch::{Architecture, BusKind, Direction, DmaPlacement, MemorySubsystem, PECoord};
pub use charmodel::{CharacterizationModel, EffectiveModel, FidelityCase};
pub use grid::Grid;
pub use isa::{Dest, Instruction, Kernel, Opcode, OperandSrc, PESlot, SrcClass};
pub use sim::{MemoryImage, StepRecord, Termination, Trace};
