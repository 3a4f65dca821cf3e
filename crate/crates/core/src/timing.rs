//! Latency reconstruction from a trace: per-op execution times plus memory
//! contention on the bus/bank/DMA resources (cases III and up).

use alloc::vec::Vec;

use crate::arch::{Architecture, MemorySubsystem, PECoord};
use crate::charmodel::{EffectiveModel, FidelityCase};
use crate::grid::Grid;
use crate::isa::Opcode;
use crate::sim::{AccessKind, StepRecord, Trace};

/// One PE's memory access, annotated with the resources it occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRequest {
    pub pe: PECoord,
    pub kind: AccessKind,
    pub word_addr: u32,
    pub bank: u32,
    pub channel: u32,
}

/// Cycle budget of one PE within one step. The step's duration is the
/// slowest PE's decode+stall+exec; everyone else idles the difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeTiming {
    pub decode_cc: u32,
    pub stall_cc: u32,
    pub exec_cc: u32,
    pub idle_cc: u32,
}

impl PeTiming {
    pub fn total_cc(&self) -> u32 {
        self.decode_cc + self.stall_cc + self.exec_cc + self.idle_cc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTiming {
    pub per_pe: Grid<PeTiming>,
    pub total_cc: u32,
}

/// Greedy in-order grant: requests are taken in row-major PE order; each
/// starts at the earliest cycle where both its channel and its bank are
/// free, then occupies both for `mem.mem_latency_cc`. Returns per-request
/// start cycles in input order.
pub fn schedule_memory_accesses(reqs: &[AccessRequest], mem: &MemorySubsystem) -> Vec<u32> {
    let latency = mem.mem_latency_cc;
    let mut channel_free: Vec<(u32, u32)> = Vec::new();
    let mut bank_free: Vec<(u32, u32)> = Vec::new();
    let free_at = |table: &mut Vec<(u32, u32)>, key: u32| -> u32 {
        match table.iter().find(|(k, _)| *k == key) {
            Some((_, t)) => *t,
            None => 0,
        }
    };
    let book = |table: &mut Vec<(u32, u32)>, key: u32, until: u32| {
        match table.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = until,
            None => table.push((key, until)),
        }
    };

    let mut starts = Vec::with_capacity(reqs.len());
    for req in reqs {
        let start = free_at(&mut channel_free, req.channel).max(free_at(&mut bank_free, req.bank));
        book(&mut channel_free, req.channel, start + latency);
        book(&mut bank_free, req.bank, start + latency);
        starts.push(start);
    }
    starts
}

/// Memory requests of one step in row-major PE order.
pub fn step_requests(record: &StepRecord, arch: &Architecture) -> Vec<AccessRequest> {
    let mut reqs = Vec::new();
    for ((row, col), exec) in record.pes.iter() {
        if let Some(access) = exec.mem {
            let pe = PECoord { row, col };
            let word_addr = access.byte_addr / arch.word_bytes;
            // Addresses were bounds-checked during simulation.
            let bank = arch.mem.bank_of(word_addr).expect("traced access in range");
            reqs.push(AccessRequest {
                pe,
                kind: access.kind,
                word_addr,
                bank,
                channel: arch.channel_of(pe),
            });
        }
    }
    reqs
}

/// Execution cycles of one op outside contention: the per-op table, with
/// the hardware multiplier override applied from case II up.
fn exec_cycles(op: Opcode, arch: &Architecture, eff: &EffectiveModel) -> u32 {
    if op == Opcode::Smul && eff.case >= FidelityCase::II {
        if let Some(cc) = arch.mul_latency_cc {
            return cc;
        }
    }
    eff.op_latency(op)
}

/// Times one step. Below case III memory ops cost their flat per-op
/// latency; from case III the scheduler assigns stalls and every access
/// executes for the subsystem latency.
pub fn step_timing(record: &StepRecord, arch: &Architecture, eff: &EffectiveModel) -> StepTiming {
    let rows = record.pes.rows();
    let cols = record.pes.cols();
    let decode_cc = eff.decode_cycles;

    let mut timings = Grid::filled(rows, cols, PeTiming::default());
    for ((row, col), exec) in record.pes.iter() {
        let t = timings.get_mut(row, col);
        t.decode_cc = decode_cc;
        t.exec_cc = exec_cycles(exec.op, arch, eff);
    }

    if eff.contention {
        let reqs = step_requests(record, arch);
        let starts = schedule_memory_accesses(&reqs, &arch.mem);
        for (req, start) in reqs.iter().zip(starts) {
            let t = timings.get_mut(req.pe.row, req.pe.col);
            t.stall_cc = start;
            t.exec_cc = arch.mem.mem_latency_cc;
        }
    }

    let total_cc = timings
        .cells()
        .iter()
        .map(|t| t.decode_cc + t.stall_cc + t.exec_cc)
        .max()
        .unwrap_or(0);
    for t in 0..rows * cols {
        let cell = timings.get_mut(t / cols, t % cols);
        cell.idle_cc = total_cc - (cell.decode_cc + cell.stall_cc + cell.exec_cc);
    }

    StepTiming { per_pe: timings, total_cc }
}

pub fn kernel_timings(trace: &Trace, arch: &Architecture, eff: &EffectiveModel) -> Vec<StepTiming> {
    trace.records.iter().map(|r| step_timing(r, arch, eff)).collect()
}

pub fn total_cycles(timings: &[StepTiming]) -> u64 {
    timings.iter().map(|t| t.total_cc as u64).sum()
}

/// Kernel latency in cycles and nanoseconds.
pub fn kernel_latency(trace: &Trace, arch: &Architecture, eff: &EffectiveModel) -> (u64, f64) {
    let cycles = total_cycles(&kernel_timings(trace, arch, eff));
    (cycles, cycles as f64 * arch.clock_period_ns)
}
