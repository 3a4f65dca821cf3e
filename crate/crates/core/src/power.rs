//! Energy accounting over a timed trace. All products are mW times ns,
//! which lands directly in pJ.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::arch::Architecture;
use crate::charmodel::EffectiveModel;
use crate::grid::Grid;
use crate::isa::Opcode;
use crate::sim::{PeExec, Trace};
use crate::timing::{PeTiming, StepTiming};

/// Energy of one PE within one step, split by where the time went.
/// `total_pj` is defined as the sum of the parts, so nothing can hide
/// outside the breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PEEnergyBreakdown {
    pub decode_pj: f64,
    pub active_pj: f64,
    pub idle_pj: f64,
    pub switch_pj: f64,
    pub operand_adder_pj: f64,
}

impl PEEnergyBreakdown {
    pub fn total_pj(&self) -> f64 {
        self.decode_pj + self.active_pj + self.idle_pj + self.switch_pj + self.operand_adder_pj
    }
}

/// Operating power of the executed op, with the idle multiplier taking
/// over when one input of a multiply is zero (modeled from case vi).
fn op_power_mw(exec: &PeExec, eff: &EffectiveModel) -> f64 {
    if exec.op == Opcode::Smul && (exec.a == 0 || exec.b == 0) {
        if let Some(p) = eff.mul_zero_power_mw {
            return p;
        }
    }
    eff.op_power(exec.op)
}

/// Energy of one PE for one step.
///
/// Below case v the whole step is billed at the op's power. From case v
/// the budget splits: decode and execute cycles at their own rates, stall
/// and idle cycles at idle power, plus per-step switch and operand-source
/// adder energies (zero until case vi enables them).
pub fn pe_step_energy(
    exec: &PeExec,
    timing: &PeTiming,
    eff: &EffectiveModel,
    clock_period_ns: f64,
) -> PEEnergyBreakdown {
    let p_op = op_power_mw(exec, eff);
    if !eff.split_profile() {
        return PEEnergyBreakdown {
            active_pj: p_op * timing.total_cc() as f64 * clock_period_ns,
            ..PEEnergyBreakdown::default()
        };
    }

    let mut adder_mw = 0.0;
    let (use_a, use_b) = exec.op.operand_use();
    if use_a {
        adder_mw += eff.src_adder_mw[exec.class_a.index()];
    }
    if use_b {
        adder_mw += eff.src_adder_mw[exec.class_b.index()];
    }

    PEEnergyBreakdown {
        decode_pj: eff.decode_power_mw * timing.decode_cc as f64 * clock_period_ns,
        active_pj: p_op * timing.exec_cc as f64 * clock_period_ns,
        idle_pj: eff.idle_power_mw * (timing.stall_cc + timing.idle_cc) as f64 * clock_period_ns,
        switch_pj: if exec.switched { eff.switch_energy_pj } else { 0.0 },
        operand_adder_pj: adder_mw * clock_period_ns,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatUnit {
    AvgPowerMw,
    EnergyPj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatScope {
    Kernel,
    Step(u32),
    Instruction(u32),
}

/// Per-PE scalar field over the grid, for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub unit: HeatUnit,
    pub scope: HeatScope,
    pub grid: Grid<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepEnergy {
    pub step: u32,
    pub pc: u32,
    pub total_cc: u32,
    pub per_pe: Grid<PEEnergyBreakdown>,
}

impl StepEnergy {
    pub fn total_pj(&self) -> f64 {
        self.per_pe.cells().iter().map(|b| b.total_pj()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySummary {
    pub total_pj: f64,
    pub total_cc: u64,
    pub total_ns: f64,
    pub avg_power_mw: f64,
    pub per_step: Vec<StepEnergy>,
    /// Per-PE energy summed over the whole run.
    pub kernel_heatmap: Heatmap,
    /// Per-PE average power while executing each instruction (keyed by
    /// pc, ascending), aggregated over every visit the trace made to it.
    pub instruction_heatmaps: Vec<(u32, Heatmap)>,
}

/// Average power of each PE across one step.
pub fn step_power_heatmap(step: &StepEnergy, clock_period_ns: f64) -> Heatmap {
    let span_ns = step.total_cc as f64 * clock_period_ns;
    let cells = step
        .per_pe
        .cells()
        .iter()
        .map(|b| if span_ns > 0.0 { b.total_pj() / span_ns } else { 0.0 })
        .collect();
    Heatmap {
        unit: HeatUnit::AvgPowerMw,
        scope: HeatScope::Step(step.step),
        grid: Grid::from_vec(step.per_pe.rows(), step.per_pe.cols(), cells),
    }
}

/// Prices the whole trace. `timings` must come from the same trace.
pub fn kernel_energy(
    trace: &Trace,
    timings: &[StepTiming],
    arch: &Architecture,
    eff: &EffectiveModel,
) -> EnergySummary {
    assert_eq!(trace.records.len(), timings.len(), "trace and timings must align");
    let clk = arch.clock_period_ns;
    let rows = arch.rows as usize;
    let cols = arch.cols as usize;

    let mut per_step = Vec::with_capacity(trace.records.len());
    for (record, timing) in trace.records.iter().zip(timings) {
        let mut per_pe = Grid::filled(rows, cols, PEEnergyBreakdown::default());
        for ((row, col), exec) in record.pes.iter() {
            *per_pe.get_mut(row, col) =
                pe_step_energy(exec, timing.per_pe.get(row, col), eff, clk);
        }
        per_step.push(StepEnergy {
            step: record.step,
            pc: record.pc,
            total_cc: timing.total_cc,
            per_pe,
        });
    }

    // Step-major total.
    let total_pj: f64 = per_step.iter().map(|s| s.total_pj()).sum();
    let total_cc: u64 = per_step.iter().map(|s| s.total_cc as u64).sum();
    let total_ns = total_cc as f64 * clk;
    let avg_power_mw = if total_ns > 0.0 { total_pj / total_ns } else { 0.0 };

    // PE-major kernel heatmap; summed independently of total_pj above so
    // the two orders cross-check each other.
    let mut kernel_cells = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let e: f64 = per_step.iter().map(|s| s.per_pe.get(row, col).total_pj()).sum();
            kernel_cells.push(e);
        }
    }
    let kernel_heatmap = Heatmap {
        unit: HeatUnit::EnergyPj,
        scope: HeatScope::Kernel,
        grid: Grid::from_vec(rows, cols, kernel_cells),
    };

    // Per-instruction average power, folding repeat visits (loops) into
    // one map per pc.
    let mut by_pc: BTreeMap<u32, (u64, Vec<f64>)> = BTreeMap::new();
    for step in &per_step {
        let entry = by_pc
            .entry(step.pc)
            .or_insert_with(|| (0, alloc::vec![0.0; rows * cols]));
        entry.0 += step.total_cc as u64;
        for (cell, b) in entry.1.iter_mut().zip(step.per_pe.cells()) {
            *cell += b.total_pj();
        }
    }
    let instruction_heatmaps = by_pc
        .into_iter()
        .map(|(pc, (cc, energies))| {
            let span_ns = cc as f64 * clk;
            let cells = energies
                .into_iter()
                .map(|e| if span_ns > 0.0 { e / span_ns } else { 0.0 })
                .collect();
            let map = Heatmap {
                unit: HeatUnit::AvgPowerMw,
                scope: HeatScope::Instruction(pc),
                grid: Grid::from_vec(rows, cols, cells),
            };
            (pc, map)
        })
        .collect();

    EnergySummary {
        total_pj,
        total_cc,
        total_ns,
        avg_power_mw,
        per_step,
        kernel_heatmap,
        instruction_heatmaps,
    }
}
