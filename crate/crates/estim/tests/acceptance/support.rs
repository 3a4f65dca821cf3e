//! Shared plumbing for the acceptance suite: asset loading, inline kernel
//! construction, and one verdict line per criterion.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use cgra_core::charmodel::FidelityCase;
use cgra_core::power::{kernel_energy, EnergySummary};
use cgra_core::sim::{self, MemoryImage, RunOutput};
use cgra_core::timing::{kernel_timings, total_cycles, StepTiming};
use cgra_core::{
    Architecture, CharacterizationModel, Dest, Grid, Instruction, Kernel, Opcode, OperandSrc,
    PESlot,
};
use cgra_estim::files;

/// Prints the verdict for one criterion, then re-panics on failure so the
/// harness still counts the test as failed.
pub fn criterion(n: u32, name: &str, body: impl FnOnce()) {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("acceptance criterion {n} ({name}): {verdict}");
    if let Err(panic) = outcome {
        resume_unwind(panic);
    }
}

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn arch(rel: &str) -> Architecture {
    files::load_arch(&asset(rel)).expect("architecture file loads")
}

pub fn sample_char() -> CharacterizationModel {
    files::load_char(&asset("char/openedge-sample.json")).expect("characterization loads")
}

pub fn kernel(rel: &str, arch: &Architecture) -> Kernel {
    let (kernel, warnings) = files::load_kernel(&asset(rel), arch).expect("kernel loads");
    assert!(warnings.is_empty(), "shipped kernel {rel} warns: {warnings:?}");
    kernel
}

pub fn memory(rel: Option<&str>, arch: &Architecture) -> MemoryImage {
    let path = rel.map(asset);
    let (mem, warnings) = files::load_mem(path.as_deref(), arch).expect("memory image loads");
    assert!(warnings.is_empty(), "memory image {rel:?} warns: {warnings:?}");
    mem
}

/// Shipped kernels with their natural input images.
pub const KERNELS: &[(&str, Option<&str>)] = &[
    ("kernels/conv_wp.cgra", Some("mem/conv-8x8.mem")),
    ("kernels/alu_mix.cgra", None),
    ("kernels/nop_cluster.cgra", None),
    ("kernels/nop_split.cgra", None),
];

pub struct Estimate {
    pub out: RunOutput,
    pub timings: Vec<StepTiming>,
    pub cycles: u64,
    pub energy: EnergySummary,
}

pub fn estimate(
    kernel: &Kernel,
    arch: &Architecture,
    model: &CharacterizationModel,
    mem: MemoryImage,
    case: FidelityCase,
) -> Estimate {
    let eff = model.resolve(case);
    let out = sim::run(kernel, arch, mem, 1_000_000).expect("kernel terminates");
    let timings = kernel_timings(&out.trace, arch, &eff);
    let cycles = total_cycles(&timings);
    let energy = kernel_energy(&out.trace, &timings, arch, &eff);
    Estimate { out, timings, cycles, energy }
}

pub fn slot(op: Opcode, a: OperandSrc, b: OperandSrc, dest: Dest, imm: i16) -> PESlot {
    PESlot { op, src_a: a, src_b: b, dest, imm }
}

/// 4x4 instruction holding the given slots; every other PE gets a NOP.
pub fn instr(slots: &[((usize, usize), PESlot)]) -> Instruction {
    let mut grid = Grid::filled(4, 4, PESlot::nop());
    for ((row, col), s) in slots {
        *grid.get_mut(*row, *col) = *s;
    }
    grid
}

pub fn kernel_of(instructions: Vec<Instruction>) -> Kernel {
    Kernel { name: "inline".into(), rows: 4, cols: 4, instructions }
}

pub fn exit_instr() -> Instruction {
    instr(&[((0, 0), slot(Opcode::Exit, OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly, 0))])
}
