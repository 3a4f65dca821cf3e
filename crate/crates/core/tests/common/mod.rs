//! Shared generators for integration tests.

use cgra_core::{Architecture, Dest, Grid, Instruction, Kernel, Opcode, OperandSrc, PESlot};
use proptest::prelude::*;

pub fn arb_opcode() -> impl Strategy<Value = Opcode> {
    proptest::sample::select(Opcode::ALL.to_vec())
}

pub fn arb_src() -> impl Strategy<Value = OperandSrc> {
    proptest::sample::select(OperandSrc::ALL.to_vec())
}

pub fn arb_dest() -> impl Strategy<Value = Dest> {
    proptest::sample::select(Dest::ALL.to_vec())
}

/// A slot whose fields are structurally valid for a 4-register PE. The
/// immediate is unconstrained; branch targets are clamped separately.
pub fn arb_slot() -> impl Strategy<Value = PESlot> {
    (arb_opcode(), arb_src(), arb_src(), arb_dest(), any::<i16>()).prop_map(
        |(op, src_a, src_b, dest, imm)| PESlot { op, src_a, src_b, dest, imm },
    )
}

/// Kernels that pass validation against `arch`: at most one control-flow
/// op per instruction, branch/jump targets inside the program.
pub fn arb_kernel(arch: Architecture) -> impl Strategy<Value = Kernel> {
    let rows = arch.rows as usize;
    let cols = arch.cols as usize;
    let slots_per_instr = rows * cols;
    proptest::collection::vec(
        proptest::collection::vec(arb_slot(), slots_per_instr),
        1..6,
    )
    .prop_map(move |mut raw| {
        let len = raw.len() as i16;
        for instr in raw.iter_mut() {
            let mut control_seen = false;
            for slot in instr.iter_mut() {
                if slot.op.is_control_flow() {
                    if control_seen {
                        *slot = PESlot { imm: slot.imm, ..PESlot::nop() };
                        continue;
                    }
                    control_seen = true;
                    if matches!(slot.op, Opcode::Beq | Opcode::Bne | Opcode::Jump) {
                        slot.imm = slot.imm.rem_euclid(len);
                    }
                }
            }
        }
        let instructions: Vec<Instruction> = raw
            .into_iter()
            .map(|slots| Grid::from_vec(rows, cols, slots))
            .collect();
        Kernel {
            name: "generated".into(),
            rows: rows as u8,
            cols: cols as u8,
            instructions,
        }
    })
}
