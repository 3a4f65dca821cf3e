//! Self-contained datapath vectors. Each row materializes two register
//! operands from immediates via the hi/lo split trick (no memory traffic),
//! applies one op, and pins the exact 32-bit result.

use cgra_core::sim::{self, MemoryImage};
use cgra_core::{Architecture, Dest, Opcode, OperandSrc};

use crate::support::{instr, kernel_of, slot};

pub struct Vector {
    pub name: &'static str,
    pub op: Opcode,
    pub a: i32,
    pub b: i32,
    pub expect: i32,
}

const fn v(name: &'static str, op: Opcode, a: i32, b: i32, expect: i32) -> Vector {
    Vector { name, op, a, b, expect }
}

pub const VECTORS: &[Vector] = &[
    v("sadd_small", Opcode::Sadd, 3, 4, 7),
    v("sadd_negative", Opcode::Sadd, -9, 2, -7),
    v("sadd_wraps_to_min", Opcode::Sadd, i32::MAX, 1, i32::MIN),
    v("sadd_wraps_to_max", Opcode::Sadd, i32::MIN, -1, i32::MAX),
    v("ssub_basic", Opcode::Ssub, 10, 3, 7),
    v("ssub_wraps", Opcode::Ssub, i32::MIN, 1, i32::MAX),
    v("smul_signed", Opcode::Smul, 7, -6, -42),
    v("smul_wraps_high_bit", Opcode::Smul, 0x4000_0000, 4, 0),
    v("smul_wraps_65536_sq", Opcode::Smul, 65536, 65536, 0),
    v("smul_by_zero", Opcode::Smul, 0, 123_456, 0),
    v("slt_neg_lt_pos", Opcode::Slt, -1, 1, 1),
    v("slt_pos_not_lt_neg", Opcode::Slt, 1, -1, 0),
    v("slt_min_lt_max", Opcode::Slt, i32::MIN, i32::MAX, 1),
    v("slt_equal_is_false", Opcode::Slt, 5, 5, 0),
    v("land_masks", Opcode::Land, 0xF0F0, 0xFF00, 0xF000),
    v("lor_merges", Opcode::Lor, 0xF0F0, 0x0F0F, 0xFFFF),
    v("lxor_flips", Opcode::Lxor, 0xFF, 0x0F, 0xF0),
    v("lxor_self_cancels", Opcode::Lxor, 0x1234_5678, 0x1234_5678, 0),
    v("sll_basic", Opcode::Sll, 1, 4, 16),
    v("sll_count_masks_33", Opcode::Sll, 1, 33, 2),
    v("sll_into_sign_bit", Opcode::Sll, 1, 31, i32::MIN),
    v("srl_zero_fills", Opcode::Srl, -8, 1, 0x7FFF_FFFC),
    v("srl_count_masks_32", Opcode::Srl, -8, 32, -8),
    v("srl_positive", Opcode::Srl, 1024, 3, 128),
    v("sra_sign_fills", Opcode::Sra, -8, 1, -4),
    v("sra_all_ones_stay", Opcode::Sra, -1, 31, -1),
    v("sra_min_to_minus_one", Opcode::Sra, i32::MIN, 31, -1),
];

/// Three instructions leaving `value` in the PE(0,0) register named by
/// `dest`: load the compensated high half, shift it up, add the low half.
fn load_const(value: i32, src: OperandSrc, dest: Dest) -> [cgra_core::Instruction; 3] {
    let lo = value as i16;
    let hi = (value.wrapping_sub(lo as i32) >> 16) as i16;
    [
        instr(&[((0, 0), slot(Opcode::Sadd, OperandSrc::Imm, OperandSrc::Zero, dest, hi))]),
        instr(&[((0, 0), slot(Opcode::Sll, src, OperandSrc::Imm, dest, 16))]),
        instr(&[((0, 0), slot(Opcode::Sadd, src, OperandSrc::Imm, dest, lo))]),
    ]
}

/// Runs one vector and returns the op's recorded result at PE(0,0).
pub fn run_vector(vector: &Vector, arch: &Architecture) -> i32 {
    let mut instructions = Vec::with_capacity(8);
    instructions.extend(load_const(vector.a, OperandSrc::R0, Dest::R0));
    instructions.extend(load_const(vector.b, OperandSrc::R1, Dest::R1));
    instructions.push(instr(&[(
        (0, 0),
        slot(vector.op, OperandSrc::R0, OperandSrc::R1, Dest::R2, 0),
    )]));
    instructions.push(crate::support::exit_instr());
    let kernel = kernel_of(instructions);
    let out = sim::run(&kernel, arch, MemoryImage::zeroed(arch), 64)
        .unwrap_or_else(|e| panic!("vector {} fails to run: {e}", vector.name));
    assert_eq!(out.trace.records.len(), 8, "vector {} step count", vector.name);
    out.trace.records[6].pes.get(0, 0).result
}
