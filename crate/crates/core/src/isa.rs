//! Instruction set surface: opcodes, operand sources, destinations, and the
//! kernel container. Numeric codes are fixed; the bitstream layout depends on
//! them staying put.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::arch::{Architecture, Direction, PECoord};
use crate::grid::Grid;

/// Operation executed by one PE in one instruction. Codes 0-16 are frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Opcode {
    Nop = 0,
    Exit = 1,
    Sadd = 2,
    Ssub = 3,
    Smul = 4,
    Slt = 5,
    Land = 6,
    Lor = 7,
    Lxor = 8,
    Sll = 9,
    Srl = 10,
    Sra = 11,
    Lw = 12,
    Sw = 13,
    Beq = 14,
    Bne = 15,
    Jump = 16,
}

impl Opcode {
    pub const COUNT: usize = 17;

    pub const ALL: [Opcode; Self::COUNT] = [
        Opcode::Nop,
        Opcode::Exit,
        Opcode::Sadd,
        Opcode::Ssub,
        Opcode::Smul,
        Opcode::Slt,
        Opcode::Land,
        Opcode::Lor,
        Opcode::Lxor,
        Opcode::Sll,
        Opcode::Srl,
        Opcode::Sra,
        Opcode::Lw,
        Opcode::Sw,
        Opcode::Beq,
        Opcode::Bne,
        Opcode::Jump,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Opcode> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Nop => "NOP",
            Opcode::Exit => "EXIT",
            Opcode::Sadd => "SADD",
            Opcode::Ssub => "SSUB",
            Opcode::Smul => "SMUL",
            Opcode::Slt => "SLT",
            Opcode::Land => "LAND",
            Opcode::Lor => "LOR",
            Opcode::Lxor => "LXOR",
            Opcode::Sll => "SLL",
            Opcode::Srl => "SRL",
            Opcode::Sra => "SRA",
            Opcode::Lw => "LW",
            Opcode::Sw => "SW",
            Opcode::Beq => "BEQ",
            Opcode::Bne => "BNE",
            Opcode::Jump => "JUMP",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.mnemonic().eq_ignore_ascii_case(s))
    }

    /// Control-flow ops steer the shared PC; at most one per instruction.
    pub fn is_control_flow(self) -> bool {
        matches!(self, Opcode::Exit | Opcode::Beq | Opcode::Bne | Opcode::Jump)
    }

    pub fn is_memory(self) -> bool {
        matches!(self, Opcode::Lw | Opcode::Sw)
    }

    /// Which of (src_a, src_b) the op actually reads. JUMP targets via imm
    /// only; LW uses src_a as its address base.
    pub fn operand_use(self) -> (bool, bool) {
        match self {
            Opcode::Nop | Opcode::Exit | Opcode::Jump => (false, false),
            Opcode::Lw => (true, false),
            _ => (true, true),
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Where a PE reads an operand from. Codes 0-10 are frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum OperandSrc {
    Zero = 0,
    Imm = 1,
    /// The PE's own output register, as of the end of the previous step.
    SelfOut = 2,
    R0 = 3,
    R1 = 4,
    R2 = 5,
    R3 = 6,
    /// Left neighbor's output register (previous step).
    Rcl = 7,
    Rcr = 8,
    Rct = 9,
    Rcb = 10,
}

impl OperandSrc {
    pub const COUNT: usize = 11;

    pub const ALL: [OperandSrc; Self::COUNT] = [
        OperandSrc::Zero,
        OperandSrc::Imm,
        OperandSrc::SelfOut,
        OperandSrc::R0,
        OperandSrc::R1,
        OperandSrc::R2,
        OperandSrc::R3,
        OperandSrc::Rcl,
        OperandSrc::Rcr,
        OperandSrc::Rct,
        OperandSrc::Rcb,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<OperandSrc> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            OperandSrc::Zero => "ZERO",
            OperandSrc::Imm => "IMM",
            OperandSrc::SelfOut => "SELF",
            OperandSrc::R0 => "R0",
            OperandSrc::R1 => "R1",
            OperandSrc::R2 => "R2",
            OperandSrc::R3 => "R3",
            OperandSrc::Rcl => "RCL",
            OperandSrc::Rcr => "RCR",
            OperandSrc::Rct => "RCT",
            OperandSrc::Rcb => "RCB",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<OperandSrc> {
        Self::ALL
            .iter()
            .copied()
            .find(|src| src.mnemonic().eq_ignore_ascii_case(s))
    }

    pub fn class(self) -> SrcClass {
        match self {
            OperandSrc::Zero | OperandSrc::SelfOut => SrcClass::ZeroSelf,
            OperandSrc::Imm => SrcClass::Imm,
            OperandSrc::R0 | OperandSrc::R1 | OperandSrc::R2 | OperandSrc::R3 => SrcClass::Reg,
            OperandSrc::Rcl | OperandSrc::Rcr | OperandSrc::Rct | OperandSrc::Rcb => {
                SrcClass::Neighbor
            }
        }
    }

    pub fn reg_index(self) -> Option<usize> {
        match self {
            OperandSrc::R0 => Some(0),
            OperandSrc::R1 => Some(1),
            OperandSrc::R2 => Some(2),
            OperandSrc::R3 => Some(3),
            _ => None,
        }
    }

    pub fn neighbor_dir(self) -> Option<Direction> {
        match self {
            OperandSrc::Rcl => Some(Direction::Left),
            OperandSrc::Rcr => Some(Direction::Right),
            OperandSrc::Rct => Some(Direction::Top),
            OperandSrc::Rcb => Some(Direction::Bottom),
            _ => None,
        }
    }
}

impl fmt::Display for OperandSrc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Routing-cost class of an operand source; indexes the per-class power
/// adders of the characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SrcClass {
    ZeroSelf = 0,
    Imm = 1,
    Reg = 2,
    Neighbor = 3,
}

impl SrcClass {
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Result destination. The output register is always written by computing
/// ops; a register destination is written in addition. Codes 0-4 are frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Dest {
    OutOnly = 0,
    R0 = 1,
    R1 = 2,
    R2 = 3,
    R3 = 4,
}

impl Dest {
    pub const COUNT: usize = 5;

    pub const ALL: [Dest; Self::COUNT] =
        [Dest::OutOnly, Dest::R0, Dest::R1, Dest::R2, Dest::R3];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Dest> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Dest::OutOnly => "-",
            Dest::R0 => "R0",
            Dest::R1 => "R1",
            Dest::R2 => "R2",
            Dest::R3 => "R3",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Dest> {
        Self::ALL
            .iter()
            .copied()
            .find(|d| d.mnemonic().eq_ignore_ascii_case(s))
    }

    pub fn reg_index(self) -> Option<usize> {
        match self {
            Dest::OutOnly => None,
            Dest::R0 => Some(0),
            Dest::R1 => Some(1),
            Dest::R2 => Some(2),
            Dest::R3 => Some(3),
        }
    }
}

/// One PE's operation slot within an instruction. `imm` doubles as the
/// absolute branch/jump target for control-flow ops and as the byte offset
/// for memory ops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PESlot {
    pub op: Opcode,
    pub src_a: OperandSrc,
    pub src_b: OperandSrc,
    pub dest: Dest,
    pub imm: i16,
}

impl PESlot {
    pub const fn nop() -> PESlot {
        PESlot {
            op: Opcode::Nop,
            src_a: OperandSrc::Zero,
            src_b: OperandSrc::Zero,
            dest: Dest::OutOnly,
            imm: 0,
        }
    }
}

impl Default for PESlot {
    fn default() -> Self {
        Self::nop()
    }
}

/// One CGRA instruction: a full grid of PE slots executed simultaneously.
pub type Instruction = Grid<PESlot>;

/// Ordered instruction list plus grid shape. The name is a label for reports
/// only; it is not part of the deployed bitstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub name: String,
    pub rows: u8,
    pub cols: u8,
    pub instructions: Vec<Instruction>,
}

/// Non-fatal findings from kernel validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelWarning {
    /// No EXIT is reachable from instruction 0; the run will only stop at
    /// the step bound.
    NoReachableExit,
}

impl fmt::Display for KernelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelWarning::NoReachableExit => {
                write!(f, "no EXIT reachable from instruction 0; run stops only at --max-steps")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationError {
    Empty,
    ShapeMismatch {
        instr: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    /// More than one of EXIT/BEQ/BNE/JUMP in a single instruction; the
    /// shared PC admits one steering op per step.
    MultipleControlFlow { instr: usize },
    BranchTargetOutOfRange {
        instr: usize,
        pe: PECoord,
        target: i32,
        len: usize,
    },
    RegisterOutOfRange {
        instr: usize,
        pe: PECoord,
        index: u8,
        available: u8,
    },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::Empty => write!(f, "kernel has no instructions"),
            ValidationError::ShapeMismatch {
                instr,
                rows,
                cols,
                want_rows,
                want_cols,
            } => write!(
                f,
                "instruction {instr} is {rows}x{cols}, architecture is {want_rows}x{want_cols}"
            ),
            ValidationError::MultipleControlFlow { instr } => write!(
                f,
                "instruction {instr} has more than one control-flow op (shared PC allows one)"
            ),
            ValidationError::BranchTargetOutOfRange {
                instr,
                pe,
                target,
                len,
            } => write!(
                f,
                "instruction {instr} PE({},{}) targets instruction {target}, kernel length {len}",
                pe.row, pe.col
            ),
            ValidationError::RegisterOutOfRange {
                instr,
                pe,
                index,
                available,
            } => write!(
                f,
                "instruction {instr} PE({},{}) uses R{index}, architecture has {available} registers",
                pe.row, pe.col
            ),
        }
    }
}

impl core::error::Error for ValidationError {}

impl Kernel {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Program identity ignoring the report label.
    pub fn same_program(&self, other: &Kernel) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.instructions == other.instructions
    }

    /// Checks every structural invariant against the architecture. Returns
    /// the non-fatal warnings on success.
    pub fn validate(&self, arch: &Architecture) -> Result<Vec<KernelWarning>, ValidationError> {
        if self.instructions.is_empty() {
            return Err(ValidationError::Empty);
        }
        let want_rows = arch.rows as usize;
        let want_cols = arch.cols as usize;
        for (i, instr) in self.instructions.iter().enumerate() {
            if instr.rows() != want_rows || instr.cols() != want_cols {
                return Err(ValidationError::ShapeMismatch {
                    instr: i,
                    rows: instr.rows(),
                    cols: instr.cols(),
                    want_rows,
                    want_cols,
                });
            }
            let mut control_ops = 0usize;
            for ((row, col), slot) in instr.iter() {
                let pe = PECoord { row, col };
                if slot.op.is_control_flow() {
                    control_ops += 1;
                    if control_ops > 1 {
                        return Err(ValidationError::MultipleControlFlow { instr: i });
                    }
                }
                if matches!(slot.op, Opcode::Beq | Opcode::Bne | Opcode::Jump) {
                    let target = slot.imm as i32;
                    if target < 0 || target as usize >= self.instructions.len() {
                        return Err(ValidationError::BranchTargetOutOfRange {
                            instr: i,
                            pe,
                            target,
                            len: self.instructions.len(),
                        });
                    }
                }
                for idx in [slot.src_a.reg_index(), slot.src_b.reg_index(), slot.dest.reg_index()]
                    .into_iter()
                    .flatten()
                {
                    if idx as u8 >= arch.registers_per_pe {
                        return Err(ValidationError::RegisterOutOfRange {
                            instr: i,
                            pe,
                            index: idx as u8,
                            available: arch.registers_per_pe,
                        });
                    }
                }
            }
        }

        let mut warnings = Vec::new();
        if !self.exit_reachable() {
            warnings.push(KernelWarning::NoReachableExit);
        }
        Ok(warnings)
    }

    /// True when at least one instruction reachable from index 0 holds EXIT.
    fn exit_reachable(&self) -> bool {
        let len = self.instructions.len();
        let mut seen = alloc::vec![false; len];
        let mut stack = alloc::vec![0usize];
        while let Some(pc) = stack.pop() {
            if pc >= len || seen[pc] {
                continue;
            }
            seen[pc] = true;
            let instr = &self.instructions[pc];
            let control = instr.cells().iter().find(|s| s.op.is_control_flow());
            match control.map(|s| (s.op, s.imm as usize)) {
                Some((Opcode::Exit, _)) => return true,
                Some((Opcode::Jump, target)) => stack.push(target),
                Some((_, target)) => {
                    // BEQ/BNE: both the taken and fall-through paths.
                    stack.push(target);
                    stack.push(pc + 1);
                }
                None => stack.push(pc + 1),
            }
        }
        false
    }
}
