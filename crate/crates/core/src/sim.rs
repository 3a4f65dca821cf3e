//! Functional execution: PE semantics, shared PC, synchronous neighbor
//! exchange, word-addressed memory. Untimed; latency and energy are
//! reconstructed from the trace by the timing and power models.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::arch::{Architecture, PECoord};
use crate::grid::Grid;
use crate::isa::{Kernel, Opcode, OperandSrc, SrcClass};

/// Architectural state of one PE. `out` is the output register neighbors
/// and SELF read; it holds the most recently completed result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PEState {
    pub regs: Vec<i32>,
    pub out: i32,
    /// Opcode of the previous step, for datapath-switch detection.
    pub last_opcode: Option<Opcode>,
}

impl PEState {
    fn new(registers_per_pe: u8) -> PEState {
        PEState {
            regs: alloc::vec![0; registers_per_pe as usize],
            out: 0,
            last_opcode: None,
        }
    }
}

/// Word-addressed memory over the subsystem capacity; unwritten words are 0.
/// All public addressing is in bytes and must be word-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryImage {
    word_bytes: u32,
    words: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemAccessError {
    Misaligned { byte_addr: i64, word_bytes: u32 },
    OutOfRange { byte_addr: i64, capacity_bytes: u64 },
}

impl fmt::Display for MemAccessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemAccessError::Misaligned { byte_addr, word_bytes } => {
                write!(f, "address {byte_addr:#x} not aligned to {word_bytes}-byte words")
            }
            MemAccessError::OutOfRange { byte_addr, capacity_bytes } => {
                write!(f, "address {byte_addr:#x} outside {capacity_bytes}-byte memory")
            }
        }
    }
}

impl core::error::Error for MemAccessError {}

impl MemoryImage {
    pub fn zeroed(arch: &Architecture) -> MemoryImage {
        MemoryImage {
            word_bytes: arch.word_bytes,
            words: alloc::vec![0; arch.mem.capacity_words() as usize],
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.words.len() as u64 * self.word_bytes as u64
    }

    fn word_index(&self, byte_addr: i64) -> Result<usize, MemAccessError> {
        if byte_addr < 0 || byte_addr as u64 >= self.capacity_bytes() {
            return Err(MemAccessError::OutOfRange {
                byte_addr,
                capacity_bytes: self.capacity_bytes(),
            });
        }
        if byte_addr % self.word_bytes as i64 != 0 {
            return Err(MemAccessError::Misaligned { byte_addr, word_bytes: self.word_bytes });
        }
        Ok((byte_addr / self.word_bytes as i64) as usize)
    }

    pub fn load(&self, byte_addr: i64) -> Result<i32, MemAccessError> {
        Ok(self.words[self.word_index(byte_addr)?])
    }

    pub fn store(&mut self, byte_addr: i64, value: i32) -> Result<(), MemAccessError> {
        let idx = self.word_index(byte_addr)?;
        self.words[idx] = value;
        Ok(())
    }

    /// Row of raw words, for digesting and whole-image comparison.
    pub fn words(&self) -> &[i32] {
        &self.words
    }

    pub fn word_bytes(&self) -> u32 {
        self.word_bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Load,
    Store,
}

/// Memory access one PE performed in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemAccess {
    pub kind: AccessKind,
    pub byte_addr: u32,
}

/// What one PE did in one step, with everything the timing and power models
/// need: resolved operands, source classes, result, access, switch flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeExec {
    pub op: Opcode,
    /// Resolved operand values; 0 when the op does not read that slot.
    pub a: i32,
    pub b: i32,
    pub class_a: SrcClass,
    pub class_b: SrcClass,
    /// Output register content after this step.
    pub result: i32,
    pub mem: Option<MemAccess>,
    /// Opcode differs from this PE's previous step (never set on step 0).
    pub switched: bool,
}

/// One executed instruction: dynamic index, the instruction it ran, and a
/// full grid of per-PE records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u32,
    pub pc: u32,
    pub pes: Grid<PeExec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Exited,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<StepRecord>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimWarning {
    /// Two stores hit one address in the same step; row-major order decides.
    StoreConflict { step: u32, byte_addr: u32, winner: PECoord },
}

impl fmt::Display for SimWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimWarning::StoreConflict { step, byte_addr, winner } => write!(
                f,
                "step {step}: multiple stores to {byte_addr:#x}; PE({},{}) wins by row-major order",
                winner.row, winner.col
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Access { step: u32, pe: PECoord, source: MemAccessError },
    /// PC ran past the last instruction without an EXIT.
    PcOverrun { step: u32, pc: u32 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Access { step, pe, source } => {
                write!(f, "step {step} PE({},{}): {source}", pe.row, pe.col)
            }
            SimError::PcOverrun { step, pc } => {
                write!(f, "step {step}: pc {pc} past the last instruction without EXIT")
            }
        }
    }
}

impl core::error::Error for SimError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            SimError::Access { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Trace,
    pub final_mem: MemoryImage,
    pub final_pes: Grid<PEState>,
    pub warnings: Vec<SimWarning>,
}

/// Runs `kernel` on `arch` from memory image `mem0` until EXIT or
/// `max_steps`. Deterministic; inputs must already be validated.
pub fn run(
    kernel: &Kernel,
    arch: &Architecture,
    mem0: MemoryImage,
    max_steps: u32,
) -> Result<RunOutput, SimError> {
    debug_assert!(max_steps >= 1);
    let rows = arch.rows as usize;
    let cols = arch.cols as usize;
    let mut pes = Grid::filled(rows, cols, PEState::new(arch.registers_per_pe));
    let mut mem = mem0;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut pc: u32 = 0;
    let mut termination = Termination::MaxSteps;

    for step in 0..max_steps {
        if pc as usize >= kernel.instructions.len() {
            return Err(SimError::PcOverrun { step, pc });
        }
        let instr = &kernel.instructions[pc as usize];

        // Read phase: every PE resolves operands and loads against the
        // pre-step state, so execution is order-independent within a step.
        let mut execs = Vec::with_capacity(rows * cols);
        let mut commits: Vec<Commit> = Vec::with_capacity(rows * cols);
        let mut next_pc = pc + 1;
        let mut exited = false;
        for ((row, col), slot) in instr.iter() {
            let pe = PECoord { row, col };
            let (uses_a, uses_b) = slot.op.operand_use();
            let a = if uses_a { resolve(slot.src_a, slot.imm, pe, &pes, arch) } else { 0 };
            let b = if uses_b { resolve(slot.src_b, slot.imm, pe, &pes, arch) } else { 0 };

            let mut commit = Commit::none();
            let mut mem_access = None;
            let state = pes.get(row, col);
            let mut result = state.out;
            match slot.op {
                Opcode::Nop => {}
                Opcode::Exit => exited = true,
                Opcode::Sadd => result = a.wrapping_add(b),
                Opcode::Ssub => result = a.wrapping_sub(b),
                Opcode::Smul => result = a.wrapping_mul(b),
                Opcode::Slt => result = (a < b) as i32,
                Opcode::Land => result = a & b,
                Opcode::Lor => result = a | b,
                Opcode::Lxor => result = a ^ b,
                // Shifts use the low 5 bits of src_b.
                Opcode::Sll => result = ((a as u32) << (b as u32 & 31)) as i32,
                Opcode::Srl => result = ((a as u32) >> (b as u32 & 31)) as i32,
                Opcode::Sra => result = a >> (b as u32 & 31),
                Opcode::Lw => {
                    let addr = a as i64 + slot.imm as i64;
                    let value = mem
                        .load(addr)
                        .map_err(|source| SimError::Access { step, pe, source })?;
                    result = value;
                    mem_access = Some(MemAccess { kind: AccessKind::Load, byte_addr: addr as u32 });
                }
                Opcode::Sw => {
                    let addr = a as i64 + slot.imm as i64;
                    // Validate the address now so the error carries this PE.
                    mem.word_index(addr)
                        .map_err(|source| SimError::Access { step, pe, source })?;
                    commit.store = Some((addr, b));
                    mem_access =
                        Some(MemAccess { kind: AccessKind::Store, byte_addr: addr as u32 });
                }
                Opcode::Beq => {
                    if a == b {
                        next_pc = slot.imm as u32;
                    }
                }
                Opcode::Bne => {
                    if a != b {
                        next_pc = slot.imm as u32;
                    }
                }
                Opcode::Jump => next_pc = slot.imm as u32,
            }

            let writes_out = !matches!(
                slot.op,
                Opcode::Nop | Opcode::Exit | Opcode::Sw | Opcode::Beq | Opcode::Bne | Opcode::Jump
            );
            if writes_out {
                commit.out = Some(result);
                commit.dest = slot.dest.reg_index().map(|idx| (idx, result));
            }

            execs.push(PeExec {
                op: slot.op,
                a,
                b,
                class_a: slot.src_a.class(),
                class_b: slot.src_b.class(),
                result,
                mem: mem_access,
                switched: state.last_opcode.is_some_and(|prev| prev != slot.op),
            });
            commits.push(commit);
        }

        // Commit phase: stores land after every load has read, then
        // registers and output latches update.
        let mut stored: Vec<(i64, PECoord)> = Vec::new();
        for (i, commit) in commits.iter().enumerate() {
            if let Some((addr, value)) = commit.store {
                let pe = PECoord { row: i / cols, col: i % cols };
                if stored.iter().any(|(prev, _)| *prev == addr) {
                    warnings.push(SimWarning::StoreConflict {
                        step,
                        byte_addr: addr as u32,
                        winner: pe,
                    });
                }
                stored.push((addr, pe));
                mem.store(addr, value)
                    .map_err(|source| SimError::Access { step, pe, source })?;
            }
        }
        for (i, commit) in commits.iter().enumerate() {
            let state = pes.get_mut(i / cols, i % cols);
            if let Some(out) = commit.out {
                state.out = out;
            }
            if let Some((idx, value)) = commit.dest {
                state.regs[idx] = value;
            }
            state.last_opcode = Some(execs[i].op);
        }

        records.push(StepRecord {
            step,
            pc,
            pes: Grid::from_vec(rows, cols, execs),
        });

        if exited {
            termination = Termination::Exited;
            break;
        }
        pc = next_pc;
    }

    Ok(RunOutput {
        trace: Trace { records, termination },
        final_mem: mem,
        final_pes: pes,
        warnings,
    })
}

struct Commit {
    out: Option<i32>,
    dest: Option<(usize, i32)>,
    store: Option<(i64, i32)>,
}

impl Commit {
    fn none() -> Commit {
        Commit { out: None, dest: None, store: None }
    }
}

/// Operand value as of the end of the previous step. Reads past a non-torus
/// edge return 0 (the link floats low).
fn resolve(
    src: OperandSrc,
    imm: i16,
    pe: PECoord,
    pes: &Grid<PEState>,
    arch: &Architecture,
) -> i32 {
    match src {
        OperandSrc::Zero => 0,
        OperandSrc::Imm => imm as i32,
        OperandSrc::SelfOut => pes.get(pe.row, pe.col).out,
        OperandSrc::R0 | OperandSrc::R1 | OperandSrc::R2 | OperandSrc::R3 => {
            let idx = src.reg_index().unwrap();
            pes.get(pe.row, pe.col).regs[idx]
        }
        OperandSrc::Rcl | OperandSrc::Rcr | OperandSrc::Rct | OperandSrc::Rcb => {
            let dir = src.neighbor_dir().unwrap();
            match arch.neighbor_of(pe, dir) {
                Some(n) => pes.get(n.row, n.col).out,
                None => 0,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemImageError {
    Parse { line: usize, msg: String },
    Access { line: usize, source: MemAccessError },
}

impl fmt::Display for MemImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemImageError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            MemImageError::Access { line, source } => write!(f, "line {line}: {source}"),
        }
    }
}

impl core::error::Error for MemImageError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            MemImageError::Access { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemWarning {
    /// The address was assigned twice; the later line wins.
    DuplicateAddress { line: usize, byte_addr: u32 },
}

impl fmt::Display for MemWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemWarning::DuplicateAddress { line, byte_addr } => {
                write!(f, "line {line}: address {byte_addr:#x} assigned again; last value wins")
            }
        }
    }
}

/// Parses the memory image text format: one `0xADDR: value` per line, value
/// decimal or 0x-hex, `//` comments, blank lines ignored.
pub fn parse_memory_image(
    text: &str,
    arch: &Architecture,
) -> Result<(MemoryImage, Vec<MemWarning>), MemImageError> {
    let mut mem = MemoryImage::zeroed(arch);
    let mut warnings = Vec::new();
    let mut seen: Vec<i64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (addr_text, value_text) = line.split_once(':').ok_or_else(|| MemImageError::Parse {
            line: line_no,
            msg: String::from("expected '0xADDR: value'"),
        })?;
        let addr_text = addr_text.trim();
        let hex = addr_text
            .strip_prefix("0x")
            .or_else(|| addr_text.strip_prefix("0X"))
            .ok_or_else(|| MemImageError::Parse {
                line: line_no,
                msg: format!("address '{addr_text}' must be 0x-hex"),
            })?;
        let addr = i64::from_str_radix(hex, 16).map_err(|_| MemImageError::Parse {
            line: line_no,
            msg: format!("bad address '{addr_text}'"),
        })?;
        let value = parse_word(value_text.trim()).ok_or_else(|| MemImageError::Parse {
            line: line_no,
            msg: format!("bad value '{}'", value_text.trim()),
        })?;
        if seen.contains(&addr) {
            warnings.push(MemWarning::DuplicateAddress { line: line_no, byte_addr: addr as u32 });
        } else {
            seen.push(addr);
        }
        mem.store(addr, value)
            .map_err(|source| MemImageError::Access { line: line_no, source })?;
    }
    Ok((mem, warnings))
}

fn parse_word(text: &str) -> Option<i32> {
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u32::from_str_radix(hex, 16).ok().map(|bits| bits as i32)
    } else {
        text.parse::<i32>().ok()
    }
}

/// Renders the nonzero words of an image in the text format, ascending.
pub fn dump_memory_image(mem: &MemoryImage) -> String {
    let mut out = String::new();
    for (i, word) in mem.words.iter().enumerate() {
        if *word != 0 {
            out.push_str(&format!("{:#x}: {}\n", i as u64 * mem.word_bytes as u64, word));
        }
    }
    out
}
