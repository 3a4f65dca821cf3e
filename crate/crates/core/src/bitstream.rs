//! Deployment bitstream codec. Header: magic "CGRK", u8 rows, u8 cols,
//! u16 LE instruction count. Body: one LE u32 per slot, instructions in
//! order, slots row-major: bits[31:27] opcode, [26:23] src_a, [22:19] src_b,
//! [18:16] dest, [15:0] imm (two's complement).

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::arch::{Architecture, PECoord};
use crate::asm::DEFAULT_KERNEL_NAME;
use crate::grid::Grid;
use crate::isa::{Dest, Kernel, KernelWarning, Opcode, OperandSrc, PESlot, ValidationError};

pub const MAGIC: [u8; 4] = *b"CGRK";
pub const HEADER_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum EncodeError {
    /// The header's instruction count is a u16.
    TooManyInstructions { len: usize },
    Validation(ValidationError),
}

impl core::fmt::Display for EncodeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EncodeError::TooManyInstructions { len } => {
                write!(f, "kernel has {len} instructions, bitstream header caps at 65535")
            }
            EncodeError::Validation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EncodeError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            EncodeError::Validation(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeError {
    TooShort { len: usize },
    BadMagic { found: [u8; 4] },
    GridMismatch { rows: u8, cols: u8, want_rows: u8, want_cols: u8 },
    LengthMismatch { expected: usize, found: usize },
    ReservedOpcode { instr: usize, pe: PECoord, code: u8 },
    ReservedOperandSrc { instr: usize, pe: PECoord, code: u8 },
    ReservedDest { instr: usize, pe: PECoord, code: u8 },
    Validation(ValidationError),
}

impl core::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DecodeError::TooShort { len } => {
                write!(f, "bitstream is {len} bytes, header needs {HEADER_LEN}")
            }
            DecodeError::BadMagic { found } => write!(f, "bad magic {found:02x?}"),
            DecodeError::GridMismatch { rows, cols, want_rows, want_cols } => write!(
                f,
                "bitstream is for a {rows}x{cols} grid, architecture is {want_rows}x{want_cols}"
            ),
            DecodeError::LengthMismatch { expected, found } => {
                write!(f, "bitstream is {found} bytes, header implies {expected}")
            }
            DecodeError::ReservedOpcode { instr, pe, code } => write!(
                f,
                "instruction {instr} PE({},{}) has reserved opcode code {code}",
                pe.row, pe.col
            ),
            DecodeError::ReservedOperandSrc { instr, pe, code } => write!(
                f,
                "instruction {instr} PE({},{}) has reserved operand source code {code}",
                pe.row, pe.col
            ),
            DecodeError::ReservedDest { instr, pe, code } => write!(
                f,
                "instruction {instr} PE({},{}) has reserved destination code {code}",
                pe.row, pe.col
            ),
            DecodeError::Validation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DecodeError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            DecodeError::Validation(e) => Some(e),
            _ => None,
        }
    }
}

fn encode_slot(slot: &PESlot) -> u32 {
    (slot.op.code() as u32) << 27
        | (slot.src_a.code() as u32) << 23
        | (slot.src_b.code() as u32) << 19
        | (slot.dest.code() as u32) << 16
        | (slot.imm as u16 as u32)
}

fn decode_slot(word: u32, instr: usize, pe: PECoord) -> Result<PESlot, DecodeError> {
    let op_code = (word >> 27) as u8;
    let a_code = ((word >> 23) & 0xF) as u8;
    let b_code = ((word >> 19) & 0xF) as u8;
    let dest_code = ((word >> 16) & 0x7) as u8;
    Ok(PESlot {
        op: Opcode::from_code(op_code)
            .ok_or(DecodeError::ReservedOpcode { instr, pe, code: op_code })?,
        src_a: OperandSrc::from_code(a_code)
            .ok_or(DecodeError::ReservedOperandSrc { instr, pe, code: a_code })?,
        src_b: OperandSrc::from_code(b_code)
            .ok_or(DecodeError::ReservedOperandSrc { instr, pe, code: b_code })?,
        dest: Dest::from_code(dest_code)
            .ok_or(DecodeError::ReservedDest { instr, pe, code: dest_code })?,
        imm: (word & 0xFFFF) as u16 as i16,
    })
}

/// Encodes a validated kernel. Layout is bit-exact and deterministic:
/// 8-byte header, then 4 bytes per slot.
pub fn encode_bitstream(kernel: &Kernel, arch: &Architecture) -> Result<Vec<u8>, EncodeError> {
    kernel.validate(arch).map_err(EncodeError::Validation)?;
    let count = u16::try_from(kernel.len())
        .map_err(|_| EncodeError::TooManyInstructions { len: kernel.len() })?;

    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * kernel.n_slots());
    bytes.extend_from_slice(&MAGIC);
    bytes.push(kernel.rows);
    bytes.push(kernel.cols);
    bytes.extend_from_slice(&count.to_le_bytes());
    for instr in &kernel.instructions {
        for slot in instr.cells() {
            bytes.extend_from_slice(&encode_slot(slot).to_le_bytes());
        }
    }
    Ok(bytes)
}

impl Kernel {
    fn n_slots(&self) -> usize {
        self.len() * self.rows as usize * self.cols as usize
    }
}

/// Decodes and validates a bitstream produced by [`encode_bitstream`].
/// The kernel name is not encoded; the result carries the default name.
pub fn decode_bitstream(
    bytes: &[u8],
    arch: &Architecture,
) -> Result<(Kernel, Vec<KernelWarning>), DecodeError> {
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::TooShort { len: bytes.len() });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(DecodeError::BadMagic { found: magic });
    }
    let rows = bytes[4];
    let cols = bytes[5];
    if rows != arch.rows || cols != arch.cols {
        return Err(DecodeError::GridMismatch {
            rows,
            cols,
            want_rows: arch.rows,
            want_cols: arch.cols,
        });
    }
    let count = u16::from_le_bytes(bytes[6..8].try_into().unwrap()) as usize;
    let slots_per_instr = rows as usize * cols as usize;
    let expected = HEADER_LEN + 4 * slots_per_instr * count;
    if bytes.len() != expected {
        return Err(DecodeError::LengthMismatch { expected, found: bytes.len() });
    }

    let mut instructions = Vec::with_capacity(count);
    let mut cursor = HEADER_LEN;
    for instr_idx in 0..count {
        let mut cells = Vec::with_capacity(slots_per_instr);
        for slot_idx in 0..slots_per_instr {
            let word = u32::from_le_bytes(bytes[cursor..cursor + 4].try_into().unwrap());
            cursor += 4;
            let pe = PECoord {
                row: slot_idx / cols as usize,
                col: slot_idx % cols as usize,
            };
            cells.push(decode_slot(word, instr_idx, pe)?);
        }
        instructions.push(Grid::from_vec(rows as usize, cols as usize, cells));
    }

    let kernel = Kernel {
        name: DEFAULT_KERNEL_NAME.to_string(),
        rows,
        cols,
        instructions,
    };
    let warnings = kernel.validate(arch).map_err(DecodeError::Validation)?;
    Ok((kernel, warnings))
}
