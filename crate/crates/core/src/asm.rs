//! Kernel text format: one grid per instruction, instructions separated by
//! `---` lines. A cell is `MNEMONIC srcA, srcB, dest [#imm]`; bare mnemonics
//! and empty cells are NOPs with defaulted fields. `//` starts a comment.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::arch::Architecture;
use crate::grid::Grid;
use crate::isa::{Dest, Kernel, KernelWarning, Opcode, OperandSrc, PESlot, ValidationError};

/// Name given to kernels parsed from bare text; callers that know a better
/// label (a file stem) overwrite it.
pub const DEFAULT_KERNEL_NAME: &str = "kernel";

#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    Syntax { line: usize, col: usize, msg: String },
    /// Instruction block or line has the wrong number of rows/cells.
    Shape { line: usize, msg: String },
    Validation(ValidationError),
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParseError::Syntax { line, col, msg } => write!(f, "line {line}:{col}: {msg}"),
            ParseError::Shape { line, msg } => write!(f, "line {line}: {msg}"),
            ParseError::Validation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ParseError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            ParseError::Validation(e) => Some(e),
            _ => None,
        }
    }
}

/// Parses kernel text against the architecture's grid shape. Returns the
/// kernel plus validation warnings.
pub fn parse_kernel(
    text: &str,
    arch: &Architecture,
) -> Result<(Kernel, Vec<KernelWarning>), ParseError> {
    let rows = arch.rows as usize;
    let cols = arch.cols as usize;

    // Non-blank lines with their 1-based line numbers, comments stripped.
    let mut blocks: Vec<Vec<(usize, &str)>> = alloc::vec![Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if line.trim() == "---" {
            blocks.push(Vec::new());
        } else {
            blocks.last_mut().unwrap().push((idx + 1, line));
        }
    }
    // A leading or trailing separator leaves an empty block; tolerate those.
    if blocks.first().is_some_and(|b| b.is_empty()) {
        blocks.remove(0);
    }
    if blocks.last().is_some_and(|b| b.is_empty()) {
        blocks.pop();
    }

    let mut instructions = Vec::with_capacity(blocks.len());
    for block in &blocks {
        if block.len() != rows {
            let line = block.first().map(|(n, _)| *n).unwrap_or(0);
            return Err(ParseError::Shape {
                line,
                msg: format!("instruction has {} rows, architecture wants {rows}", block.len()),
            });
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for (line_no, line) in block {
            let parts: Vec<&str> = line.split(';').collect();
            if parts.len() != cols {
                return Err(ParseError::Shape {
                    line: *line_no,
                    msg: format!("row has {} cells, architecture wants {cols}", parts.len()),
                });
            }
            let mut offset = 0usize;
            for part in parts {
                cells.push(parse_cell(part, *line_no, offset + 1)?);
                offset += part.len() + 1;
            }
        }
        instructions.push(Grid::from_vec(rows, cols, cells));
    }

    let kernel = Kernel {
        name: DEFAULT_KERNEL_NAME.to_string(),
        rows: arch.rows,
        cols: arch.cols,
        instructions,
    };
    let warnings = kernel.validate(arch).map_err(ParseError::Validation)?;
    Ok((kernel, warnings))
}

fn parse_cell(src: &str, line: usize, col: usize) -> Result<PESlot, ParseError> {
    let syntax = |msg: String| ParseError::Syntax { line, col, msg };

    let cell = src.trim();
    if cell.is_empty() {
        return Ok(PESlot::nop());
    }

    let (head, imm) = match cell.find('#') {
        Some(at) => (cell[..at].trim_end(), parse_imm(cell[at + 1..].trim(), line, col)?),
        None => (cell, 0),
    };

    let mut words = head.splitn(2, char::is_whitespace);
    let mnemonic = words.next().unwrap_or("");
    let op = Opcode::from_mnemonic(mnemonic)
        .ok_or_else(|| syntax(format!("unknown mnemonic '{mnemonic}'")))?;

    let rest = words.next().unwrap_or("").trim();
    let (src_a, src_b, dest) = if rest.is_empty() {
        (OperandSrc::Zero, OperandSrc::Zero, Dest::OutOnly)
    } else {
        let ops: Vec<&str> = rest.split(',').map(str::trim).collect();
        if ops.len() != 3 {
            return Err(syntax(format!(
                "expected 'srcA, srcB, dest' after {mnemonic}, found {} operand(s)",
                ops.len()
            )));
        }
        let src_a = OperandSrc::from_mnemonic(ops[0])
            .ok_or_else(|| syntax(format!("unknown operand source '{}'", ops[0])))?;
        let src_b = OperandSrc::from_mnemonic(ops[1])
            .ok_or_else(|| syntax(format!("unknown operand source '{}'", ops[1])))?;
        let dest = Dest::from_mnemonic(ops[2])
            .ok_or_else(|| syntax(format!("unknown destination '{}'", ops[2])))?;
        (src_a, src_b, dest)
    };

    Ok(PESlot { op, src_a, src_b, dest, imm })
}

fn parse_imm(text: &str, line: usize, col: usize) -> Result<i16, ParseError> {
    let syntax = |msg: String| ParseError::Syntax { line, col, msg };
    if text.is_empty() {
        return Err(syntax("empty immediate after '#'".to_string()));
    }
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        // Hex immediates are raw 16-bit patterns; 0xFFFF reads back as -1.
        u16::from_str_radix(hex, 16)
            .map(|bits| bits as i16)
            .map_err(|_| syntax(format!("bad hex immediate '{text}'")))
    } else {
        text.parse::<i16>()
            .map_err(|_| syntax(format!("immediate '{text}' not a 16-bit signed integer")))
    }
}

/// Renders a kernel back to the text format. `parse_kernel` on the result
/// reproduces the same program (the name is not part of the text).
pub fn render_kernel(kernel: &Kernel) -> String {
    let mut out = String::new();
    for (i, instr) in kernel.instructions.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        for row in 0..instr.rows() {
            let mut cells = Vec::with_capacity(instr.cols());
            for col in 0..instr.cols() {
                cells.push(render_cell(instr.get(row, col)));
            }
            out.push_str(&cells.join("; "));
            out.push('\n');
        }
    }
    out
}

fn render_cell(slot: &PESlot) -> String {
    if *slot == PESlot::nop() {
        return "NOP".to_string();
    }
    let mut cell = format!(
        "{} {}, {}, {}",
        slot.op.mnemonic(),
        slot.src_a.mnemonic(),
        slot.src_b.mnemonic(),
        slot.dest.mnemonic()
    );
    if slot.imm != 0 {
        cell.push_str(&format!(" #{}", slot.imm));
    }
    cell
}
