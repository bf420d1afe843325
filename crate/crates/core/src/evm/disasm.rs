use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::opcode;
use crate::{Error, Result};

/// One decoded instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Instruction {
    /// Byte position in the code.
    pub offset: usize,
    pub mnemonic: &'static str,
    pub opcode: u8,
    /// Immediate bytes for PUSH1..PUSH32; `None` for everything else.
    pub immediate: Option<Vec<u8>>,
    /// `false` for bytes outside the instruction set.
    pub is_valid: bool,
}

impl Instruction {
    /// Encoded width in bytes.
    pub fn size(&self) -> usize {
        1 + self.immediate.as_ref().map_or(0, Vec::len)
    }

    pub fn is_push(&self) -> bool {
        self.immediate.is_some()
    }

    /// Immediate interpreted as a big-endian integer, if it fits in `usize`.
    pub fn immediate_value(&self) -> Option<usize> {
        let bytes = self.immediate.as_ref()?;
        let significant: &[u8] = match bytes.iter().position(|b| *b != 0) {
            Some(first) => &bytes[first..],
            None => return Some(0),
        };
        if significant.len() > core::mem::size_of::<usize>() {
            return None;
        }
        Some(significant.iter().fold(0usize, |acc, b| (acc << 8) | *b as usize))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6} {}", self.offset, self.mnemonic)?;
        if let Some(imm) = &self.immediate {
            write!(f, " 0x")?;
            for b in imm {
                write!(f, "{b:02x}")?;
            }
        }
        Ok(())
    }
}

/// Non-fatal decoding anomalies.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Warning {
    /// A PUSH ran past the end of the code; the missing bytes were zero-filled.
    TruncatedImmediate {
        offset: usize,
        expected: usize,
        available: usize,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::TruncatedImmediate {
                offset,
                expected,
                available,
            } => write!(
                f,
                "truncated immediate at offset {offset}: expected {expected} bytes, found {available}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Disassembly {
    pub instructions: Vec<Instruction>,
    pub warnings: Vec<Warning>,
}

impl Disassembly {
    /// Re-encodes the stream, leaving out the zero bytes that padded a
    /// truncated final PUSH, so the result is exactly the decoded input.
    pub fn encode(&self) -> Vec<u8> {
        let mut code = assemble(&self.instructions);
        for w in &self.warnings {
            match w {
                Warning::TruncatedImmediate {
                    expected, available, ..
                } => code.truncate(code.len() - (expected - available)),
            }
        }
        code
    }
}

/// Decodes `code` into a linear instruction stream.
///
/// Every byte is consumed exactly once. Bytes outside the instruction set
/// decode as `INVALID` with `is_valid = false`.
pub fn disassemble(code: &[u8]) -> Disassembly {
    let mut out = Disassembly::default();
    let mut pc = 0;
    while pc < code.len() {
        let op = code[pc];
        let width = opcode::immediate_len(op);
        let immediate = if width > 0 {
            let start = pc + 1;
            let end = (start + width).min(code.len());
            let mut imm = Vec::with_capacity(width);
            imm.extend_from_slice(&code[start..end]);
            if imm.len() < width {
                out.warnings.push(Warning::TruncatedImmediate {
                    offset: pc,
                    expected: width,
                    available: imm.len(),
                });
                imm.resize(width, 0);
            }
            Some(imm)
        } else {
            None
        };
        out.instructions.push(Instruction {
            offset: pc,
            mnemonic: opcode::mnemonic(op),
            opcode: op,
            immediate,
            is_valid: opcode::is_defined(op),
        });
        pc += 1 + width;
    }
    out
}

/// Re-encodes an instruction stream.
pub fn assemble(instructions: &[Instruction]) -> Vec<u8> {
    let mut code = Vec::with_capacity(instructions.iter().map(Instruction::size).sum());
    for ins in instructions {
        code.push(ins.opcode);
        if let Some(imm) = &ins.immediate {
            code.extend_from_slice(imm);
        }
    }
    code
}

/// Parses ASCII hex bytecode. A leading `0x` is accepted and whitespace is
/// ignored anywhere. Error positions are character indices into `text`.
pub fn decode_hex_text(text: &str) -> Result<Vec<u8>> {
    let mut digits = String::with_capacity(text.len());
    let mut last_digit_pos = 0;
    let mut chars = text.char_indices().peekable();

    while let Some((_, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else {
            break;
        }
    }
    let mut rest = chars.clone();
    if let (Some((_, '0')), Some((_, 'x' | 'X'))) = (rest.next(), rest.next()) {
        chars = rest;
    }

    for (pos, c) in chars {
        if c.is_whitespace() {
            continue;
        }
        if !c.is_ascii_hexdigit() {
            return Err(Error::Hex {
                position: char_position(text, pos),
                reason: alloc::format!("unexpected character {c:?}"),
            });
        }
        digits.push(c);
        last_digit_pos = pos;
    }
    if digits.len() % 2 != 0 {
        return Err(Error::Hex {
            position: char_position(text, last_digit_pos),
            reason: "odd number of hex digits".into(),
        });
    }
    hex::decode(&digits).map_err(|e| Error::Hex {
        position: 0,
        reason: alloc::format!("{e}"),
    })
}

fn char_position(text: &str, byte_pos: usize) -> usize {
    text[..byte_pos].chars().count()
}
