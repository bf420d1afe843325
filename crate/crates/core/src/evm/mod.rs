//! EVM bytecode decoding.

mod disasm;
mod metadata;
pub mod opcode;

pub use disasm::{assemble, decode_hex_text, disassemble, Disassembly, Instruction, Warning};
pub use metadata::strip_metadata;
