use std::path::Path;

use dvdet_core::evm::{decode_hex_text, strip_metadata};

use crate::error::{AtStage, Result, Stage, StageError};

/// Reads contract code: `.bin` files are raw bytes, anything else is hex text
/// (optional `0x`, whitespace ignored). With `strip`, a trailing Solidity
/// metadata blob is removed.
pub fn read_bytecode(path: &Path, strip: bool) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path).map_err(|e| StageError::io(Stage::Disasm, path, e))?;
    let code = if path.extension().is_some_and(|e| e == "bin") {
        bytes
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| StageError::input(Stage::Disasm, format!("{} is not UTF-8 hex text", path.display())))?;
        decode_hex_text(&text).at(Stage::Disasm)?
    };
    Ok(if strip {
        strip_metadata(&code).to_vec()
    } else {
        code
    })
}
