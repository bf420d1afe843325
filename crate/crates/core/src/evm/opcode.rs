//! Shanghai instruction set.
//!
//! Bytes with no assigned instruction map to the empty string and decode as
//! `INVALID` with `is_valid = false`.

/// Mnemonics indexed by opcode byte.
#[rustfmt::skip]
pub const MNEMONICS: [&str; 256] = [
    /* 0x00 */ "STOP", "ADD", "MUL", "SUB", "DIV", "SDIV", "MOD", "SMOD", "ADDMOD", "MULMOD", "EXP", "SIGNEXTEND", "", "", "", "",
    /* 0x10 */ "LT", "GT", "SLT", "SGT", "EQ", "ISZERO", "AND", "OR", "XOR", "NOT", "BYTE", "SHL", "SHR", "SAR", "", "",
    /* 0x20 */ "KECCAK256", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "",
    /* 0x30 */ "ADDRESS", "BALANCE", "ORIGIN", "CALLER", "CALLVALUE", "CALLDATALOAD", "CALLDATASIZE", "CALLDATACOPY", "CODESIZE", "CODECOPY", "GASPRICE", "EXTCODESIZE", "EXTCODECOPY", "RETURNDATASIZE", "RETURNDATACOPY", "EXTCODEHASH",
    /* 0x40 */ "BLOCKHASH", "COINBASE", "TIMESTAMP", "NUMBER", "PREVRANDAO", "GASLIMIT", "CHAINID", "SELFBALANCE", "BASEFEE", "", "", "", "", "", "", "",
    /* 0x50 */ "POP", "MLOAD", "MSTORE", "MSTORE8", "SLOAD", "SSTORE", "JUMP", "JUMPI", "PC", "MSIZE", "GAS", "JUMPDEST", "", "", "", "PUSH0",
    /* 0x60 */ "PUSH1", "PUSH2", "PUSH3", "PUSH4", "PUSH5", "PUSH6", "PUSH7", "PUSH8", "PUSH9", "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
    /* 0x70 */ "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24", "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32",
    /* 0x80 */ "DUP1", "DUP2", "DUP3", "DUP4", "DUP5", "DUP6", "DUP7", "DUP8", "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16",
    /* 0x90 */ "SWAP1", "SWAP2", "SWAP3", "SWAP4", "SWAP5", "SWAP6", "SWAP7", "SWAP8", "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15", "SWAP16",
    /* 0xa0 */ "LOG0", "LOG1", "LOG2", "LOG3", "LOG4", "", "", "", "", "", "", "", "", "", "", "",
    /* 0xb0 */ "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "",
    /* 0xc0 */ "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "",
    /* 0xd0 */ "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "",
    /* 0xe0 */ "", "", "", "", "", "", "", "", "", "", "", "", "", "", "", "",
    /* 0xf0 */ "CREATE", "CALL", "CALLCODE", "RETURN", "DELEGATECALL", "CREATE2", "", "", "", "", "STATICCALL", "", "", "REVERT", "INVALID", "SELFDESTRUCT",
];

pub const STOP: u8 = 0x00;
pub const JUMP: u8 = 0x56;
pub const JUMPI: u8 = 0x57;
pub const JUMPDEST: u8 = 0x5b;
pub const PUSH1: u8 = 0x60;
pub const PUSH32: u8 = 0x7f;
pub const RETURN: u8 = 0xf3;
pub const REVERT: u8 = 0xfd;
pub const INVALID: u8 = 0xfe;
pub const SELFDESTRUCT: u8 = 0xff;

/// Mnemonic used for bytes outside the instruction set.
pub const UNDEFINED_MNEMONIC: &str = "INVALID";

/// Whether `op` is an assigned instruction.
pub fn is_defined(op: u8) -> bool {
    !MNEMONICS[op as usize].is_empty()
}

/// Mnemonic for `op`; undefined bytes report `INVALID`.
pub fn mnemonic(op: u8) -> &'static str {
    match MNEMONICS[op as usize] {
        "" => UNDEFINED_MNEMONIC,
        name => name,
    }
}

/// Number of immediate bytes following `op` (1..=32 for PUSH1..PUSH32).
pub fn immediate_len(op: u8) -> usize {
    if (PUSH1..=PUSH32).contains(&op) {
        (op - PUSH1 + 1) as usize
    } else {
        0
    }
}

/// Reverse lookup from mnemonic to opcode byte.
pub fn opcode_for(name: &str) -> Option<u8> {
    MNEMONICS
        .iter()
        .position(|m| !m.is_empty() && *m == name)
        .map(|i| i as u8)
}

/// Every defined mnemonic, in opcode order.
pub fn defined_mnemonics() -> impl Iterator<Item = &'static str> {
    MNEMONICS.iter().copied().filter(|m| !m.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_counts() {
        // 144 assigned opcodes in Shanghai.
        assert_eq!(defined_mnemonics().count(), 144);
        assert_eq!(mnemonic(0x0c), "INVALID");
        assert!(!is_defined(0x0c));
        assert!(is_defined(INVALID));
    }

    #[test]
    fn push_widths() {
        assert_eq!(immediate_len(0x5f), 0);
        assert_eq!(immediate_len(PUSH1), 1);
        assert_eq!(immediate_len(PUSH32), 32);
        assert_eq!(immediate_len(0x80), 0);
    }

    #[test]
    fn reverse_lookup() {
        for op in 0..=255u8 {
            if is_defined(op) {
                assert_eq!(opcode_for(mnemonic(op)), Some(op));
            }
        }
        assert_eq!(opcode_for("NOPE"), None);
    }
}
