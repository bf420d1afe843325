//! Removal of the compiler metadata trailer.
//!
//! solc appends `CBOR map || u16 big-endian length of the map` to runtime
//! code. The trailer is only removed when the declared length fits inside the
//! code and the bytes it covers parse as exactly one CBOR map.

/// Returns `code` without its metadata trailer, or `code` unchanged when no
/// well-formed trailer is present.
pub fn strip_metadata(code: &[u8]) -> &[u8] {
    if code.len() < 2 {
        return code;
    }
    let declared = u16::from_be_bytes([code[code.len() - 2], code[code.len() - 1]]) as usize;
    if declared == 0 || declared + 2 > code.len() {
        return code;
    }
    let start = code.len() - 2 - declared;
    let blob = &code[start..code.len() - 2];
    if blob[0] >> 5 != MAJOR_MAP {
        return code;
    }
    match skip_item(blob, 0, 0) {
        Some(end) if end == blob.len() => &code[..start],
        _ => code,
    }
}

const MAJOR_UINT: u8 = 0;
const MAJOR_BYTES: u8 = 2;
const MAJOR_TEXT: u8 = 3;
const MAJOR_ARRAY: u8 = 4;
const MAJOR_MAP: u8 = 5;
const MAJOR_SIMPLE: u8 = 7;
const MAX_DEPTH: usize = 8;

/// Returns the position just past the item starting at `pos`.
fn skip_item(buf: &[u8], pos: usize, depth: usize) -> Option<usize> {
    if depth > MAX_DEPTH {
        return None;
    }
    let head = *buf.get(pos)?;
    let major = head >> 5;
    let (arg, mut pos) = read_argument(buf, pos + 1, head & 0x1f)?;
    match major {
        MAJOR_UINT => Some(pos),
        MAJOR_BYTES | MAJOR_TEXT => {
            let end = pos.checked_add(usize::try_from(arg).ok()?)?;
            (end <= buf.len()).then_some(end)
        }
        MAJOR_ARRAY => {
            for _ in 0..arg {
                pos = skip_item(buf, pos, depth + 1)?;
            }
            Some(pos)
        }
        MAJOR_MAP => {
            for _ in 0..arg {
                pos = skip_item(buf, pos, depth + 1)?;
                pos = skip_item(buf, pos, depth + 1)?;
            }
            Some(pos)
        }
        // false, true, null
        MAJOR_SIMPLE if (20..=22).contains(&(head & 0x1f)) => Some(pos),
        _ => None,
    }
}

fn read_argument(buf: &[u8], pos: usize, info: u8) -> Option<(u64, usize)> {
    let width = match info {
        0..=23 => return Some((info as u64, pos)),
        24 => 1,
        25 => 2,
        26 => 4,
        27 => 8,
        _ => return None,
    };
    let bytes = buf.get(pos..pos + width)?;
    let value = bytes.iter().fold(0u64, |acc, b| (acc << 8) | *b as u64);
    Some((value, pos + width))
}
