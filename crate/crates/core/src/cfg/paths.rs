use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ControlFlowGraph;

/// One depth-first traversal from the entry, flattened to mnemonics.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlFlowPath {
    pub block_ids: Vec<usize>,
    pub opcodes: Vec<String>,
    /// The path was cut by `max_blocks_per_path`.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathLimits {
    pub max_paths: usize,
    pub max_blocks_per_path: usize,
}

impl Default for PathLimits {
    fn default() -> Self {
        PathLimits {
            max_paths: 32,
            max_blocks_per_path: 256,
        }
    }
}

struct Frame {
    id: usize,
    children: Vec<usize>,
    next: usize,
}

/// Enumerates entry-to-leaf paths depth first.
///
/// A block appears at most once per path, so loop bodies are walked once. A
/// path ends at a block whose successors are all already on the path (or
/// that has none); the unresolved-jump sink has none. Children are visited
/// in ascending start-offset order. Limits of zero are treated as one.
pub fn extract_paths(cfg: &ControlFlowGraph, limits: PathLimits) -> Vec<ControlFlowPath> {
    let max_paths = limits.max_paths.max(1);
    let max_blocks = limits.max_blocks_per_path.max(1);
    let mut paths = Vec::new();
    if !cfg.blocks.contains_key(&cfg.entry) {
        return paths;
    }

    let frame = |id: usize| -> Frame {
        let mut children: Vec<usize> = cfg.outgoing(id).map(|e| e.dst).collect();
        children.sort_by_key(|dst| (cfg.blocks[dst].start_offset, *dst));
        children.dedup();
        Frame { id, children, next: 0 }
    };

    let mut on_path = BTreeSet::from([cfg.entry]);
    let mut stack = Vec::from([frame(cfg.entry)]);

    while let Some(top) = stack.last_mut() {
        if top.next == 0 {
            let leaf = top.children.iter().all(|c| on_path.contains(c));
            if leaf || stack.len() >= max_blocks {
                paths.push(make_path(cfg, &stack, !leaf));
                if paths.len() >= max_paths {
                    break;
                }
                let done = stack.pop().expect("non-empty");
                on_path.remove(&done.id);
                continue;
            }
        }

        let top = stack.last_mut().expect("non-empty");
        let child = loop {
            match top.children.get(top.next) {
                Some(c) => {
                    top.next += 1;
                    if !on_path.contains(c) {
                        break Some(*c);
                    }
                }
                None => break None,
            }
        };
        match child {
            Some(c) => {
                on_path.insert(c);
                stack.push(frame(c));
            }
            None => {
                let done = stack.pop().expect("non-empty");
                on_path.remove(&done.id);
            }
        }
    }
    paths
}

fn make_path(cfg: &ControlFlowGraph, stack: &[Frame], truncated: bool) -> ControlFlowPath {
    let block_ids: Vec<usize> = stack.iter().map(|f| f.id).collect();
    let opcodes = block_ids
        .iter()
        .flat_map(|id| cfg.blocks[id].instructions.iter().map(|i| i.mnemonic.to_string()))
        .collect();
    ControlFlowPath {
        block_ids,
        opcodes,
        truncated,
    }
}
