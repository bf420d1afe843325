//! Basic-block control flow graphs over decoded bytecode.
//!
//! Blocks start at offset 0, at every `JUMPDEST` and after every terminator.
//! A jump is resolved only when the instruction right before it is a PUSH
//! whose immediate is the offset of a `JUMPDEST`; anything else becomes an
//! `Unresolved` edge into a single synthetic sink block.

mod build;
mod paths;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::evm::Instruction;

pub use build::build_cfg;
pub use paths::{extract_paths, ControlFlowPath, PathLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "UPPERCASE"))]
pub enum Terminator {
    Jump,
    Jumpi,
    Stop,
    Return,
    Revert,
    SelfDestruct,
    Invalid,
    /// The block runs into the next leader without a control transfer.
    Fallthrough,
}

impl Terminator {
    /// Terminator for an instruction, if it ends a block.
    pub fn of(ins: &Instruction) -> Option<Terminator> {
        use crate::evm::opcode::*;
        if !ins.is_valid {
            return Some(Terminator::Invalid);
        }
        match ins.opcode {
            JUMP => Some(Terminator::Jump),
            JUMPI => Some(Terminator::Jumpi),
            STOP => Some(Terminator::Stop),
            RETURN => Some(Terminator::Return),
            REVERT => Some(Terminator::Revert),
            SELFDESTRUCT => Some(Terminator::SelfDestruct),
            INVALID => Some(Terminator::Invalid),
            _ => None,
        }
    }

    pub fn halts(self) -> bool {
        matches!(
            self,
            Terminator::Stop
                | Terminator::Return
                | Terminator::Revert
                | Terminator::SelfDestruct
                | Terminator::Invalid
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BasicBlock {
    pub id: usize,
    pub start_offset: usize,
    pub instructions: Vec<Instruction>,
    pub terminator: Terminator,
    /// Set only on the sink that collects unresolved jumps.
    pub synthetic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "kebab-case"))]
pub enum EdgeKind {
    Jump,
    Fallthrough,
    BranchTaken,
    BranchNotTaken,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ControlFlowGraph {
    pub blocks: BTreeMap<usize, BasicBlock>,
    /// Sorted by `(src, dst, kind)`, no duplicates.
    pub edges: Vec<Edge>,
    pub entry: usize,
}

impl ControlFlowGraph {
    pub fn block(&self, id: usize) -> Option<&BasicBlock> {
        self.blocks.get(&id)
    }

    pub fn outgoing(&self, id: usize) -> impl Iterator<Item = &Edge> + '_ {
        let start = self.edges.partition_point(|e| e.src < id);
        self.edges[start..].iter().take_while(move |e| e.src == id)
    }

    pub fn sink(&self) -> Option<usize> {
        self.blocks.values().find(|b| b.synthetic).map(|b| b.id)
    }

    pub fn instruction_count(&self) -> usize {
        self.blocks.values().map(|b| b.instructions.len()).sum()
    }

    /// Ids reachable from the entry, in ascending order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = BTreeMap::new();
        let mut stack = Vec::new();
        if self.blocks.contains_key(&self.entry) {
            stack.push(self.entry);
        }
        while let Some(id) = stack.pop() {
            if seen.insert(id, ()).is_some() {
                continue;
            }
            for e in self.outgoing(id) {
                if !seen.contains_key(&e.dst) {
                    stack.push(e.dst);
                }
            }
        }
        seen.into_keys().collect()
    }

    /// Keeps only the blocks reachable from the entry, and the edges between them.
    pub fn eliminate_dead_blocks(&self) -> ControlFlowGraph {
        let live = self.reachable();
        let blocks = live
            .iter()
            .map(|id| (*id, self.blocks[id].clone()))
            .collect::<BTreeMap<_, _>>();
        let edges = self
            .edges
            .iter()
            .filter(|e| blocks.contains_key(&e.src) && blocks.contains_key(&e.dst))
            .copied()
            .collect();
        ControlFlowGraph {
            blocks,
            edges,
            entry: self.entry,
        }
    }
}

/// Free-function form of [`ControlFlowGraph::eliminate_dead_blocks`].
pub fn eliminate_dead_blocks(cfg: &ControlFlowGraph) -> ControlFlowGraph {
    cfg.eliminate_dead_blocks()
}
