use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{BasicBlock, ControlFlowGraph, Edge, EdgeKind, Terminator};
use crate::evm::opcode::JUMPDEST;
use crate::evm::Instruction;

/// Splits `instructions` into basic blocks and connects them.
///
/// Never fails: jumps to anything other than a `JUMPDEST` reached through an
/// immediately preceding PUSH become `Unresolved` edges into a sink block.
pub fn build_cfg(instructions: &[Instruction]) -> ControlFlowGraph {
    if instructions.is_empty() {
        let entry = BasicBlock {
            id: 0,
            start_offset: 0,
            instructions: Vec::new(),
            terminator: Terminator::Fallthrough,
            synthetic: false,
        };
        return ControlFlowGraph {
            blocks: BTreeMap::from([(0, entry)]),
            edges: Vec::new(),
            entry: 0,
        };
    }

    let blocks = split_blocks(instructions);
    let by_offset: BTreeMap<usize, usize> = blocks.iter().map(|b| (b.start_offset, b.id)).collect();
    let jumpdests: BTreeSet<usize> = instructions
        .iter()
        .filter(|i| i.opcode == JUMPDEST)
        .map(|i| i.offset)
        .collect();

    let mut edges = BTreeSet::new();
    let mut needs_sink = false;
    let sink_id = blocks.len();

    for (idx, block) in blocks.iter().enumerate() {
        let next = blocks.get(idx + 1).map(|b| b.id);
        match block.terminator {
            Terminator::Jump | Terminator::Jumpi => {
                let (dst, kind) = match resolve_target(block, &jumpdests) {
                    Some(target) => (
                        by_offset[&target],
                        if block.terminator == Terminator::Jump {
                            EdgeKind::Jump
                        } else {
                            EdgeKind::BranchTaken
                        },
                    ),
                    None => {
                        needs_sink = true;
                        (sink_id, EdgeKind::Unresolved)
                    }
                };
                edges.insert(Edge { src: block.id, dst, kind });
                if block.terminator == Terminator::Jumpi {
                    if let Some(next) = next {
                        edges.insert(Edge {
                            src: block.id,
                            dst: next,
                            kind: EdgeKind::BranchNotTaken,
                        });
                    }
                }
            }
            Terminator::Fallthrough => {
                if let Some(next) = next {
                    edges.insert(Edge {
                        src: block.id,
                        dst: next,
                        kind: EdgeKind::Fallthrough,
                    });
                }
            }
            _ => {}
        }
    }

    let code_end = instructions.last().map_or(0, |i| i.offset + i.size());
    let mut map: BTreeMap<usize, BasicBlock> = blocks.into_iter().map(|b| (b.id, b)).collect();
    if needs_sink {
        map.insert(
            sink_id,
            BasicBlock {
                id: sink_id,
                start_offset: code_end,
                instructions: Vec::new(),
                terminator: Terminator::Invalid,
                synthetic: true,
            },
        );
    }

    ControlFlowGraph {
        blocks: map,
        edges: edges.into_iter().collect(),
        entry: 0,
    }
}

fn split_blocks(instructions: &[Instruction]) -> Vec<BasicBlock> {
    let mut blocks: Vec<BasicBlock> = Vec::new();
    let mut current: Vec<Instruction> = Vec::new();

    let mut close = |current: &mut Vec<Instruction>, terminator: Terminator| {
        let id = blocks.len();
        blocks.push(BasicBlock {
            id,
            start_offset: current[0].offset,
            instructions: core::mem::take(current),
            terminator,
            synthetic: false,
        });
    };

    for ins in instructions {
        if ins.opcode == JUMPDEST && !current.is_empty() {
            close(&mut current, Terminator::Fallthrough);
        }
        current.push(ins.clone());
        if let Some(t) = Terminator::of(ins) {
            close(&mut current, t);
        }
    }
    if !current.is_empty() {
        close(&mut current, Terminator::Fallthrough);
    }
    blocks
}

fn resolve_target(block: &BasicBlock, jumpdests: &BTreeSet<usize>) -> Option<usize> {
    let n = block.instructions.len();
    if n < 2 {
        return None;
    }
    let push = &block.instructions[n - 2];
    if !push.is_push() {
        return None;
    }
    push.immediate_value().filter(|t| jumpdests.contains(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evm::{decode_hex_text, disassemble};
    use alloc::vec;

    fn cfg_of(hex: &str) -> ControlFlowGraph {
        build_cfg(&disassemble(&decode_hex_text(hex).unwrap()).instructions)
    }

    fn check_block_invariants(cfg: &ControlFlowGraph) {
        for b in cfg.blocks.values() {
            for (i, ins) in b.instructions.iter().enumerate() {
                if ins.opcode == JUMPDEST {
                    assert_eq!(i, 0, "JUMPDEST inside block {}", b.id);
                }
                if Terminator::of(ins).is_some() {
                    assert_eq!(i, b.instructions.len() - 1, "terminator inside block {}", b.id);
                }
            }
        }
        for e in &cfg.edges {
            assert!(cfg.blocks.contains_key(&e.src) && cfg.blocks.contains_key(&e.dst));
        }
    }

    #[test]
    fn straight_line_single_block() {
        // PUSH1 1, PUSH1 2, ADD, STOP
        let cfg = cfg_of("600160020100");
        assert_eq!(cfg.blocks.len(), 1);
        assert!(cfg.edges.is_empty());
        assert_eq!(cfg.blocks[&0].terminator, Terminator::Stop);
        check_block_invariants(&cfg);
    }

    #[test]
    fn conditional_branch_three_blocks() {
        // 0: PUSH1 0x01 (cond)  2: PUSH1 0x08 (target)  4: JUMPI
        // 5: PUSH1 0x00  7: STOP
        // 8: JUMPDEST  9: STOP
        let cfg = cfg_of("60016008576000005b00");
        check_block_invariants(&cfg);
        assert_eq!(cfg.blocks.len(), 3);
        let offsets: Vec<usize> = cfg.blocks.values().map(|b| b.start_offset).collect();
        assert_eq!(offsets, vec![0, 5, 8]);
        assert_eq!(
            cfg.edges,
            vec![
                Edge { src: 0, dst: 1, kind: EdgeKind::BranchNotTaken },
                Edge { src: 0, dst: 2, kind: EdgeKind::BranchTaken },
            ]
        );
    }

    #[test]
    fn dup_target_is_unresolved() {
        // PUSH1 0x05, DUP1, JUMP, JUMPDEST(5)... target comes from DUP1.
        let cfg = cfg_of("600580565b00");
        check_block_invariants(&cfg);
        let sink = cfg.sink().expect("sink present");
        let out: Vec<_> = cfg.outgoing(0).copied().collect();
        assert_eq!(out, vec![Edge { src: 0, dst: sink, kind: EdgeKind::Unresolved }]);
        assert!(cfg.blocks[&sink].instructions.is_empty());
    }

    #[test]
    fn jump_to_non_jumpdest_is_unresolved() {
        // PUSH1 0x04, JUMP, STOP, STOP: offset 4 is not a JUMPDEST
        let cfg = cfg_of("6004560000");
        assert_eq!(cfg.outgoing(0).next().unwrap().kind, EdgeKind::Unresolved);
    }

    #[test]
    fn jumpdest_starts_block_and_falls_through() {
        // PUSH1 0, JUMPDEST, POP, STOP
        let cfg = cfg_of("60005b5000");
        check_block_invariants(&cfg);
        assert_eq!(cfg.blocks.len(), 2);
        assert_eq!(cfg.blocks[&0].terminator, Terminator::Fallthrough);
        assert_eq!(cfg.edges, vec![Edge { src: 0, dst: 1, kind: EdgeKind::Fallthrough }]);
    }

    #[test]
    fn undefined_byte_terminates_block() {
        let cfg = cfg_of("60010c6002");
        assert_eq!(cfg.blocks.len(), 2);
        assert_eq!(cfg.blocks[&0].terminator, Terminator::Invalid);
        assert!(cfg.edges.is_empty());
    }

    #[test]
    fn empty_code_single_empty_entry() {
        let cfg = build_cfg(&[]);
        assert_eq!(cfg.blocks.len(), 1);
        assert!(cfg.blocks[&0].instructions.is_empty());
        assert_eq!(cfg.eliminate_dead_blocks(), cfg);
    }

    #[test]
    fn dead_block_after_stop_removed() {
        // PUSH1 1, STOP, JUMPDEST, STOP: the JUMPDEST block is never referenced.
        let cfg = cfg_of("6001005b00");
        assert_eq!(cfg.blocks.len(), 2);
        let live = cfg.eliminate_dead_blocks();
        assert_eq!(live.blocks.len(), 1);
        assert_eq!(live.entry, 0);
    }

    #[test]
    fn all_reachable_is_fixpoint() {
        let cfg = cfg_of("60016008576000005b00");
        assert_eq!(cfg.eliminate_dead_blocks(), cfg);
    }
}
