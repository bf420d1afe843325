mod support;

use std::collections::BTreeSet;

use dvdet_core::cfg::{build_cfg, extract_paths, PathLimits};
use dvdet_core::evm::disassemble;
use dvdet_core::nn::Rng;
use support::{all_paths, random_dag_program};

#[test]
fn dag_paths_match_brute_force() {
    let mut rng = Rng::new(0xDA6, 0);
    for case in 0..100 {
        let prog = random_dag_program(&mut rng, 8);
        let cfg = build_cfg(&disassemble(&prog.code).instructions).eliminate_dead_blocks();
        let limits = PathLimits {
            max_paths: 100_000,
            max_blocks_per_path: 256,
        };
        let got: BTreeSet<Vec<usize>> = extract_paths(&cfg, limits)
            .iter()
            .map(|p| p.block_ids.iter().map(|id| cfg.blocks[id].start_offset).collect())
            .collect();
        let expected: BTreeSet<Vec<usize>> = all_paths(&prog.successors, 0)
            .into_iter()
            .map(|p| p.into_iter().map(|b| prog.offsets[b]).collect())
            .collect();
        assert_eq!(got, expected, "case {case}: code {:02x?}", prog.code);
    }
}

#[test]
fn pruned_blocks_are_all_reachable() {
    let mut rng = Rng::new(0xB0B, 0);
    for _ in 0..50 {
        let prog = random_dag_program(&mut rng, 8);
        let cfg = build_cfg(&disassemble(&prog.code).instructions).eliminate_dead_blocks();
        // Breadth-first search over the edge list, independent of the library.
        let mut seen = BTreeSet::from([cfg.entry]);
        let mut frontier = vec![cfg.entry];
        while let Some(b) = frontier.pop() {
            for e in cfg.edges.iter().filter(|e| e.src == b) {
                if seen.insert(e.dst) {
                    frontier.push(e.dst);
                }
            }
        }
        assert_eq!(seen, cfg.blocks.keys().copied().collect());
    }
}

#[test]
fn path_opcodes_concatenate_blocks() {
    let mut rng = Rng::new(0xC0DE, 0);
    for _ in 0..50 {
        let prog = random_dag_program(&mut rng, 8);
        let cfg = build_cfg(&disassemble(&prog.code).instructions).eliminate_dead_blocks();
        for p in extract_paths(&cfg, PathLimits::default()) {
            let total: usize = p.block_ids.iter().map(|id| cfg.blocks[id].instructions.len()).sum();
            assert_eq!(total, p.opcodes.len());
            assert_eq!(p.block_ids[0], cfg.entry);
            for w in p.block_ids.windows(2) {
                assert!(cfg.edges.iter().any(|e| e.src == w[0] && e.dst == w[1]));
            }
        }
    }
}
