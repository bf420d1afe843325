//! Text renderings of the intermediate stages.

use std::fmt::Write as _;

use dvdet_core::ast::WeightedCodeGraph;
use dvdet_core::cfg::{ControlFlowGraph, ControlFlowPath, EdgeKind};
use dvdet_core::evm::Instruction;
use serde_json::json;

/// One JSON object per instruction, newline-terminated.
pub fn disasm_jsonl(instructions: &[Instruction]) -> String {
    let mut out = String::new();
    for ins in instructions {
        let line = json!({
            "offset": ins.offset,
            "opcode": format!("0x{:02x}", ins.opcode),
            "mnemonic": ins.mnemonic,
            "immediate": ins.immediate.as_ref().map(|b| format!("0x{}", hex_string(b))),
            "valid": ins.is_valid,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

fn edge_kind(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Jump => "jump",
        EdgeKind::Fallthrough => "fallthrough",
        EdgeKind::BranchTaken => "branch-taken",
        EdgeKind::BranchNotTaken => "branch-not-taken",
        EdgeKind::Unresolved => "unresolved",
    }
}

pub fn cfg_json(cfg: &ControlFlowGraph) -> String {
    let blocks: Vec<_> = cfg
        .blocks
        .values()
        .map(|b| {
            json!({
                "id": b.id,
                "start": b.start_offset,
                "terminator": format!("{:?}", b.terminator).to_uppercase(),
                "synthetic": b.synthetic,
                "instructions": b.instructions.iter().map(|i| i.mnemonic).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<_> = cfg
        .edges
        .iter()
        .map(|e| json!({"src": e.src, "dst": e.dst, "kind": edge_kind(e.kind)}))
        .collect();
    let doc = json!({"entry": cfg.entry, "blocks": blocks, "edges": edges});
    format!("{doc:#}\n")
}

pub fn cfg_dot(cfg: &ControlFlowGraph) -> String {
    let mut out = String::from("digraph cfg {\n  node [shape=box, fontname=monospace];\n");
    for b in cfg.blocks.values() {
        let label = if b.synthetic {
            "unresolved sink".to_string()
        } else {
            let body: Vec<String> = b.instructions.iter().map(|i| format!("{i}").trim().to_string()).collect();
            body.join("\\l") + "\\l"
        };
        writeln!(out, "  b{} [label=\"{}\"];", b.id, label.replace('"', "\\\"")).unwrap();
    }
    for e in &cfg.edges {
        writeln!(out, "  b{} -> b{} [label=\"{}\"];", e.src, e.dst, edge_kind(e.kind)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// One space-separated mnemonic sequence per line.
pub fn paths_text(paths: &[ControlFlowPath]) -> String {
    paths.iter().map(|p| p.opcodes.join(" ") + "\n").collect()
}

/// Nodes reference their feature row by index rather than inlining it.
pub fn graph_json(graph: &WeightedCodeGraph) -> String {
    let nodes: Vec<_> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "index": i,
                "ast_id": n.ast_id,
                "type": n.node_type,
                "tier": n.tier.name(),
                "importance": n.tier.value(),
                "feature_row": i,
            })
        })
        .collect();
    let edges: Vec<_> = graph
        .edges
        .iter()
        .map(|e| json!({"u": e.u, "v": e.v, "weight": e.weight}))
        .collect();
    let doc = json!({"feature_dim": graph.feature_dim(), "nodes": nodes, "edges": edges});
    format!("{doc:#}\n")
}

/// `key<TAB>v1<TAB>v2…` rows, the same layout external vectors are read in.
pub fn vectors_tsv<'a>(rows: impl IntoIterator<Item = (String, &'a [f64])>) -> String {
    let mut out = String::new();
    for (key, values) in rows {
        out.push_str(&key);
        for v in values {
            write!(out, "\t{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
