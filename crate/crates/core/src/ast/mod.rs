//! Syntax trees, importance tiers and the weighted contract graph.
//!
//! The tree is built by the caller (the `dvdet` crate parses solc-typed-ast
//! JSON into [`AstNode`]s); this module validates it, trims node fields down
//! to a retention table, ranks nodes into four importance tiers and turns the
//! tree into an undirected graph whose edge weights are the smaller of the two
//! endpoint tier values.

mod filter;
mod graph;
mod importance;
mod tree;

pub use filter::RetentionTable;
pub use graph::{build_weighted_graph, edge_weight, GraphNode, GraphOptions, WeightedCodeGraph, WeightedEdge};
pub use importance::{classify_importance, classify_tree, ImportanceTier, NodeMatcher, VulnRuleSet};
pub use tree::{AstNode, AstTree, Scalar};
