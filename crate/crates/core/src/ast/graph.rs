use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{classify_tree, AstTree, ImportanceTier, VulnRuleSet};
use crate::embed::NodeEmbedder;
use crate::error::{dimension, domain};
use crate::nn::Tensor;
use crate::Result;

/// Importance weight of an edge: the smaller endpoint tier value.
pub fn edge_weight(s_i: f64, s_j: f64) -> Result<f64> {
    for s in [s_i, s_j] {
        if ImportanceTier::from_value(s).is_none() {
            return Err(domain(format!("{s} is not a tier value (2, 1.5, 1.25, 1)")));
        }
    }
    Ok(if s_i <= s_j { s_i } else { s_j })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphNode {
    /// Id of the originating AST node.
    pub ast_id: i64,
    pub node_type: String,
    pub tier: ImportanceTier,
}

/// Undirected edge between node indices `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct GraphOptions {
    /// Also link consecutive statements of a block, approximating
    /// straight-line control flow.
    pub sibling_edges: bool,
}

/// Node-importance-weighted contract graph: nodes, undirected edges, one
/// feature row per node and one weight per edge.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedCodeGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<WeightedEdge>,
    pub features: Tensor,
}

const BLOCK_TYPES: [&str; 2] = ["Block", "UncheckedBlock"];

impl WeightedCodeGraph {
    /// Assembles a graph from tiers, index pairs and features, computing every
    /// edge weight from the endpoint tiers.
    pub fn from_parts(nodes: Vec<GraphNode>, pairs: &[(usize, usize)], features: Tensor) -> Result<WeightedCodeGraph> {
        let n = nodes.len();
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b {
                return Err(domain(format!("edge ({a}, {b}) is invalid for {n} nodes")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            let weight = edge_weight(nodes[u].tier.value(), nodes[v].tier.value())?;
            edges.push(WeightedEdge { u, v, weight });
        }
        edges.sort_by_key(|e| (e.u, e.v));
        edges.dedup_by_key(|e| (e.u, e.v));
        let graph = WeightedCodeGraph { nodes, edges, features };
        graph.validate()?;
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Checks feature shape, edge endpoints and that every weight equals the
    /// smaller endpoint tier value.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.features.shape().len() != 2 || self.features.rows() != n {
            return Err(dimension(format!(
                "feature matrix {:?} does not have one row per node ({n})",
                self.features.shape()
            )));
        }
        for e in &self.edges {
            if e.u >= e.v || e.v >= n {
                return Err(domain(format!("edge ({}, {}) is invalid for {n} nodes", e.u, e.v)));
            }
            let expected = edge_weight(self.nodes[e.u].tier.value(), self.nodes[e.v].tier.value())?;
            if e.weight != expected {
                return Err(domain(format!(
                    "edge ({}, {}) has weight {}, endpoint tiers give {expected}",
                    e.u, e.v, e.weight
                )));
            }
        }
        Ok(())
    }

    /// For each node, its neighbours with edge weights, followed by a
    /// self-loop weighted by the node's own tier value.
    pub fn neighborhoods(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out: Vec<Vec<(usize, f64)>> = (0..self.nodes.len()).map(|_| Vec::new()).collect();
        for e in &self.edges {
            out[e.u].push((e.v, e.weight));
            out[e.v].push((e.u, e.weight));
        }
        for (i, nb) in out.iter_mut().enumerate() {
            nb.push((i, self.nodes[i].tier.value()));
        }
        out
    }
}

/// Turns a (filtered) tree into the weighted graph: one node per AST node in
/// pre-order, parent–child edges (plus optional statement-sequence edges),
/// tiers from `rules` and feature rows from `embedder`.
pub fn build_weighted_graph(
    tree: &AstTree,
    rules: &VulnRuleSet,
    embedder: &dyn NodeEmbedder,
    options: GraphOptions,
) -> Result<WeightedCodeGraph> {
    let tiers = classify_tree(tree, rules);
    let dim = embedder.dim();
    let mut data = Vec::with_capacity(tree.len() * dim);
    let mut nodes = Vec::with_capacity(tree.len());
    for (pos, node) in tree.nodes().iter().enumerate() {
        let row = embedder.embed(node);
        if row.len() != dim {
            return Err(dimension(format!(
                "embedding for node {} has width {}, expected {dim}",
                node.id,
                row.len()
            )));
        }
        data.extend_from_slice(&row);
        nodes.push(GraphNode {
            ast_id: node.id,
            node_type: node.node_type.clone(),
            tier: tiers[pos],
        });
    }
    let features = Tensor::from_vec(&[tree.len(), dim], data)?;

    let mut pairs = Vec::new();
    for pos in 0..tree.len() {
        if let Some(p) = tree.parent(pos) {
            pairs.push((p, pos));
        }
        if options.sibling_edges && BLOCK_TYPES.contains(&tree.node(pos).node_type.as_str()) {
            let kids: Vec<usize> = tree.children(pos).collect();
            pairs.extend(kids.windows(2).map(|w| (w[0], w[1])));
        }
    }
    WeightedCodeGraph::from_parts(nodes, &pairs, features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{AstNode, NodeMatcher};
    use crate::embed::HashedEmbedder;
    use alloc::vec;

    fn chain_rules() -> VulnRuleSet {
        VulnRuleSet {
            vuln_id: "test".into(),
            note: String::new(),
            core_patterns: vec![NodeMatcher::of_type("A")],
            sub_core_patterns: vec![],
            auxiliary_patterns: vec![NodeMatcher::of_type("B")],
            same_function_duplicates: false,
        }
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(2.0, 1.25).unwrap(), 1.25);
        assert_eq!(edge_weight(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(edge_weight(1.5, 2.0).unwrap(), 1.5);
        assert!(edge_weight(3.0, 1.0).is_err());
        assert!(edge_weight(1.0, f64::NAN).is_err());
    }

    #[test]
    fn chain_graph() {
        let nodes = vec![
            AstNode { children: vec![2], ..AstNode::new(1, "A") },
            AstNode { children: vec![3], ..AstNode::new(2, "B") },
            AstNode::new(3, "C"),
        ];
        let tree = AstTree::new(1, nodes).unwrap();
        let e = HashedEmbedder::new(4).unwrap();
        let g = build_weighted_graph(&tree, &chain_rules(), &e, GraphOptions::default()).unwrap();
        let w: Vec<_> = g.edges.iter().map(|e| (e.u, e.v, e.weight)).collect();
        assert_eq!(w, vec![(0, 1, 1.25), (1, 2, 1.0)]);
        assert_eq!(g.features.shape(), &[3, 4]);
        let nb = g.neighborhoods();
        assert_eq!(nb[0], vec![(1, 1.25), (0, 2.0)]);
        assert_eq!(nb[1], vec![(0, 1.25), (2, 1.0), (1, 1.25)]);
    }

    #[test]
    fn sibling_edges_link_statements() {
        let nodes = vec![
            AstNode { children: vec![2, 3, 4], ..AstNode::new(1, "Block") },
            AstNode::new(2, "ExpressionStatement"),
            AstNode::new(3, "ExpressionStatement"),
            AstNode::new(4, "Return"),
        ];
        let tree = AstTree::new(1, nodes).unwrap();
        let e = HashedEmbedder::new(2).unwrap();
        let plain = build_weighted_graph(&tree, &chain_rules(), &e, GraphOptions::default()).unwrap();
        assert_eq!(plain.edges.len(), 3);
        let with = build_weighted_graph(&tree, &chain_rules(), &e, GraphOptions { sibling_edges: true }).unwrap();
        let pairs: Vec<_> = with.edges.iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]);
    }

    struct Ragged;
    impl NodeEmbedder for Ragged {
        fn dim(&self) -> usize {
            3
        }
        fn embed(&self, node: &AstNode) -> Vec<f64> {
            vec![0.0; if node.id == 2 { 2 } else { 3 }]
        }
    }

    #[test]
    fn ragged_embedder_rejected() {
        let nodes = vec![AstNode { children: vec![2], ..AstNode::new(1, "A") }, AstNode::new(2, "B")];
        let tree = AstTree::new(1, nodes).unwrap();
        let err = build_weighted_graph(&tree, &chain_rules(), &Ragged, GraphOptions::default());
        assert!(matches!(err, Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn validate_catches_tampered_weight() {
        let nodes = vec![
            GraphNode { ast_id: 1, node_type: "A".into(), tier: ImportanceTier::Core },
            GraphNode { ast_id: 2, node_type: "B".into(), tier: ImportanceTier::SubCore },
        ];
        let mut g = WeightedCodeGraph::from_parts(nodes, &[(1, 0)], Tensor::zeros(&[2, 1])).unwrap();
        assert_eq!(g.edges[0].weight, 1.5);
        g.edges[0].weight = 2.0;
        assert!(g.validate().is_err());
    }
}
