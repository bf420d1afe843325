use dvdet_core::ast::{build_weighted_graph, edge_weight, AstNode, AstTree, GraphOptions, ImportanceTier, VulnRuleSet};
use dvdet_core::embed::HashedEmbedder;
use proptest::prelude::*;

fn tier() -> impl Strategy<Value = ImportanceTier> {
    prop::sample::select(ImportanceTier::ALL.to_vec())
}

proptest! {
    #[test]
    fn symmetric_idempotent_monotone(a in tier(), b in tier(), c in tier()) {
        let (sa, sb) = (a.value(), b.value());
        prop_assert_eq!(edge_weight(sa, sb).unwrap(), edge_weight(sb, sa).unwrap());
        prop_assert_eq!(edge_weight(sa, sa).unwrap(), sa);
        // Downgrading an endpoint never raises the weight.
        if c.value() <= sa {
            prop_assert!(edge_weight(c.value(), sb).unwrap() <= edge_weight(sa, sb).unwrap());
        }
    }

    #[test]
    fn off_table_values_rejected(v in -10.0f64..10.0) {
        prop_assume!(ImportanceTier::from_value(v).is_none());
        prop_assert!(edge_weight(v, 1.0).is_err());
    }

    #[test]
    fn tree_graphs_have_n_minus_one_edges(parents in proptest::collection::vec(any::<prop::sample::Index>(), 0..30)) {
        let n = parents.len() + 1;
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            children[p.index(i + 1)].push(i as i64 + 1);
        }
        let types = ["IfStatement", "Identifier", "FunctionCall", "Literal", "ForStatement"];
        let nodes: Vec<AstNode> = (0..n)
            .map(|i| AstNode { children: children[i].clone(), ..AstNode::new(i as i64, types[i % types.len()]) })
            .collect();
        let tree = AstTree::new(0, nodes).unwrap();
        let g = build_weighted_graph(&tree, &VulnRuleSet::reentrancy(), &HashedEmbedder::new(8).unwrap(), GraphOptions::default()).unwrap();
        prop_assert_eq!(g.nodes.len(), n);
        prop_assert_eq!(g.edges.len(), n - 1);
        for e in &g.edges {
            let expected = g.nodes[e.u].tier.value().min(g.nodes[e.v].tier.value());
            prop_assert_eq!(e.weight, expected);
            prop_assert!([1.0, 1.25, 1.5, 2.0].contains(&e.weight));
        }
        let again = build_weighted_graph(&tree, &VulnRuleSet::reentrancy(), &HashedEmbedder::new(8).unwrap(), GraphOptions::default()).unwrap();
        prop_assert_eq!(g, again);
    }
}
