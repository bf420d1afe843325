use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Scalar field value carried by an AST node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(untagged))]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AstNode {
    pub id: i64,
    pub node_type: String,
    pub fields: BTreeMap<String, Scalar>,
    /// The node's own source excerpt, when the source file was supplied.
    pub source_text: Option<String>,
    pub children: Vec<i64>,
    /// Name of the parent field this node sits under (`condition`, `body`, ...).
    pub role: Option<String>,
}

impl AstNode {
    pub fn new(id: i64, node_type: impl Into<String>) -> AstNode {
        AstNode {
            id,
            node_type: node_type.into(),
            fields: BTreeMap::new(),
            source_text: None,
            children: Vec::new(),
            role: None,
        }
    }

    pub fn with_field(mut self, key: &str, value: Scalar) -> AstNode {
        self.fields.insert(key.to_string(), value);
        self
    }

    pub fn field_str(&self, key: &str) -> Option<String> {
        self.fields.get(key).map(ToString::to_string)
    }
}

/// A validated tree: unique ids, every child exists, one parent per node, no
/// cycles, and every node reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstTree {
    /// Pre-order from the root.
    nodes: Vec<AstNode>,
    index: BTreeMap<i64, usize>,
    parents: Vec<Option<usize>>,
}

impl AstTree {
    pub fn new(root: i64, nodes: Vec<AstNode>) -> Result<AstTree> {
        let mut by_id: BTreeMap<i64, AstNode> = BTreeMap::new();
        for n in nodes {
            let id = n.id;
            if by_id.insert(id, n).is_some() {
                return Err(ast_error(id, "duplicate node id"));
            }
        }
        if !by_id.contains_key(&root) {
            return Err(ast_error(root, "root id not present"));
        }
        let mut parent_of: BTreeMap<i64, i64> = BTreeMap::new();
        for n in by_id.values() {
            for c in &n.children {
                if !by_id.contains_key(c) {
                    return Err(ast_error(n.id, &alloc::format!("child {c} does not exist")));
                }
                if *c == root {
                    return Err(ast_error(n.id, "root cannot be a child"));
                }
                if let Some(prev) = parent_of.insert(*c, n.id) {
                    return Err(ast_error(*c, &alloc::format!("has two parents ({prev} and {})", n.id)));
                }
            }
        }

        let total = by_id.len();
        let mut ordered = Vec::with_capacity(total);
        let mut parents = Vec::with_capacity(total);
        let mut index = BTreeMap::new();
        let mut stack = Vec::from([(root, None)]);
        while let Some((id, parent)) = stack.pop() {
            let node = by_id.remove(&id).ok_or_else(|| ast_error(id, "cycle detected"))?;
            index.insert(id, ordered.len());
            for c in node.children.iter().rev() {
                stack.push((*c, Some(ordered.len())));
            }
            parents.push(parent);
            ordered.push(node);
        }
        if let Some(orphan) = by_id.keys().next() {
            return Err(ast_error(*orphan, "not reachable from the root"));
        }
        Ok(AstTree {
            nodes: ordered,
            index,
            parents,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &AstNode {
        &self.nodes[0]
    }

    /// Nodes in pre-order.
    pub fn nodes(&self) -> &[AstNode] {
        &self.nodes
    }

    pub fn node(&self, pos: usize) -> &AstNode {
        &self.nodes[pos]
    }

    pub fn position(&self, id: i64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn get(&self, id: i64) -> Option<&AstNode> {
        self.position(id).map(|p| &self.nodes[p])
    }

    pub fn parent(&self, pos: usize) -> Option<usize> {
        self.parents[pos]
    }

    pub fn children(&self, pos: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[pos].children.iter().map(move |c| self.index[c])
    }

    /// Positions of `pos` and all its descendants, pre-order.
    pub fn subtree(&self, pos: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = Vec::from([pos]);
        while let Some(p) = stack.pop() {
            out.push(p);
            let kids: Vec<usize> = self.children(p).collect();
            stack.extend(kids.into_iter().rev());
        }
        out
    }

    /// Structural equality of two subtrees: node types, fields and the
    /// shape of the children, ignoring ids, roles and source text.
    pub fn subtree_eq(&self, a: usize, b: usize) -> bool {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        na.node_type == nb.node_type
            && na.fields == nb.fields
            && na.children.len() == nb.children.len()
            && self
                .children(a)
                .zip(self.children(b))
                .all(|(x, y)| self.subtree_eq(x, y))
    }

    /// Applies `f` to every node, keeping structure.
    pub fn map_nodes(mut self, mut f: impl FnMut(AstNode) -> AstNode) -> AstTree {
        self.nodes = self
            .nodes
            .into_iter()
            .map(|n| {
                let (id, children) = (n.id, n.children.clone());
                let mut m = f(n);
                m.id = id;
                m.children = children;
                m
            })
            .collect();
        self
    }
}

fn ast_error(id: i64, reason: &str) -> Error {
    Error::Ast {
        path: alloc::format!("node {id}"),
        reason: reason.to_string(),
    }
}
