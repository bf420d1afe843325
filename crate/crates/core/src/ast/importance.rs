use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AstTree;
use crate::{Error, Result};

/// Four-level node importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum ImportanceTier {
    Core,
    SubCore,
    Auxiliary,
    Peripheral,
}

impl ImportanceTier {
    pub const ALL: [ImportanceTier; 4] = [
        ImportanceTier::Core,
        ImportanceTier::SubCore,
        ImportanceTier::Auxiliary,
        ImportanceTier::Peripheral,
    ];

    pub fn value(self) -> f64 {
        match self {
            ImportanceTier::Core => 2.0,
            ImportanceTier::SubCore => 1.5,
            ImportanceTier::Auxiliary => 1.25,
            ImportanceTier::Peripheral => 1.0,
        }
    }

    pub fn from_value(value: f64) -> Option<ImportanceTier> {
        ImportanceTier::ALL.into_iter().find(|t| t.value() == value)
    }

    pub fn name(self) -> &'static str {
        match self {
            ImportanceTier::Core => "core",
            ImportanceTier::SubCore => "sub_core",
            ImportanceTier::Auxiliary => "auxiliary",
            ImportanceTier::Peripheral => "peripheral",
        }
    }
}

/// Structural pattern over a node and its immediate neighbourhood.
///
/// Every constraint that is set must hold. A matcher with no constraints
/// matches nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct NodeMatcher {
    pub node_type: Option<String>,
    /// Exact matches against retained fields, compared as text.
    pub fields: BTreeMap<String, String>,
    /// Case-sensitive substring of the node's own source excerpt.
    pub text: Option<String>,
    /// Parent field name the node sits under.
    pub role: Option<String>,
    pub parent: Option<Box<NodeMatcher>>,
    /// Satisfied when any direct child matches.
    pub child: Option<Box<NodeMatcher>>,
}

impl NodeMatcher {
    pub fn of_type(node_type: &str) -> NodeMatcher {
        NodeMatcher {
            node_type: Some(node_type.to_string()),
            ..NodeMatcher::default()
        }
    }

    pub fn field(mut self, key: &str, value: &str) -> NodeMatcher {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    pub fn role(mut self, role: &str) -> NodeMatcher {
        self.role = Some(role.to_string());
        self
    }

    pub fn text(mut self, text: &str) -> NodeMatcher {
        self.text = Some(text.to_string());
        self
    }

    pub fn parent(mut self, parent: NodeMatcher) -> NodeMatcher {
        self.parent = Some(Box::new(parent));
        self
    }

    pub fn child(mut self, child: NodeMatcher) -> NodeMatcher {
        self.child = Some(Box::new(child));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.node_type.is_none()
            && self.fields.is_empty()
            && self.text.is_none()
            && self.role.is_none()
            && self.parent.is_none()
            && self.child.is_none()
    }

    pub fn matches(&self, tree: &AstTree, pos: usize) -> bool {
        if self.is_empty() {
            return false;
        }
        let node = tree.node(pos);
        if self.node_type.as_ref().is_some_and(|t| *t != node.node_type) {
            return false;
        }
        for (k, v) in &self.fields {
            match node.fields.get(k) {
                Some(actual) if actual.to_string() == *v => {}
                _ => return false,
            }
        }
        if let Some(text) = &self.text {
            match &node.source_text {
                Some(src) if src.contains(text.as_str()) => {}
                _ => return false,
            }
        }
        if self.role.is_some() && self.role != node.role {
            return false;
        }
        if let Some(p) = &self.parent {
            match tree.parent(pos) {
                Some(pp) if p.matches(tree, pp) => {}
                _ => return false,
            }
        }
        if let Some(c) = &self.child {
            if !tree.children(pos).any(|cp| c.matches(tree, cp)) {
                return false;
            }
        }
        true
    }
}

/// Per-vulnerability patterns for the three upper tiers.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VulnRuleSet {
    pub vuln_id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub note: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub core_patterns: Vec<NodeMatcher>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub sub_core_patterns: Vec<NodeMatcher>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub auxiliary_patterns: Vec<NodeMatcher>,
    /// Promote same-function copies of core/sub-core subtrees to auxiliary.
    #[cfg_attr(feature = "serde", serde(default = "default_true"))]
    pub same_function_duplicates: bool,
}

#[cfg(feature = "serde")]
fn default_true() -> bool {
    true
}

impl VulnRuleSet {
    /// Reentrancy: `call.value()` invocations are core; `require`, `if`
    /// conditions, `msg.sender` and balance accesses are sub-core;
    /// `if`/`while`/`do-while`/`for` statements (and the blocks of an `if`)
    /// are auxiliary.
    pub fn reentrancy() -> VulnRuleSet {
        let member = |name: &str| NodeMatcher::of_type("MemberAccess").field("memberName", name);
        let ident = |name: &str| NodeMatcher::of_type("Identifier").field("name", name);
        VulnRuleSet {
            vuln_id: "reentrancy".into(),
            note: String::new(),
            core_patterns: Vec::from([NodeMatcher::of_type("FunctionCall")
                .child(member("value").child(member("call")))]),
            sub_core_patterns: Vec::from([
                ident("require"),
                NodeMatcher::of_type("FunctionCall").child(ident("require")),
                NodeMatcher::default()
                    .role("condition")
                    .parent(NodeMatcher::of_type("IfStatement")),
                member("sender").child(ident("msg")),
                member("balance"),
                ident("balance"),
                ident("balances"),
            ]),
            auxiliary_patterns: Vec::from([
                NodeMatcher::of_type("IfStatement"),
                NodeMatcher::of_type("WhileStatement"),
                NodeMatcher::of_type("DoWhileStatement"),
                NodeMatcher::of_type("ForStatement"),
                NodeMatcher::of_type("Block").parent(NodeMatcher::of_type("IfStatement")),
            ]),
            same_function_duplicates: true,
        }
    }

    /// Rejects empty ids and matchers that could never fire.
    pub fn validate(&self) -> Result<()> {
        if self.vuln_id.is_empty() {
            return Err(Error::Config("rule set without vuln_id".into()));
        }
        let lists = [
            ("core", &self.core_patterns),
            ("sub_core", &self.sub_core_patterns),
            ("auxiliary", &self.auxiliary_patterns),
        ];
        for (tier, list) in lists {
            if let Some(i) = list.iter().position(NodeMatcher::is_empty) {
                return Err(Error::Config(alloc::format!(
                    "rule set `{}`: {tier} pattern {i} has no constraints",
                    self.vuln_id
                )));
            }
        }
        Ok(())
    }
}

/// Tier of a single node from the pattern lists alone: the first list with a
/// matching pattern wins, in core → sub-core → auxiliary order.
pub fn classify_importance(tree: &AstTree, pos: usize, rules: &VulnRuleSet) -> ImportanceTier {
    let hit = |list: &[NodeMatcher]| list.iter().any(|m| m.matches(tree, pos));
    if hit(&rules.core_patterns) {
        ImportanceTier::Core
    } else if hit(&rules.sub_core_patterns) {
        ImportanceTier::SubCore
    } else if hit(&rules.auxiliary_patterns) {
        ImportanceTier::Auxiliary
    } else {
        ImportanceTier::Peripheral
    }
}

const FUNCTION_SCOPES: [&str; 2] = ["FunctionDefinition", "ModifierDefinition"];

/// Tiers for every node (indexed by pre-order position), including the
/// same-function duplicate rule when the rule set enables it.
pub fn classify_tree(tree: &AstTree, rules: &VulnRuleSet) -> Vec<ImportanceTier> {
    let mut tiers: Vec<ImportanceTier> = (0..tree.len())
        .map(|pos| classify_importance(tree, pos, rules))
        .collect();
    if !rules.same_function_duplicates {
        return tiers;
    }
    for scope in 0..tree.len() {
        if !FUNCTION_SCOPES.contains(&tree.node(scope).node_type.as_str()) {
            continue;
        }
        let members = tree.subtree(scope);
        let anchors: Vec<usize> = members
            .iter()
            .copied()
            .filter(|p| matches!(tiers[*p], ImportanceTier::Core | ImportanceTier::SubCore))
            .collect();
        for &p in &members {
            if tiers[p] != ImportanceTier::Peripheral {
                continue;
            }
            if anchors.iter().any(|&a| a != p && tree.subtree_eq(p, a)) {
                tiers[p] = ImportanceTier::Auxiliary;
            }
        }
    }
    tiers
}
