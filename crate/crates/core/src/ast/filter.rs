use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AstNode, AstTree};

/// Which scalar fields survive filtering, per node type.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RetentionTable {
    /// Fields kept for every node type in `known_types` without an override.
    pub default_fields: Vec<String>,
    pub known_types: BTreeSet<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub overrides: BTreeMap<String, Vec<String>>,
    /// Fields kept for node types missing from both lists.
    pub fallback_fields: Vec<String>,
}

const SOLIDITY_NODE_TYPES: &[&str] = &[
    "ArrayTypeName",
    "Assignment",
    "BinaryOperation",
    "Block",
    "Break",
    "Conditional",
    "Continue",
    "ContractDefinition",
    "DoWhileStatement",
    "ElementaryTypeName",
    "ElementaryTypeNameExpression",
    "EmitStatement",
    "EnumDefinition",
    "EnumValue",
    "ErrorDefinition",
    "EventDefinition",
    "ExpressionStatement",
    "ForStatement",
    "FunctionCall",
    "FunctionCallOptions",
    "FunctionDefinition",
    "FunctionTypeName",
    "Identifier",
    "IdentifierPath",
    "IfStatement",
    "ImportDirective",
    "IndexAccess",
    "IndexRangeAccess",
    "InheritanceSpecifier",
    "InlineAssembly",
    "Literal",
    "Mapping",
    "MemberAccess",
    "ModifierDefinition",
    "ModifierInvocation",
    "NewExpression",
    "OverrideSpecifier",
    "ParameterList",
    "PlaceholderStatement",
    "PragmaDirective",
    "Return",
    "RevertStatement",
    "SourceUnit",
    "StructDefinition",
    "StructuredDocumentation",
    "Throw",
    "TryCatchClause",
    "TryStatement",
    "TupleExpression",
    "UnaryOperation",
    "UncheckedBlock",
    "UserDefinedTypeName",
    "UserDefinedValueTypeDefinition",
    "UsingForDirective",
    "VariableDeclaration",
    "VariableDeclarationStatement",
    "WhileStatement",
];

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl RetentionTable {
    /// The built-in table: contract definitions keep `name`, `kind`,
    /// `abstract` and `fullyImplemented`; other Solidity node types keep
    /// `name`, `kind`, `operator`, `memberName` and `typeString` where
    /// present; unknown types keep `name`.
    pub fn standard() -> RetentionTable {
        RetentionTable {
            default_fields: strings(&["name", "kind", "operator", "memberName", "typeString"]),
            known_types: SOLIDITY_NODE_TYPES.iter().map(|s| s.to_string()).collect(),
            overrides: BTreeMap::from([(
                "ContractDefinition".to_string(),
                strings(&["name", "kind", "abstract", "fullyImplemented"]),
            )]),
            fallback_fields: strings(&["name"]),
        }
    }

    pub fn fields_for(&self, node_type: &str) -> &[String] {
        if let Some(fields) = self.overrides.get(node_type) {
            fields
        } else if self.known_types.contains(node_type) {
            &self.default_fields
        } else {
            &self.fallback_fields
        }
    }

    /// Drops every field not retained for the node's type.
    pub fn filter_node_fields(&self, mut node: AstNode) -> AstNode {
        let keep = self.fields_for(&node.node_type);
        node.fields.retain(|k, _| keep.iter().any(|f| f == k));
        node
    }

    pub fn filter_tree(&self, tree: AstTree) -> AstTree {
        tree.map_nodes(|n| self.filter_node_fields(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Scalar;

    #[test]
    fn contract_definition_keeps_four_fields() {
        let raw = [
            ("name", Scalar::Str("Bank".into())),
            ("kind", Scalar::Str("contract".into())),
            ("abstract", Scalar::Bool(false)),
            ("fullyImplemented", Scalar::Bool(true)),
            ("scope", Scalar::Int(50)),
            ("src", Scalar::Str("0:10:0".into())),
            ("documentation", Scalar::Str("".into())),
            ("linearizedBaseContracts", Scalar::Str("[49]".into())),
            ("contractDependencies", Scalar::Str("[]".into())),
            ("usedErrors", Scalar::Str("[]".into())),
            ("usedEvents", Scalar::Str("[]".into())),
            ("nameLocation", Scalar::Str("9:4:0".into())),
        ];
        let mut node = AstNode::new(1, "ContractDefinition");
        for (k, v) in raw {
            node = node.with_field(k, v);
        }
        assert_eq!(node.fields.len(), 12);
        let kept = RetentionTable::standard().filter_node_fields(node);
        let keys: Vec<&str> = kept.fields.keys().map(String::as_str).collect();
        assert_eq!(keys, ["abstract", "fullyImplemented", "kind", "name"]);
    }

    #[test]
    fn node_without_retained_keys_is_empty() {
        let node = AstNode::new(2, "Block").with_field("src", Scalar::Str("1:2:0".into()));
        assert!(RetentionTable::standard().filter_node_fields(node).fields.is_empty());
    }

    #[test]
    fn unknown_type_keeps_name_only() {
        let node = AstNode::new(3, "YulFancyThing")
            .with_field("name", Scalar::Str("x".into()))
            .with_field("operator", Scalar::Str("+".into()));
        let kept = RetentionTable::standard().filter_node_fields(node);
        assert_eq!(kept.fields.len(), 1);
        assert_eq!(kept.field_str("name").as_deref(), Some("x"));
    }

    #[test]
    fn known_type_uses_defaults() {
        let node = AstNode::new(4, "MemberAccess")
            .with_field("memberName", Scalar::Str("value".into()))
            .with_field("typeString", Scalar::Str("uint256".into()))
            .with_field("referencedDeclaration", Scalar::Int(7));
        let kept = RetentionTable::standard().filter_node_fields(node);
        assert_eq!(kept.fields.len(), 2);
    }
}
