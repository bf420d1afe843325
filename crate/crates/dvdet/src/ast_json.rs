//! Reading solc-typed-ast JSON into syntax trees.
//!
//! A JSON object is an AST node when it carries both `id` and `nodeType`.
//! Child nodes are found under any key (the key becomes the child's role),
//! either directly or inside arrays, in document order. Scalar members become
//! node fields; `typeDescriptions.typeString` is lifted to a `typeString`
//! field. Other nested objects and scalar arrays are ignored.

use dvdet_core::ast::{AstNode, AstTree, Scalar};
use dvdet_core::Error as CoreError;
use serde_json::{Map, Value};

fn ast_error(path: &str, reason: impl Into<String>) -> CoreError {
    CoreError::Ast {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Parses AST JSON; `source` (the `.sol` text) enables per-node excerpts
/// from the `src` ranges.
pub fn parse_ast(json: &str, source: Option<&str>) -> Result<AstTree, CoreError> {
    let value: Value = serde_json::from_str(json).map_err(|e| ast_error("$", format!("invalid JSON: {e}")))?;
    let root = value
        .as_object()
        .ok_or_else(|| ast_error("$", "top level is not an object"))?;
    let mut nodes = Vec::new();
    let root_id = collect(root, "$", None, source, &mut nodes)?;
    AstTree::new(root_id, nodes)
}

fn node_id(obj: &Map<String, Value>, path: &str) -> Result<Option<i64>, CoreError> {
    match (obj.get("id"), obj.get("nodeType")) {
        (None, None) => Ok(None),
        (Some(id), Some(Value::String(_))) => id
            .as_i64()
            .map(Some)
            .ok_or_else(|| ast_error(path, "`id` is not an integer")),
        (Some(_), Some(_)) => Err(ast_error(path, "`nodeType` is not a string")),
        (None, Some(_)) => Err(ast_error(path, "node without `id`")),
        (Some(_), None) => Err(ast_error(path, "node without `nodeType`")),
    }
}

fn collect(
    obj: &Map<String, Value>,
    path: &str,
    role: Option<&str>,
    source: Option<&str>,
    out: &mut Vec<AstNode>,
) -> Result<i64, CoreError> {
    let id = match node_id(obj, path)? {
        Some(id) => id,
        None if obj.is_empty() => return Err(ast_error(path, "empty object is not an AST node")),
        None => return Err(ast_error(path, "missing `id` and `nodeType`")),
    };
    let node_type = obj["nodeType"].as_str().expect("checked by node_id");
    let mut node = AstNode::new(id, node_type);
    node.role = role.map(str::to_string);
    let slot = out.len();
    out.push(AstNode::new(id, node_type));

    for (key, value) in obj {
        if key == "id" || key == "nodeType" {
            continue;
        }
        let child_path = format!("{path}.{key}");
        match value {
            Value::Bool(b) => {
                node.fields.insert(key.clone(), Scalar::Bool(*b));
            }
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    node.fields.insert(key.clone(), Scalar::Int(i));
                }
            }
            Value::String(s) => {
                node.fields.insert(key.clone(), Scalar::Str(s.clone()));
            }
            Value::Object(inner) => {
                if node_id(inner, &child_path)?.is_some() {
                    node.children.push(collect(inner, &child_path, Some(key), source, out)?);
                } else if key == "typeDescriptions" {
                    if let Some(Value::String(t)) = inner.get("typeString") {
                        node.fields.insert("typeString".into(), Scalar::Str(t.clone()));
                    }
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let Value::Object(inner) = item {
                        let item_path = format!("{child_path}[{i}]");
                        if node_id(inner, &item_path)?.is_some() {
                            node.children.push(collect(inner, &item_path, Some(key), source, out)?);
                        }
                    }
                }
            }
            Value::Null => {}
        }
    }
    if let (Some(src), Some(Scalar::Str(range))) = (source, node.fields.get("src")) {
        node.source_text = excerpt(src, range);
    }
    out[slot] = node;
    Ok(id)
}

/// Slice of `source` named by a solc `start:length:file` range (byte offsets).
fn excerpt(source: &str, range: &str) -> Option<String> {
    let mut parts = range.split(':');
    let start: usize = parts.next()?.parse().ok()?;
    let len: usize = parts.next()?.parse().ok()?;
    source.as_bytes().get(start..start.checked_add(len)?).map(|b| String::from_utf8_lossy(b).into_owned())
}
