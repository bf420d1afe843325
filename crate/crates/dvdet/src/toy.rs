//! Synthetic labelled contracts with class-specific motifs in both views,
//! for smoke tests, benchmarks and demos.
//!
//! Every contract is one function whose body carries its class's motif
//! (none for safe, `call.value` for reentrancy, an unchecked `send`, a
//! `tx.origin`-guarded `selfdestruct`) plus seeded filler statements. The
//! bytecode branches once; both arms carry an opcode motif of the class.

use std::path::{Path, PathBuf};

use dvdet_core::nn::Rng;
use serde_json::{json, Map, Value};

use crate::error::{Result, Stage, StageError};

#[derive(Debug, Clone, PartialEq)]
pub struct ToyContract {
    pub id: String,
    /// Index into the type-task class list.
    pub class: usize,
    pub label: String,
    pub ast: Value,
    pub bytecode: Vec<u8>,
}

/// Names of the toy classes, in label order.
pub const TOY_CLASSES: [&str; 4] = ["safe", "ReEn", "LoWc", "AcCl"];

struct Builder {
    next: i64,
}

impl Builder {
    fn node(&mut self, ty: &str, attrs: Value, children: Vec<(&str, Value)>) -> Value {
        let mut obj = Map::new();
        obj.insert("id".into(), json!(self.next));
        obj.insert("nodeType".into(), json!(ty));
        self.next += 1;
        if let Value::Object(a) = attrs {
            obj.extend(a);
        }
        for (k, v) in children {
            obj.insert(k.into(), v);
        }
        Value::Object(obj)
    }

    fn ident(&mut self, name: &str) -> Value {
        self.node("Identifier", json!({"name": name}), vec![])
    }

    fn member(&mut self, base: Value, member: &str) -> Value {
        self.node("MemberAccess", json!({"memberName": member}), vec![("expression", base)])
    }

    fn call(&mut self, callee: Value, args: Vec<Value>) -> Value {
        self.node("FunctionCall", json!({"kind": "functionCall"}), vec![("expression", callee), ("arguments", Value::Array(args))])
    }

    fn stmt(&mut self, expr: Value) -> Value {
        self.node("ExpressionStatement", json!({}), vec![("expression", expr)])
    }

    fn msg_sender(&mut self) -> Value {
        let msg = self.ident("msg");
        self.member(msg, "sender")
    }

    fn clear_balance(&mut self) -> Value {
        let base = self.ident("balances");
        let sender = self.msg_sender();
        let lhs = self.node("IndexAccess", json!({}), vec![("baseExpression", base), ("indexExpression", sender)]);
        let rhs = self.node("Literal", json!({"kind": "number", "value": "0"}), vec![]);
        let assign = self.node("Assignment", json!({"operator": "="}), vec![("leftHandSide", lhs), ("rightHandSide", rhs)]);
        self.stmt(assign)
    }

    fn filler(&mut self, rng: &mut Rng) -> Value {
        let name = format!("tmp{}", rng.below(1000));
        let ty = self.node("ElementaryTypeName", json!({"name": "uint256"}), vec![]);
        let decl = self.node("VariableDeclaration", json!({"name": name}), vec![("typeName", ty)]);
        let lit = self.node("Literal", json!({"kind": "number", "value": rng.below(100).to_string()}), vec![]);
        self.node(
            "VariableDeclarationStatement",
            json!({}),
            vec![("declarations", json!([decl])), ("initialValue", lit)],
        )
    }

    fn motif(&mut self, class: usize) -> Vec<Value> {
        match class {
            0 => {
                let clear = self.clear_balance();
                let sender = self.msg_sender();
                let payable = self.call(sender, vec![]);
                let transfer = self.member(payable, "transfer");
                let amount = self.ident("amount");
                let call = self.call(transfer, vec![amount]);
                vec![clear, self.stmt(call)]
            }
            1 => {
                let sender = self.msg_sender();
                let call = self.member(sender, "call");
                let value = self.member(call, "value");
                let amount = self.ident("amount");
                let inner = self.call(value, vec![amount]);
                let data = self.node("Literal", json!({"kind": "string", "value": ""}), vec![]);
                let outer = self.call(inner, vec![data]);
                let require = self.ident("require");
                let checked = self.call(require, vec![outer]);
                vec![self.stmt(checked), self.clear_balance()]
            }
            2 => {
                let to = self.ident("to");
                let send = self.member(to, "send");
                let amount = self.ident("amount");
                let call = self.call(send, vec![amount]);
                vec![self.stmt(call)]
            }
            _ => {
                let tx = self.ident("tx");
                let origin = self.member(tx, "origin");
                let owner = self.ident("owner");
                let cond = self.node(
                    "BinaryOperation",
                    json!({"operator": "=="}),
                    vec![("leftExpression", origin), ("rightExpression", owner)],
                );
                let kill = self.ident("selfdestruct");
                let owner = self.ident("owner");
                let call = self.call(kill, vec![owner]);
                let body_stmt = self.stmt(call);
                let body = self.node("Block", json!({}), vec![("statements", json!([body_stmt]))]);
                vec![self.node("IfStatement", json!({}), vec![("condition", cond), ("trueBody", body)])]
            }
        }
    }
}

const PUSH1: u8 = 0x60;
const JUMPI: u8 = 0x57;
const JUMPDEST: u8 = 0x5b;
const STOP: u8 = 0x00;

/// Opcode motifs per class for the two branch arms.
fn code_motif(class: usize) -> [&'static [u8]; 2] {
    match class {
        // CALLER SLOAD PUSH1 0 SSTORE / CALLER BALANCE POP
        0 => [&[0x33, 0x54, PUSH1, 0, 0x55], &[0x33, 0x31, 0x50]],
        // GAS CALL ISZERO / CALLER SSTORE
        1 => [&[0x5a, 0xf1, 0x15], &[0x33, 0x55]],
        // CALLER BALANCE CALL POP / GAS CALL POP
        2 => [&[0x33, 0x31, 0xf1, 0x50], &[0x5a, 0xf1, 0x50]],
        // ORIGIN CALLER EQ / ORIGIN SELFDESTRUCT
        _ => [&[0x32, 0x33, 0x14], &[0x32, 0xff]],
    }
}

fn toy_bytecode(class: usize, rng: &mut Rng) -> Vec<u8> {
    let [a, b] = code_motif(class);
    let mut code = vec![PUSH1, 0x80, PUSH1, 0x40, 0x52];
    // Seeded filler: CALLVALUE / CALLDATASIZE / POP noise.
    for _ in 0..rng.below(3) {
        code.extend_from_slice(&[[0x34, 0x50], [0x36, 0x50]][rng.below(2)]);
    }
    code.extend_from_slice(&[PUSH1, 0, 0x35]);
    let dest_at = code.len() + 1;
    code.extend_from_slice(&[PUSH1, 0, JUMPI]);
    code.extend_from_slice(a);
    code.push(STOP);
    code[dest_at] = code.len() as u8;
    code.push(JUMPDEST);
    code.extend_from_slice(b);
    code.push(STOP);
    code
}

/// One contract of `class` (an index into [`TOY_CLASSES`]).
pub fn toy_contract(id: &str, class: usize, seed: u64) -> ToyContract {
    let class = class.min(TOY_CLASSES.len() - 1);
    let mut rng = Rng::new(seed, 0);
    let mut b = Builder { next: 1 };
    let mut statements = Vec::new();
    for _ in 0..rng.below(3) {
        statements.push(b.filler(&mut rng));
    }
    statements.extend(b.motif(class));
    let body = b.node("Block", json!({}), vec![("statements", Value::Array(statements))]);
    let params = b.node("ParameterList", json!({}), vec![("parameters", json!([]))]);
    let function = b.node(
        "FunctionDefinition",
        json!({"name": format!("f{}", rng.below(4)), "kind": "function", "visibility": "public"}),
        vec![("parameters", params), ("body", body)],
    );
    let contract = b.node(
        "ContractDefinition",
        json!({"name": id, "contractKind": "contract", "abstract": false, "fullyImplemented": true}),
        vec![("nodes", json!([function]))],
    );
    let unit = b.node("SourceUnit", json!({"absolutePath": format!("{id}.sol")}), vec![("nodes", json!([contract]))]);
    ToyContract {
        id: id.to_string(),
        class,
        label: TOY_CLASSES[class].to_string(),
        ast: unit,
        bytecode: toy_bytecode(class, &mut rng),
    }
}

/// `per_class` contracts for each of the first `classes` toy classes,
/// interleaved by class.
pub fn toy_corpus(per_class: usize, classes: usize, seed: u64) -> Vec<ToyContract> {
    let classes = classes.clamp(1, TOY_CLASSES.len());
    let mut out = Vec::with_capacity(per_class * classes);
    for _ in 0..per_class {
        for c in 0..classes {
            let n = out.len();
            out.push(toy_contract(&format!("toy{n:03}"), c, seed.wrapping_mul(1_000_003).wrapping_add(n as u64)));
        }
    }
    out
}

/// Writes `<id>.ast.json`, `<id>.hex` and `manifest.jsonl` into `dir`;
/// returns the manifest path.
pub fn write_corpus(dir: &Path, contracts: &[ToyContract]) -> Result<PathBuf> {
    let io = |p: &Path, e| StageError::io(Stage::Output, p, e);
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut manifest = String::new();
    for c in contracts {
        let ast = dir.join(format!("{}.ast.json", c.id));
        std::fs::write(&ast, format!("{:#}\n", c.ast)).map_err(|e| io(&ast, e))?;
        let hex = dir.join(format!("{}.hex", c.id));
        let text: String = c.bytecode.iter().map(|b| format!("{b:02x}")).collect();
        std::fs::write(&hex, text + "\n").map_err(|e| io(&hex, e))?;
        let line = json!({
            "id": c.id,
            "ast_path": format!("{}.ast.json", c.id),
            "bytecode_path": format!("{}.hex", c.id),
            "label": c.label,
            "label_source": "synthetic",
            "solc_version": "0.8.19",
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    let path = dir.join("manifest.jsonl");
    std::fs::write(&path, manifest).map_err(|e| io(&path, e))?;
    Ok(path)
}
