//! Feature vectors for both views.
//!
//! Graph nodes get fixed (untrained) vectors: either externally computed ones
//! keyed by node id, or a deterministic hashed-token fallback. Opcode
//! sequences use a trainable lookup table held in a [`ParamStore`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::ast::AstNode;
use crate::error::{dimension, domain};
use crate::evm::opcode;
use crate::nn::{Grads, ParamStore, Rng, Tensor};
use crate::{Error, Result};

/// Global seed mixed into every hashed token vector.
pub const FALLBACK_SEED: u64 = 0x5EED;

/// Width of source-view node features.
pub const NODE_DIM: usize = 768;

/// Width of bytecode-view opcode embeddings.
pub const OPCODE_DIM: usize = 350;

/// Maps a syntax-tree node to a fixed-width feature row.
pub trait NodeEmbedder {
    fn dim(&self) -> usize;
    fn embed(&self, node: &AstNode) -> Vec<f64>;
}

/// Tokens describing a node: its type, then `key=value` per retained field
/// in key order.
pub fn node_tokens(node: &AstNode) -> Vec<String> {
    let mut tokens = Vec::with_capacity(1 + node.fields.len());
    tokens.push(node.node_type.clone());
    for (k, v) in &node.fields {
        tokens.push(format!("{k}={v}"));
    }
    tokens
}

/// Pseudo-random vector in `[-1, 1)^dim` determined by `(token, dim)` and
/// [`FALLBACK_SEED`].
pub fn token_vector(token: &str, dim: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(FALLBACK_SEED.to_le_bytes());
    hasher.update((dim as u64).to_le_bytes());
    hasher.update(token.as_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&hasher.finalize());
    let mut rng = Rng::from_seed_bytes(seed);
    (0..dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect()
}

/// Mean of the node's token vectors, scaled to unit L2 norm.
pub fn embed_node(node: &AstNode, dim: usize) -> Vec<f64> {
    let tokens = node_tokens(node);
    let mut acc = vec![0.0; dim];
    for t in &tokens {
        for (a, x) in acc.iter_mut().zip(token_vector(t, dim)) {
            *a += x;
        }
    }
    let n = tokens.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    let norm = libm::sqrt(acc.iter().map(|a| a * a).sum::<f64>());
    if norm > 0.0 {
        acc.iter_mut().for_each(|a| *a /= norm);
    }
    acc
}

/// Hashed-token fallback embedder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedEmbedder {
    dim: usize,
}

impl HashedEmbedder {
    pub fn new(dim: usize) -> Result<HashedEmbedder> {
        if dim == 0 {
            return Err(domain("embedding width must be positive"));
        }
        Ok(HashedEmbedder { dim })
    }
}

impl NodeEmbedder for HashedEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, node: &AstNode) -> Vec<f64> {
        embed_node(node, self.dim)
    }
}

/// Uses precomputed vectors where available, the hashed fallback elsewhere.
#[derive(Debug, Clone)]
pub struct ExternalEmbedder<'a> {
    vectors: &'a BTreeMap<i64, Vec<f64>>,
    fallback: HashedEmbedder,
}

impl<'a> ExternalEmbedder<'a> {
    /// Fails when any external vector's width differs from the fallback's.
    pub fn new(vectors: &'a BTreeMap<i64, Vec<f64>>, fallback: HashedEmbedder) -> Result<ExternalEmbedder<'a>> {
        if let Some((id, v)) = vectors.iter().find(|(_, v)| v.len() != fallback.dim) {
            return Err(dimension(format!(
                "external vector for node {id} has width {}, expected {}",
                v.len(),
                fallback.dim
            )));
        }
        Ok(ExternalEmbedder { vectors, fallback })
    }
}

impl NodeEmbedder for ExternalEmbedder<'_> {
    fn dim(&self) -> usize {
        self.fallback.dim
    }

    fn embed(&self, node: &AstNode) -> Vec<f64> {
        match self.vectors.get(&node.id) {
            Some(v) => v.clone(),
            None => self.fallback.embed(node),
        }
    }
}

/// Result of reading an external embedding file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalEmbeddings {
    pub vectors: BTreeMap<i64, Vec<f64>>,
    pub warnings: Vec<String>,
}

impl ExternalEmbeddings {
    pub fn dim(&self) -> Option<usize> {
        self.vectors.values().next().map(Vec::len)
    }
}

/// Parses `id<TAB>v1<TAB>v2…` rows; blank lines are skipped.
///
/// Every row must have the width of the first; ids must be unique.
pub fn parse_external_embeddings(text: &str) -> Result<ExternalEmbeddings> {
    let mut out = ExternalEmbeddings::default();
    let mut width: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fail = |reason: String| Error::Format { line, reason };
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            continue;
        }
        let mut cells = row.split('\t');
        let id_text = cells.next().unwrap_or_default().trim();
        let id: i64 = id_text
            .parse()
            .map_err(|_| fail(format!("node id `{id_text}` is not an integer")))?;
        let values = cells
            .enumerate()
            .map(|(col, c)| {
                let c = c.trim();
                match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(fail(format!("value {} (`{c}`) is not a finite number", col + 1))),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(fail(format!("node {id} has no values")));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(fail(format!("width {} differs from {w} on earlier rows", values.len())));
            }
            Some(_) => {}
        }
        if out.vectors.insert(id, values).is_some() {
            return Err(fail(format!("duplicate node id {id}")));
        }
    }
    if out.vectors.is_empty() {
        out.warnings.push("embedding file contains no vectors".to_string());
    }
    Ok(out)
}

/// Trainable token → row table with hashed buckets for unseen tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vocab: BTreeMap<String, usize>,
    pub oov_buckets: usize,
    /// Name of the backing parameter (`rows × dim`).
    pub param: String,
}

impl EmbeddingTable {
    /// Table over every defined opcode mnemonic.
    pub fn opcodes(dim: usize, oov_buckets: usize, param: &str) -> Result<EmbeddingTable> {
        EmbeddingTable::new(dim, opcode::defined_mnemonics(), oov_buckets, param)
    }

    pub fn new<'t>(
        dim: usize,
        tokens: impl IntoIterator<Item = &'t str>,
        oov_buckets: usize,
        param: &str,
    ) -> Result<EmbeddingTable> {
        if dim == 0 {
            return Err(domain("embedding width must be positive"));
        }
        if oov_buckets == 0 {
            return Err(domain("at least one out-of-vocabulary bucket is required"));
        }
        let mut vocab = BTreeMap::new();
        for t in tokens {
            let next = vocab.len();
            vocab.entry(t.to_string()).or_insert(next);
        }
        Ok(EmbeddingTable {
            dim,
            vocab,
            oov_buckets,
            param: param.to_string(),
        })
    }

    pub fn rows(&self) -> usize {
        self.vocab.len() + self.oov_buckets
    }

    /// Registers the table's parameter, uniform in `±sqrt(3/dim)` so rows
    /// have unit expected squared norm.
    pub fn init(&self, store: &mut ParamStore, rng: &mut Rng) -> Result<()> {
        let bound = libm::sqrt(3.0 / self.dim as f64);
        let mut t = Tensor::zeros(&[self.rows(), self.dim]);
        for x in t.data_mut() {
            *x = rng.uniform_in(-bound, bound);
        }
        store.insert(&self.param, t)
    }

    /// Row index for a token; unseen tokens hash into the OOV buckets.
    pub fn row_index(&self, token: &str) -> usize {
        if let Some(&i) = self.vocab.get(token) {
            return i;
        }
        let digest = Sha256::digest(token.as_bytes());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        self.vocab.len() + (u64::from_le_bytes(head) % self.oov_buckets as u64) as usize
    }

    /// `len × dim` matrix of the tokens' current rows.
    pub fn embed_sequence(&self, store: &ParamStore, tokens: &[String]) -> Result<Tensor> {
        if tokens.is_empty() {
            return Err(domain("cannot embed an empty opcode sequence"));
        }
        let table = store.value(&self.param)?;
        if table.shape() != [self.rows(), self.dim] {
            return Err(dimension(format!(
                "parameter `{}` has shape {:?}, table needs [{}, {}]",
                self.param,
                table.shape(),
                self.rows(),
                self.dim
            )));
        }
        let mut out = Tensor::zeros(&[tokens.len(), self.dim]);
        for (t, tok) in tokens.iter().enumerate() {
            out.row_mut(t).copy_from_slice(table.row(self.row_index(tok)));
        }
        Ok(out)
    }

    /// Scatters the gradient of an embedded sequence back onto table rows.
    pub fn backward(&self, store: &ParamStore, tokens: &[String], d_seq: &Tensor, grads: &mut Grads) -> Result<()> {
        if d_seq.shape() != [tokens.len(), self.dim] {
            return Err(dimension(format!(
                "sequence gradient has shape {:?}, expected [{}, {}]",
                d_seq.shape(),
                tokens.len(),
                self.dim
            )));
        }
        let g = grads.entry(store, &self.param)?;
        for (t, tok) in tokens.iter().enumerate() {
            let row = g.row_mut(self.row_index(tok));
            for (a, b) in row.iter_mut().zip(d_seq.row(t)) {
                *a += b;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Scalar;
    use crate::nn::{adam_step, AdamConfig};

    fn node(name: &str) -> AstNode {
        AstNode::new(1, "VariableDeclaration").with_field("name", Scalar::Str(name.into()))
    }

    #[test]
    fn hashed_vectors_deterministic_and_unit() {
        let e = HashedEmbedder::new(NODE_DIM).unwrap();
        let a = e.embed(&node("x"));
        assert_eq!(a, e.embed(&node("x")));
        let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        assert_ne!(a, e.embed(&node("y")));
        assert!(HashedEmbedder::new(0).is_err());
    }

    #[test]
    fn tokens_include_fields_in_key_order() {
        let n = node("x").with_field("kind", Scalar::Str("k".into()));
        assert_eq!(node_tokens(&n), ["VariableDeclaration", "kind=k", "name=x"]);
    }

    #[test]
    fn token_vector_depends_on_width() {
        let a = token_vector("ADD", 4);
        let b = token_vector("ADD", 5);
        assert_eq!(a.len(), 4);
        assert_ne!(&a[..], &b[..4]);
        assert!(a.iter().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn external_parse() {
        let ok = parse_external_embeddings("1\t0.5\t1\n\n2\t-1\t2e-3\n").unwrap();
        assert_eq!(ok.vectors.len(), 2);
        assert_eq!(ok.vectors[&2], vec![-1.0, 0.002]);
        assert!(ok.warnings.is_empty());

        let ragged = parse_external_embeddings("1\t0.5\t1\n2\t0.5\n");
        assert!(matches!(ragged, Err(Error::Format { line: 2, .. })));
        let dup = parse_external_embeddings("1\t0\n1\t1\n");
        assert!(matches!(dup, Err(Error::Format { line: 2, .. })));
        let bad = parse_external_embeddings("1\tnan\n");
        assert!(matches!(bad, Err(Error::Format { line: 1, .. })));

        let empty = parse_external_embeddings("").unwrap();
        assert!(empty.vectors.is_empty());
        assert_eq!(empty.warnings.len(), 1);
    }

    #[test]
    fn external_embedder_prefers_file_vectors() {
        let mut m = BTreeMap::new();
        m.insert(1, vec![1.0, 0.0]);
        let e = ExternalEmbedder::new(&m, HashedEmbedder::new(2).unwrap()).unwrap();
        assert_eq!(e.embed(&node("x")), vec![1.0, 0.0]);
        let other = AstNode::new(7, "Literal");
        assert_eq!(e.embed(&other), embed_node(&other, 2));
        assert!(ExternalEmbedder::new(&m, HashedEmbedder::new(3).unwrap()).is_err());
    }

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sequence_shape_and_oov() {
        let table = EmbeddingTable::opcodes(OPCODE_DIM, 4, "opcode_table").unwrap();
        let mut store = ParamStore::new();
        table.init(&mut store, &mut Rng::new(1, 0)).unwrap();
        let seq = strings(&["PUSH1", "ADD"]);
        let m = table.embed_sequence(&store, &seq).unwrap();
        assert_eq!(m.shape(), &[2, OPCODE_DIM]);
        assert_eq!(m, table.embed_sequence(&store, &seq).unwrap());
        assert!(table.embed_sequence(&store, &[]).is_err());

        let oov = table.row_index("NOT_AN_OPCODE");
        assert!(oov >= table.vocab.len() && oov < table.rows());
        assert_eq!(oov, table.row_index("NOT_AN_OPCODE"));
    }

    #[test]
    fn adam_touches_only_used_rows() {
        let table = EmbeddingTable::opcodes(8, 2, "opcode_table").unwrap();
        let mut store = ParamStore::new();
        table.init(&mut store, &mut Rng::new(1, 0)).unwrap();
        let before = store.value("opcode_table").unwrap().clone();
        let seq = strings(&["PUSH1"]);
        let mut grads = Grads::new();
        let d = Tensor::from_vec(&[1, 8], vec![1.0; 8]).unwrap();
        table.backward(&store, &seq, &d, &mut grads).unwrap();
        store.accumulate(&grads, 1.0).unwrap();
        adam_step(&mut store, 0.01, AdamConfig::default(), 1).unwrap();
        let after = store.value("opcode_table").unwrap();
        let push1 = table.row_index("PUSH1");
        for r in 0..table.rows() {
            if r == push1 {
                assert_ne!(after.row(r), before.row(r));
            } else {
                assert_eq!(after.row(r), before.row(r));
            }
        }
    }
}
