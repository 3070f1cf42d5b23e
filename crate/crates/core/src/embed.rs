//! Graph embedding into the `(X, A, E)` feature bundle consumed by geometric
//! learning libraries, plus the bundle's JSON and flat-binary containers.
//!
//! Default one-hot node layout (19 columns for the CLEVR lexicon):
//!
//! | columns | meaning                                   |
//! |---------|-------------------------------------------|
//! | 0..2    | kind: object, attribute                   |
//! | 2..4    | size: small, large                        |
//! | 4..12   | color: gray red blue green brown purple cyan yellow |
//! | 12..14  | material: rubber, metal                   |
//! | 14..17  | shape: cube, sphere, cylinder             |
//! | 17..19  | modality: text, image                     |
//!
//! Edge rows are one-hot over the ten edge labels in [`EdgeLabel::ALL`]
//! order.

use std::collections::HashMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeLabel, Modality, Node, NodeKind, StructuralGraph};
use crate::lexicon::{AttributeCategory, Lexicon};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ProviderError(pub String);

/// Pure mapping from nodes and edges to fixed-width vectors. Implementations
/// must not depend on node ids and must be safe for concurrent reads.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn node_dim(&self) -> usize;
    fn edge_dim(&self) -> usize;
    fn embed_node(&self, node: &Node) -> Result<Vec<f32>, ProviderError>;
    fn embed_edge(&self, edge: &Edge) -> Result<Vec<f32>, ProviderError>;
}

/// One-hot encoding of the closed CLEVR vocabulary.
#[derive(Debug, Clone)]
pub struct OneHotProvider {
    lexicon: Lexicon,
    offsets: [usize; 4],
    modality_offset: usize,
}

pub const KIND_COLUMNS: usize = 2;

impl OneHotProvider {
    pub fn new(lexicon: &Lexicon) -> OneHotProvider {
        let mut offsets = [0; 4];
        let mut next = KIND_COLUMNS;
        for category in AttributeCategory::ALL {
            offsets[category as usize] = next;
            next += lexicon.values(category).len();
        }
        OneHotProvider {
            lexicon: lexicon.clone(),
            offsets,
            modality_offset: next,
        }
    }

    /// First column of a category's block.
    pub fn category_offset(&self, category: AttributeCategory) -> usize {
        self.offsets[category as usize]
    }

    /// Column set for a node of the given modality; text comes first.
    pub fn modality_column(&self, modality: Modality) -> usize {
        match modality {
            Modality::Text => self.modality_offset,
            Modality::Image => self.modality_offset + 1,
        }
    }
}

/// The default provider for a lexicon.
pub fn default_onehot_provider(lexicon: &Lexicon) -> OneHotProvider {
    OneHotProvider::new(lexicon)
}

impl EmbeddingProvider for OneHotProvider {
    fn name(&self) -> &str {
        "onehot"
    }

    fn node_dim(&self) -> usize {
        self.modality_offset + 2
    }

    fn edge_dim(&self) -> usize {
        EdgeLabel::ALL.len()
    }

    fn embed_node(&self, node: &Node) -> Result<Vec<f32>, ProviderError> {
        let mut v = vec![0.0; self.node_dim()];
        v[match node.kind {
            NodeKind::Object => 0,
            NodeKind::Attribute => 1,
        }] = 1.0;
        v[self.modality_column(node.modality)] = 1.0;
        if node.kind == NodeKind::Attribute {
            let category = node
                .category
                .ok_or_else(|| ProviderError("attribute node without category".into()))?;
            let slot = self
                .lexicon
                .slot_index(category, &node.label)
                .map_err(|e| ProviderError(e.to_string()))?;
            v[self.offsets[category as usize] + slot] = 1.0;
        }
        Ok(v)
    }

    fn embed_edge(&self, edge: &Edge) -> Result<Vec<f32>, ProviderError> {
        let mut v = vec![0.0; self.edge_dim()];
        v[edge.label.index()] = 1.0;
        Ok(v)
    }
}

/// Word-vector table read from a text file: each line is a word followed by
/// `d` floats. Attribute nodes look up their value, object nodes the word
/// `object`; edges look up their label, falling back to the mean of the
/// underscore-separated parts (`same_color` -> `same`, `color`).
#[derive(Debug, Clone)]
pub struct TableProvider {
    vectors: HashMap<String, Vec<f32>>,
    dim: usize,
}

impl TableProvider {
    pub fn parse(text: &str) -> Result<TableProvider, ProviderError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (line_no, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let v: Vec<f32> = parts
                .map(|p| p.parse::<f32>())
                .collect::<Result<_, _>>()
                .map_err(|e| ProviderError(format!("line {}: {e}", line_no + 1)))?;
            if v.is_empty() {
                return Err(ProviderError(format!("line {}: no vector values", line_no + 1)));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ProviderError(format!("line {}: non-finite value", line_no + 1)));
            }
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(ProviderError(format!(
                        "line {}: expected {d} values, found {}",
                        line_no + 1,
                        v.len()
                    )))
                }
                _ => {}
            }
            vectors.insert(word.to_lowercase(), v);
        }
        let dim = dim.ok_or_else(|| ProviderError("vector table is empty".into()))?;
        Ok(TableProvider { vectors, dim })
    }

    fn lookup(&self, word: &str) -> Result<Vec<f32>, ProviderError> {
        self.vectors
            .get(word)
            .cloned()
            .ok_or_else(|| ProviderError(format!("no vector for `{word}`")))
    }
}

impl EmbeddingProvider for TableProvider {
    fn name(&self) -> &str {
        "table"
    }

    fn node_dim(&self) -> usize {
        self.dim
    }

    fn edge_dim(&self) -> usize {
        self.dim
    }

    fn embed_node(&self, node: &Node) -> Result<Vec<f32>, ProviderError> {
        match node.kind {
            NodeKind::Object => self.lookup("object"),
            NodeKind::Attribute => self.lookup(&node.label),
        }
    }

    fn embed_edge(&self, edge: &Edge) -> Result<Vec<f32>, ProviderError> {
        let label = edge.label.as_str();
        if let Some(v) = self.vectors.get(label) {
            return Ok(v.clone());
        }
        let parts: Vec<Vec<f32>> = label
            .split('_')
            .map(|p| self.lookup(p))
            .collect::<Result<_, _>>()?;
        let mut mean = vec![0.0f32; self.dim];
        for p in &parts {
            mean.iter_mut().zip(p).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= parts.len() as f32);
        Ok(mean)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("provider `{provider}` declares zero-width vectors")]
    InvalidDims { provider: String },
    #[error("embedding node {node} failed: {source}")]
    Node { node: usize, source: ProviderError },
    #[error("embedding edge {edge} failed: {source}")]
    Edge { edge: usize, source: ProviderError },
    #[error("provider returned {got} values for {what}, declared {expected}")]
    WidthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
}

/// `(X, A, E)` plus the edge index and row-to-node map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    /// `|V| x node_dim` node features.
    pub x: Array2<f32>,
    /// `|V| x |V|` 0/1 adjacency.
    pub a: Array2<f32>,
    /// `|E| x edge_dim` edge features.
    pub e: Array2<f32>,
    /// `2 x |E|`: source row, destination row, in graph edge order.
    pub edge_index: Array2<i64>,
    pub node_ids: Vec<usize>,
    pub directed: bool,
    /// Provenance source of the embedded graph.
    pub source: String,
    /// Optional grouping label (template family, split) used by projections.
    pub group: Option<String>,
}

impl FeatureBundle {
    pub fn num_nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.e.nrows()
    }

    pub fn node_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn edge_dim(&self) -> usize {
        self.e.ncols()
    }
}

/// Embeds every node and edge of `graph`.
pub fn embed(
    graph: &StructuralGraph,
    provider: &dyn EmbeddingProvider,
    directed: bool,
) -> Result<FeatureBundle, EmbedError> {
    let (nd, ed) = (provider.node_dim(), provider.edge_dim());
    if nd == 0 || ed == 0 {
        return Err(EmbedError::InvalidDims {
            provider: provider.name().to_string(),
        });
    }
    let n = graph.nodes().len();
    let m = graph.edges().len();

    let mut x = Array2::<f32>::zeros((n, nd));
    for (row, node) in graph.nodes().iter().enumerate() {
        let v = provider.embed_node(node).map_err(|source| EmbedError::Node {
            node: node.id,
            source,
        })?;
        if v.len() != nd {
            return Err(EmbedError::WidthMismatch {
                what: format!("node {}", node.id),
                expected: nd,
                got: v.len(),
            });
        }
        x.row_mut(row).assign(&ndarray::ArrayView1::from(&v));
    }

    let mut e = Array2::<f32>::zeros((m, ed));
    let mut edge_index = Array2::<i64>::zeros((2, m));
    for (k, edge) in graph.edges().iter().enumerate() {
        let v = provider
            .embed_edge(edge)
            .map_err(|source| EmbedError::Edge { edge: k, source })?;
        if v.len() != ed {
            return Err(EmbedError::WidthMismatch {
                what: format!("edge {k}"),
                expected: ed,
                got: v.len(),
            });
        }
        e.row_mut(k).assign(&ndarray::ArrayView1::from(&v));
        edge_index[[0, k]] = edge.src as i64;
        edge_index[[1, k]] = edge.dst as i64;
    }

    Ok(FeatureBundle {
        x,
        a: graph.adjacency(directed).mapv(f32::from),
        e,
        edge_index,
        node_ids: graph.nodes().iter().map(|n| n.id).collect(),
        directed,
        source: graph.provenance().source.clone(),
        group: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleFormat {
    Json,
    FlatBinary,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("malformed bundle: {0}")]
    Malformed(String),
}

/// Leading bytes of the flat-binary container.
pub const BINARY_MAGIC: &[u8; 8] = b"CGBUNDL1";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub node_dim: usize,
    pub edge_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonBundle {
    version: u32,
    dims: Dims,
    directed: bool,
    source: String,
    group: Option<String>,
    node_ids: Vec<usize>,
    x: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
    edge_index: [Vec<i64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub name: String,
    pub dtype: String,
    pub shape: [usize; 2],
    /// Byte offset from the start of the payload.
    pub offset: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryHeader {
    pub version: u32,
    pub dims: Dims,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
    pub directed: bool,
    pub source: String,
    pub group: Option<String>,
    pub node_ids: Vec<usize>,
    pub sections: Vec<Section>,
}

fn dims_of(bundle: &FeatureBundle) -> Dims {
    Dims {
        v: bundle.num_nodes(),
        e: bundle.num_edges(),
        node_dim: bundle.node_dim(),
        edge_dim: bundle.edge_dim(),
    }
}

fn rows_f64(m: &Array2<f32>) -> Vec<Vec<f64>> {
    m.rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect()
}

/// Serializes a bundle. JSON stores every `f32` widened to `f64` so the
/// decimal text parses back to the identical bits.
pub fn export_bundle(bundle: &FeatureBundle, format: BundleFormat) -> Vec<u8> {
    match format {
        BundleFormat::Json => {
            let doc = JsonBundle {
                version: BUNDLE_VERSION,
                dims: dims_of(bundle),
                directed: bundle.directed,
                source: bundle.source.clone(),
                group: bundle.group.clone(),
                node_ids: bundle.node_ids.clone(),
                x: rows_f64(&bundle.x),
                a: rows_f64(&bundle.a),
                e: rows_f64(&bundle.e),
                edge_index: [
                    bundle.edge_index.row(0).to_vec(),
                    bundle.edge_index.row(1).to_vec(),
                ],
            };
            let mut bytes = serde_json::to_vec(&doc).expect("bundle serializes");
            bytes.push(b'\n');
            bytes
        }
        BundleFormat::FlatBinary => export_binary(bundle),
    }
}

fn export_binary(bundle: &FeatureBundle) -> Vec<u8> {
    let dims = dims_of(bundle);
    let mut payload = Vec::new();
    let mut sections = Vec::new();
    let mut push_f32 = |name: &str, m: &Array2<f32>, payload: &mut Vec<u8>| {
        let offset = payload.len();
        for v in m.iter() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        sections.push(Section {
            name: name.to_string(),
            dtype: "float32".into(),
            shape: [m.nrows(), m.ncols()],
            offset,
            length: payload.len() - offset,
        });
    };
    push_f32("x", &bundle.x, &mut payload);
    push_f32("a", &bundle.a, &mut payload);
    push_f32("e", &bundle.e, &mut payload);
    let offset = payload.len();
    for v in bundle.edge_index.iter() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    sections.push(Section {
        name: "edge_index".into(),
        dtype: "int64".into(),
        shape: [2, bundle.num_edges()],
        offset,
        length: payload.len() - offset,
    });

    let header = BinaryHeader {
        version: BUNDLE_VERSION,
        dims,
        dtype: "float32".into(),
        byte_order: "little".into(),
        layout: "row-major".into(),
        directed: bundle.directed,
        source: bundle.source.clone(),
        group: bundle.group.clone(),
        node_ids: bundle.node_ids.clone(),
        sections,
    };
    let header_bytes = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + header_bytes.len() + payload.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    out.extend_from_slice(&payload);
    out
}

/// Reads the header of a flat-binary bundle.
pub fn read_binary_header(bytes: &[u8]) -> Result<(BinaryHeader, usize), BundleError> {
    let bad = |m: &str| BundleError::Malformed(m.to_string());
    if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
        return Err(bad("missing CGBUNDL1 magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let end = 16usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("header length exceeds file"))?;
    let header: BinaryHeader = serde_json::from_slice(&bytes[16..end])
        .map_err(|e| BundleError::Malformed(format!("header: {e}")))?;
    Ok((header, end))
}

/// Parses either container, detected by the binary magic.
pub fn import_bundle(bytes: &[u8]) -> Result<FeatureBundle, BundleError> {
    if bytes.starts_with(BINARY_MAGIC) {
        import_binary(bytes)
    } else {
        import_json(bytes)
    }
}

fn matrix_f32(rows: &[Vec<f64>], shape: (usize, usize), name: &str) -> Result<Array2<f32>, BundleError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(BundleError::Malformed(format!(
            "{name} does not have shape {}x{}",
            shape.0, shape.1
        )));
    }
    let flat: Vec<f32> = rows.iter().flatten().map(|&v| v as f32).collect();
    Array2::from_shape_vec(shape, flat).map_err(|e| BundleError::Malformed(e.to_string()))
}

fn import_json(bytes: &[u8]) -> Result<FeatureBundle, BundleError> {
    let doc: JsonBundle = serde_json::from_slice(bytes).map_err(|e| BundleError::Malformed(e.to_string()))?;
    if doc.version != BUNDLE_VERSION {
        return Err(BundleError::Malformed(format!(
            "unsupported version {}",
            doc.version
        )));
    }
    let d = doc.dims;
    let x = matrix_f32(&doc.x, (d.v, d.node_dim), "x")?;
    let a = matrix_f32(&doc.a, (d.v, d.v), "a")?;
    let e = matrix_f32(&doc.e, (d.e, d.edge_dim), "e")?;
    if doc.edge_index.iter().any(|r| r.len() != d.e) {
        return Err(BundleError::Malformed(
            "edge_index does not have shape 2xE".into(),
        ));
    }
    let flat: Vec<i64> = doc.edge_index.concat();
    let edge_index =
        Array2::from_shape_vec((2, d.e), flat).map_err(|e| BundleError::Malformed(e.to_string()))?;
    finish(
        x,
        a,
        e,
        edge_index,
        doc.node_ids,
        doc.directed,
        doc.source,
        doc.group,
    )
}

fn import_binary(bytes: &[u8]) -> Result<FeatureBundle, BundleError> {
    let (header, start) = read_binary_header(bytes)?;
    let payload = &bytes[start..];
    let d = header.dims;
    let section = |name: &str, dtype: &str, shape: [usize; 2], width: usize| {
        let s = header
            .sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| BundleError::Malformed(format!("missing section {name}")))?;
        if s.dtype != dtype || s.shape != shape || s.length != shape[0] * shape[1] * width {
            return Err(BundleError::Malformed(format!("section {name} has wrong layout")));
        }
        payload
            .get(s.offset..s.offset + s.length)
            .ok_or_else(|| BundleError::Malformed(format!("section {name} out of bounds")))
    };
    let f32s = |raw: &[u8], shape: [usize; 2]| {
        let v: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Array2::from_shape_vec((shape[0], shape[1]), v).map_err(|e| BundleError::Malformed(e.to_string()))
    };
    let x = f32s(section("x", "float32", [d.v, d.node_dim], 4)?, [d.v, d.node_dim])?;
    let a = f32s(section("a", "float32", [d.v, d.v], 4)?, [d.v, d.v])?;
    let e = f32s(section("e", "float32", [d.e, d.edge_dim], 4)?, [d.e, d.edge_dim])?;
    let raw = section("edge_index", "int64", [2, d.e], 8)?;
    let idx: Vec<i64> = raw
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let edge_index =
        Array2::from_shape_vec((2, d.e), idx).map_err(|e| BundleError::Malformed(e.to_string()))?;
    finish(
        x,
        a,
        e,
        edge_index,
        header.node_ids,
        header.directed,
        header.source,
        header.group,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: Array2<f32>,
    a: Array2<f32>,
    e: Array2<f32>,
    edge_index: Array2<i64>,
    node_ids: Vec<usize>,
    directed: bool,
    source: String,
    group: Option<String>,
) -> Result<FeatureBundle, BundleError> {
    if node_ids.len() != x.nrows() {
        return Err(BundleError::Malformed("node_ids length differs from |V|".into()));
    }
    let n = x.nrows() as i64;
    if edge_index.iter().any(|&i| i < 0 || i >= n) {
        return Err(BundleError::Malformed("edge_index entry out of range".into()));
    }
    Ok(FeatureBundle {
        x,
        a,
        e,
        edge_index,
        node_ids,
        directed,
        source,
        group,
    })
}
