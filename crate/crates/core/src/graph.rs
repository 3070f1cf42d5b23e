//! Structural graph shared by text (`G_s`), scene (`G_t`) and joint (`G_u`)
//! graphs, plus its canonical JSON form.
//!
//! Edges are stored directed. For spatial and matching labels an edge
//! `a -label-> b` reads "a is <label> of b"; `attribute_of` edges point from
//! the attribute node to its object; `grounding` edges point from a text
//! object node to an image object node.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{AttributeCategory, Lexicon};
use crate::text::QuestionType;

/// Version written to and required from graph JSON documents.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Object,
    Attribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Text,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeLabel {
    AttributeOf,
    Left,
    Right,
    Front,
    Behind,
    SameSize,
    SameColor,
    SameMaterial,
    SameShape,
    Grounding,
}

impl EdgeLabel {
    /// All labels in feature-layout order.
    pub const ALL: [EdgeLabel; 10] = [
        EdgeLabel::AttributeOf,
        EdgeLabel::Left,
        EdgeLabel::Right,
        EdgeLabel::Front,
        EdgeLabel::Behind,
        EdgeLabel::SameSize,
        EdgeLabel::SameColor,
        EdgeLabel::SameMaterial,
        EdgeLabel::SameShape,
        EdgeLabel::Grounding,
    ];

    pub const SPATIAL: [EdgeLabel; 4] = [
        EdgeLabel::Left,
        EdgeLabel::Right,
        EdgeLabel::Front,
        EdgeLabel::Behind,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::AttributeOf => "attribute_of",
            EdgeLabel::Left => "left",
            EdgeLabel::Right => "right",
            EdgeLabel::Front => "front",
            EdgeLabel::Behind => "behind",
            EdgeLabel::SameSize => "same_size",
            EdgeLabel::SameColor => "same_color",
            EdgeLabel::SameMaterial => "same_material",
            EdgeLabel::SameShape => "same_shape",
            EdgeLabel::Grounding => "grounding",
        }
    }

    pub fn is_spatial(self) -> bool {
        matches!(
            self,
            EdgeLabel::Left | EdgeLabel::Right | EdgeLabel::Front | EdgeLabel::Behind
        )
    }

    pub fn is_matching(self) -> bool {
        matches!(
            self,
            EdgeLabel::SameSize | EdgeLabel::SameColor | EdgeLabel::SameMaterial | EdgeLabel::SameShape
        )
    }

    /// The spatial label with the opposite meaning (left/right, front/behind).
    pub fn spatial_inverse(self) -> Option<EdgeLabel> {
        match self {
            EdgeLabel::Left => Some(EdgeLabel::Right),
            EdgeLabel::Right => Some(EdgeLabel::Left),
            EdgeLabel::Front => Some(EdgeLabel::Behind),
            EdgeLabel::Behind => Some(EdgeLabel::Front),
            _ => None,
        }
    }

    pub fn matching(category: AttributeCategory) -> EdgeLabel {
        match category {
            AttributeCategory::Size => EdgeLabel::SameSize,
            AttributeCategory::Color => EdgeLabel::SameColor,
            AttributeCategory::Material => EdgeLabel::SameMaterial,
            AttributeCategory::Shape => EdgeLabel::SameShape,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown edge label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for EdgeLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdgeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphKind {
    /// Text graph parsed from a question.
    #[serde(rename = "G_s")]
    Text,
    /// Scene graph parsed from a CLEVR scene.
    #[serde(rename = "G_t")]
    Scene,
    /// Joint bipartite graph of a text and a scene graph.
    #[serde(rename = "G_u")]
    Joint,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Text => "G_s",
            GraphKind::Scene => "G_t",
            GraphKind::Joint => "G_u",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub modality: Modality,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<AttributeCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<BTreeMap<String, serde_json::Value>>,
}

impl Node {
    pub fn object(id: usize, modality: Modality, label: impl Into<String>) -> Node {
        Node {
            id,
            kind: NodeKind::Object,
            modality,
            label: label.into(),
            category: None,
            payload: None,
        }
    }

    pub fn attribute(
        id: usize,
        modality: Modality,
        category: AttributeCategory,
        value: impl Into<String>,
    ) -> Node {
        Node {
            id,
            kind: NodeKind::Attribute,
            modality,
            label: value.into(),
            category: Some(category),
            payload: None,
        }
    }

    pub fn is_object(&self) -> bool {
        self.kind == NodeKind::Object
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
}

impl Edge {
    pub fn new(src: usize, dst: usize, label: EdgeLabel) -> Edge {
        Edge { src, dst, label }
    }
}

/// Where a joint graph's halves came from and how text ids were shifted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointProvenance {
    pub scene_source: String,
    pub text_source: String,
    /// Text node `i` of the input `G_s` is node `i + text_offset` of `G_u`.
    pub text_offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// Question text or scene identifier.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_type: Option<QuestionType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointProvenance>,
}

impl Provenance {
    pub fn new(source: impl Into<String>) -> Provenance {
        Provenance {
            source: source.into(),
            ..Provenance::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph document does not match the schema: {0}")]
    Schema(String),
    #[error("unsupported graph schema version {0}")]
    UnsupportedVersion(u32),
    #[error("edge {edge} references node {node}, but the graph has {nodes} nodes")]
    DanglingReference { edge: usize, node: usize, nodes: usize },
    #[error("graph invariant violated: {0}")]
    Invariant(String),
}

/// A validated structural graph `G = (V, E)`; the adjacency matrix is
/// derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralGraph {
    kind: GraphKind,
    provenance: Provenance,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Serialize)]
struct GraphDocRef<'a> {
    version: u32,
    graph_kind: GraphKind,
    provenance: &'a Provenance,
    nodes: &'a [Node],
    edges: &'a [Edge],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    version: u32,
    graph_kind: GraphKind,
    provenance: Provenance,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl StructuralGraph {
    /// Builds a graph, checking every invariant against `lexicon`.
    pub fn from_parts(
        kind: GraphKind,
        provenance: Provenance,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        lexicon: &Lexicon,
    ) -> Result<StructuralGraph, GraphError> {
        let graph = StructuralGraph {
            kind,
            provenance,
            nodes,
            edges,
        };
        graph.check_references()?;
        graph.validate(lexicon)?;
        Ok(graph)
    }

    /// For builders inside the crate that construct graphs correct by
    /// construction; still checked in debug builds.
    pub(crate) fn from_parts_unchecked(
        kind: GraphKind,
        provenance: Provenance,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
    ) -> StructuralGraph {
        let graph = StructuralGraph {
            kind,
            provenance,
            nodes,
            edges,
        };
        debug_assert_eq!(graph.check_references(), Ok(()));
        debug_assert_eq!(graph.validate_structure(), Ok(()));
        graph
    }

    pub fn empty(kind: GraphKind, provenance: Provenance) -> StructuralGraph {
        StructuralGraph {
            kind,
            provenance,
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.get(id)
    }

    /// Same graph with a different provenance record.
    pub fn with_provenance(mut self, provenance: Provenance) -> StructuralGraph {
        self.provenance = provenance;
        self
    }

    pub fn object_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.is_object()).map(|n| n.id)
    }

    /// Attribute nodes attached to `object`, in edge order.
    pub fn attributes_of(&self, object: usize) -> impl Iterator<Item = &Node> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.label == EdgeLabel::AttributeOf && e.dst == object)
            .map(|e| &self.nodes[e.src])
    }

    /// Attribute constraints of an object node, keyed by category.
    pub fn constraints_of(&self, object: usize) -> BTreeMap<AttributeCategory, &str> {
        self.attributes_of(object)
            .filter_map(|n| n.category.map(|c| (c, n.label.as_str())))
            .collect()
    }

    /// The object an attribute node belongs to.
    pub fn owner_of(&self, attribute: usize) -> Option<usize> {
        self.edges
            .iter()
            .find(|e| e.label == EdgeLabel::AttributeOf && e.src == attribute)
            .map(|e| e.dst)
    }

    /// `|V| x |V|` 0/1 matrix; `A[i][j] = 1` iff an edge `i -> j` exists.
    /// Undirected mode sets both directions.
    pub fn adjacency(&self, directed: bool) -> Array2<u8> {
        let n = self.nodes.len();
        let mut a = Array2::<u8>::zeros((n, n));
        for e in &self.edges {
            a[[e.src, e.dst]] = 1;
            if !directed {
                a[[e.dst, e.src]] = 1;
            }
        }
        a
    }

    /// Canonical JSON bytes: fixed key order, nodes in id order, two-space
    /// indentation, trailing newline.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let doc = GraphDocRef {
            version: SCHEMA_VERSION,
            graph_kind: self.kind,
            provenance: &self.provenance,
            nodes: &self.nodes,
            edges: &self.edges,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("graph serialization is infallible");
        bytes.push(b'\n');
        bytes
    }

    /// Parses and fully validates a graph document.
    pub fn from_json_bytes(bytes: &[u8], lexicon: &Lexicon) -> Result<StructuralGraph, GraphError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| GraphError::Schema(e.to_string()))?;
        if let Some(v) = value.get("version").and_then(serde_json::Value::as_u64) {
            if v != u64::from(SCHEMA_VERSION) {
                return Err(GraphError::UnsupportedVersion(v as u32));
            }
        }
        let doc: GraphDoc = serde_json::from_value(value).map_err(|e| GraphError::Schema(e.to_string()))?;
        debug_assert_eq!(doc.version, SCHEMA_VERSION);
        StructuralGraph::from_parts(doc.graph_kind, doc.provenance, doc.nodes, doc.edges, lexicon)
    }

    fn check_references(&self) -> Result<(), GraphError> {
        let n = self.nodes.len();
        for (i, e) in self.edges.iter().enumerate() {
            for node in [e.src, e.dst] {
                if node >= n {
                    return Err(GraphError::DanglingReference {
                        edge: i,
                        node,
                        nodes: n,
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks every invariant, including that attribute labels are canonical
    /// values of `lexicon`.
    pub fn validate(&self, lexicon: &Lexicon) -> Result<(), GraphError> {
        self.check_references()?;
        self.validate_structure()?;
        for node in &self.nodes {
            if let Some(category) = node.category {
                if !lexicon.is_canonical(category, &node.label) {
                    return Err(GraphError::Invariant(format!(
                        "node {} label `{}` is not a canonical {category} value",
                        node.id, node.label
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<(), GraphError> {
        let invariant = |msg: String| Err(GraphError::Invariant(msg));
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return invariant(format!(
                    "node at position {i} has id {}; ids must be contiguous from 0",
                    node.id
                ));
            }
            match (node.kind, node.category) {
                (NodeKind::Attribute, None) => {
                    return invariant(format!("attribute node {i} has no category"))
                }
                (NodeKind::Object, Some(_)) => {
                    return invariant(format!("object node {i} carries a category"))
                }
                _ => {}
            }
            let modality_ok = match self.kind {
                GraphKind::Text => node.modality == Modality::Text,
                GraphKind::Scene => node.modality == Modality::Image,
                GraphKind::Joint => true,
            };
            if !modality_ok {
                return invariant(format!(
                    "{} graph contains a {:?} node ({i})",
                    self.kind, node.modality
                ));
            }
        }

        let mut seen = HashSet::new();
        let mut attribute_edges = vec![0usize; self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.src == e.dst {
                return invariant(format!("edge {i} is a self-loop on node {}", e.src));
            }
            if !seen.insert(*e) {
                return invariant(format!("duplicate edge ({}, {}, {})", e.src, e.dst, e.label));
            }
            let (s, d) = (&self.nodes[e.src], &self.nodes[e.dst]);
            match e.label {
                EdgeLabel::AttributeOf => {
                    if s.kind != NodeKind::Attribute || d.kind != NodeKind::Object {
                        return invariant(format!(
                            "attribute_of edge {i} must run from an attribute to an object"
                        ));
                    }
                    if s.modality != d.modality {
                        return invariant(format!("attribute_of edge {i} crosses modalities"));
                    }
                    attribute_edges[e.src] += 1;
                }
                EdgeLabel::Grounding => {
                    if self.kind != GraphKind::Joint {
                        return invariant(format!("grounding edge {i} in a {} graph", self.kind));
                    }
                    if !(s.is_object()
                        && d.is_object()
                        && s.modality == Modality::Text
                        && d.modality == Modality::Image)
                    {
                        return invariant(format!(
                            "grounding edge {i} must run from a text object to an image object"
                        ));
                    }
                }
                _ => {
                    if !(s.is_object() && d.is_object()) {
                        return invariant(format!("{} edge {i} must join two objects", e.label));
                    }
                    if s.modality != d.modality {
                        return invariant(format!("{} edge {i} crosses modalities", e.label));
                    }
                }
            }
        }
        for node in &self.nodes {
            if node.kind == NodeKind::Attribute && attribute_edges[node.id] != 1 {
                return invariant(format!(
                    "attribute node {} has {} attribute_of edges, expected 1",
                    node.id, attribute_edges[node.id]
                ));
            }
        }
        Ok(())
    }
}

/// Free-function form of [`StructuralGraph::to_json_bytes`].
pub fn serialize(graph: &StructuralGraph) -> Vec<u8> {
    graph.to_json_bytes()
}

/// Free-function form of [`StructuralGraph::from_json_bytes`].
pub fn deserialize(bytes: &[u8], lexicon: &Lexicon) -> Result<StructuralGraph, GraphError> {
    StructuralGraph::from_json_bytes(bytes, lexicon)
}
