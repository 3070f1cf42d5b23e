//! Joins a text graph and a scene graph into the bipartite joint graph `G_u`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::graph::{Edge, EdgeLabel, GraphKind, JointProvenance, Provenance, StructuralGraph};
use crate::lexicon::AttributeCategory;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("{role} graph must be {expected}, found {found}")]
    WrongKind {
        role: &'static str,
        expected: GraphKind,
        found: GraphKind,
    },
}

#[derive(Debug, Clone)]
pub struct Grounding {
    pub graph: StructuralGraph,
    pub diagnostics: Vec<Diagnostic>,
}

/// True when every constraint of the mention is met by the object.
/// Unconstrained categories match anything.
pub fn satisfies(
    constraints: &BTreeMap<AttributeCategory, &str>,
    object: &BTreeMap<AttributeCategory, &str>,
) -> bool {
    constraints
        .iter()
        .all(|(category, value)| object.get(category) == Some(value))
}

/// Builds `G_u`: scene nodes keep their ids, text nodes are shifted by the
/// scene node count, and every text object gets a grounding edge to each
/// scene object that satisfies all of its attribute constraints.
///
/// Edge order: scene edges, text edges, then grounding edges by text object
/// and scene object id.
pub fn ground(gs: &StructuralGraph, gt: &StructuralGraph) -> Result<Grounding, GroundError> {
    if gs.kind() != GraphKind::Text {
        return Err(GroundError::WrongKind {
            role: "text",
            expected: GraphKind::Text,
            found: gs.kind(),
        });
    }
    if gt.kind() != GraphKind::Scene {
        return Err(GroundError::WrongKind {
            role: "scene",
            expected: GraphKind::Scene,
            found: gt.kind(),
        });
    }

    let offset = gt.nodes().len();
    let mut nodes = gt.nodes().to_vec();
    nodes.extend(gs.nodes().iter().map(|n| {
        let mut n = n.clone();
        n.id += offset;
        n
    }));
    let mut edges = gt.edges().to_vec();
    edges.extend(
        gs.edges()
            .iter()
            .map(|e| Edge::new(e.src + offset, e.dst + offset, e.label)),
    );

    let scene_objects: Vec<(usize, BTreeMap<AttributeCategory, &str>)> =
        gt.object_ids().map(|id| (id, gt.constraints_of(id))).collect();
    let mut diagnostics = Vec::new();
    for text_object in gs.object_ids() {
        let constraints = gs.constraints_of(text_object);
        let before = edges.len();
        edges.extend(
            scene_objects
                .iter()
                .filter(|(_, attrs)| satisfies(&constraints, attrs))
                .map(|(id, _)| Edge::new(text_object + offset, *id, EdgeLabel::Grounding)),
        );
        if edges.len() == before {
            diagnostics.push(Diagnostic::UngroundedMention {
                source: gs.provenance().source.clone(),
                node: text_object + offset,
                label: gs.nodes()[text_object].label.clone(),
            });
        }
    }

    let provenance = Provenance {
        source: format!("{} | {}", gt.provenance().source, gs.provenance().source),
        question_type: gs.provenance().question_type,
        joint: Some(JointProvenance {
            scene_source: gt.provenance().source.clone(),
            text_source: gs.provenance().source.clone(),
            text_offset: offset,
        }),
    };
    let graph = StructuralGraph::from_parts_unchecked(GraphKind::Joint, provenance, nodes, edges);
    Ok(Grounding { graph, diagnostics })
}
