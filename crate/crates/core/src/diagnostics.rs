//! Non-fatal findings reported alongside parse, scene and grounding results.

use serde::Serialize;

use crate::graph::EdgeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Before,
    After,
}

/// One machine-readable finding; serializes as a flat JSON object tagged by
/// `kind`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// A relation trigger without an entity mention on one side.
    DanglingRelation {
        source: String,
        trigger: String,
        token_start: usize,
        token_end: usize,
        missing: Side,
    },
    /// "the same as" with no attribute category to compare.
    UnresolvedComparison {
        source: String,
        token_start: usize,
    },
    UnclassifiedQuestion {
        source: String,
    },
    /// A text object with no satisfying scene object.
    UngroundedMention {
        source: String,
        node: usize,
        label: String,
    },
    /// `subject relation object` holds but the inverse relation is missing.
    SceneInconsistency {
        scene: String,
        relation: EdgeLabel,
        subject: usize,
        object: usize,
        missing: EdgeLabel,
    },
    /// Pruning skipped because the relation has a cycle.
    CyclicRelation {
        scene: String,
        relation: EdgeLabel,
    },
    Notice {
        message: String,
    },
}

impl Diagnostic {
    /// Single-line JSON rendering.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}
