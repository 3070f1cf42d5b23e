//! Structural graphs for CLEVR questions and scenes.
//!
//! Questions become text graphs (`G_s`), scene descriptions become scene
//! graphs (`G_t`), and [`ground`] joins the two into a bipartite joint graph
//! (`G_u`). [`embed`] turns any graph into an `(X, A, E)` feature bundle,
//! [`viz`] writes Graphviz DOT, and [`projection`] maps pooled bundles to
//! two dimensions.

pub mod diagnostics;
pub mod embed;
pub mod graph;
pub mod grounding;
pub mod lexicon;
pub mod pipeline;
pub mod projection;
pub mod scene;
pub mod synth;
pub mod text;
pub mod viz;

pub use diagnostics::Diagnostic;
pub use embed::{
    default_onehot_provider, embed, export_bundle, import_bundle, BundleFormat, EmbeddingProvider,
    FeatureBundle, OneHotProvider, TableProvider,
};
pub use graph::{
    deserialize, serialize, Edge, EdgeLabel, GraphError, GraphKind, Modality, Node, NodeKind, Provenance,
    StructuralGraph,
};
pub use grounding::{ground, Grounding};
pub use lexicon::{AttributeCategory, Lexicon, Lookup};
pub use scene::{load_scenes, parse_scene, SceneDocument};
pub use text::{classify_question, parse_text, QuestionType, TextParser};
pub use viz::{to_dot, DotStyle};
