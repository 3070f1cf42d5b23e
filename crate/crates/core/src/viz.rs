//! Graphviz DOT rendering of structural graphs.
//!
//! Legend style: objects are double circles. Attribute nodes carry the
//! object's color as fill; the shape attribute uses the shape's own glyph
//! (box, circle, cylinder); size is a diamond whose width tells small from
//! large; material is a diamond with a gradient fill for metal and a solid
//! fill for rubber; the color attribute is a filled point. In joint graphs
//! text nodes are filled orange and image nodes aquamarine, and the object's
//! color moves to the node outline.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use thiserror::Error;

use crate::graph::{EdgeLabel, GraphKind, Modality, Node, NodeKind, StructuralGraph};
use crate::lexicon::AttributeCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotStyle {
    Legend,
    Plain,
}

pub const TEXT_FILL: &str = "orange";
pub const IMAGE_FILL: &str = "aquamarine";
const UNKNOWN_FILL: &str = "#ffffff";
const LIGHT_TEXT: &str = "#d3d3d3";

/// RGB hex for a CLEVR color name, plus whether it counts as a dark fill.
pub fn color_hex(name: &str) -> Option<(&'static str, bool)> {
    Some(match name {
        "gray" => ("#575757", true),
        "red" => ("#ad2323", true),
        "blue" => ("#2a4bd7", true),
        "green" => ("#1d6914", true),
        "brown" => ("#814a19", true),
        "purple" => ("#8126c0", true),
        "cyan" => ("#29d0d0", false),
        "yellow" => ("#ffee33", false),
        _ => return None,
    })
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

struct Attrs(Vec<(&'static str, String)>);

impl Attrs {
    fn new() -> Attrs {
        Attrs(Vec::new())
    }

    fn set(&mut self, key: &'static str, value: impl AsRef<str>) -> &mut Attrs {
        self.0.push((key, quote(value.as_ref())));
        self
    }

    fn render(&self) -> String {
        if self.0.is_empty() {
            return String::new();
        }
        let body: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(" [{}]", body.join(", "))
    }
}

fn modality_fill(node: &Node) -> &'static str {
    match node.modality {
        Modality::Text => TEXT_FILL,
        Modality::Image => IMAGE_FILL,
    }
}

fn object_color(graph: &StructuralGraph, object: usize) -> Option<(&'static str, bool)> {
    graph
        .constraints_of(object)
        .get(&AttributeCategory::Color)
        .and_then(|c| color_hex(c))
}

fn node_attrs(graph: &StructuralGraph, node: &Node, style: DotStyle) -> Attrs {
    let joint = graph.kind() == GraphKind::Joint;
    let mut a = Attrs::new();
    if node.kind == NodeKind::Object {
        a.set("label", &node.label)
            .set("shape", "doublecircle")
            .set("style", "filled")
            .set(
                "fillcolor",
                if joint { modality_fill(node) } else { UNKNOWN_FILL },
            );
        return a;
    }

    let category = node.category.expect("attribute nodes have a category");
    if style == DotStyle::Plain {
        a.set("label", &node.label).set("shape", "box");
        if joint {
            a.set("style", "filled").set("fillcolor", modality_fill(node));
        }
        return a;
    }

    let owner_color = graph.owner_of(node.id).and_then(|o| object_color(graph, o));
    let (fill, dark) = if joint {
        (modality_fill(node), false)
    } else {
        owner_color.unwrap_or((UNKNOWN_FILL, false))
    };
    let glyph_size = |w: f64| format!("{w:.2}");
    a.set("label", "")
        .set("tooltip", format!("{category}: {}", node.label));
    match category {
        AttributeCategory::Shape => {
            let glyph = match node.label.as_str() {
                "cube" => "box",
                "sphere" => "circle",
                "cylinder" => "cylinder",
                _ => "ellipse",
            };
            a.set("shape", glyph)
                .set("fixedsize", "true")
                .set("width", glyph_size(0.45))
                .set("height", glyph_size(0.45))
                .set("style", "filled")
                .set("fillcolor", fill);
        }
        AttributeCategory::Size => {
            let w = if node.label == "large" { 0.6 } else { 0.3 };
            a.set("shape", "diamond")
                .set("fixedsize", "true")
                .set("width", glyph_size(w))
                .set("height", glyph_size(w))
                .set("style", "filled")
                .set("fillcolor", fill);
        }
        AttributeCategory::Material => {
            a.set("shape", "diamond")
                .set("fixedsize", "true")
                .set("width", glyph_size(0.45))
                .set("height", glyph_size(0.45));
            if node.label == "metal" {
                a.set("style", "radial").set("fillcolor", format!("{fill}:white"));
            } else {
                a.set("style", "filled").set("fillcolor", fill);
            }
        }
        AttributeCategory::Color => {
            a.set("shape", "point")
                .set("width", glyph_size(0.2))
                .set("style", "filled")
                .set("fillcolor", fill);
        }
    }
    if joint {
        if let Some((hex, _)) = owner_color {
            a.set("color", hex).set("penwidth", "3");
        }
    }
    if dark {
        a.set("fontcolor", LIGHT_TEXT);
    }
    a
}

fn edge_attrs(label: EdgeLabel) -> Attrs {
    let mut a = Attrs::new();
    if label.is_spatial() {
        a.set("style", "dashed")
            .set("dir", "forward")
            .set("label", format!("spatial_re: {label}"));
    } else if label.is_matching() {
        a.set("style", "dashed")
            .set("dir", "forward")
            .set("label", format!("matching_re: {label}"));
    } else if label == EdgeLabel::Grounding {
        a.set("style", "bold")
            .set("dir", "forward")
            .set("color", "#888888");
    }
    a
}

/// Renders a graph as an undirected DOT document. Output depends only on the
/// graph, so equal graphs give byte-identical text.
pub fn to_dot(graph: &StructuralGraph, style: DotStyle) -> String {
    let mut out = String::from("graph {\n");
    for node in graph.nodes() {
        let _ = writeln!(out, "  n{}{};", node.id, node_attrs(graph, node, style).render());
    }
    for edge in graph.edges() {
        let _ = writeln!(
            out,
            "  n{} -- n{}{};",
            edge.src,
            edge.dst,
            edge_attrs(edge.label).render()
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Error)]
pub enum VizError {
    #[error("graphviz `dot` failed: {0}")]
    Render(String),
}

/// Runs the external `dot -Tsvg`. `Ok(None)` when the binary is not
/// installed.
pub fn render_svg(dot: &str) -> Result<Option<String>, VizError> {
    render_svg_with("dot", dot)
}

pub fn render_svg_with(binary: &str, dot: &str) -> Result<Option<String>, VizError> {
    let child = Command::new(binary)
        .arg("-Tsvg")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(VizError::Render(e.to_string())),
    };
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(dot.as_bytes())
        .map_err(|e| VizError::Render(e.to_string()))?;
    let output = child
        .wait_with_output()
        .map_err(|e| VizError::Render(e.to_string()))?;
    if !output.status.success() {
        return Err(VizError::Render(
            String::from_utf8_lossy(&output.stderr).trim().to_string(),
        ));
    }
    Ok(Some(String::from_utf8_lossy(&output.stdout).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;
    use crate::lexicon::Lexicon;
    use crate::text::parse_text;

    #[test]
    fn empty_graph() {
        let g = StructuralGraph::empty(GraphKind::Text, Provenance::default());
        assert_eq!(to_dot(&g, DotStyle::Legend), "graph {\n}\n");
    }

    #[test]
    fn legend_glyphs() {
        let g = parse_text(Lexicon::clevr(), "the large red metal cylinder")
            .unwrap()
            .graph;
        let dot = to_dot(&g, DotStyle::Legend);
        assert!(dot.contains("shape=\"doublecircle\""));
        assert!(dot.contains("shape=\"cylinder\""));
        assert!(dot.contains("width=\"0.60\""));
        assert!(dot.contains("fillcolor=\"#ad2323:white\""));
        assert!(dot.contains("fontcolor=\"#d3d3d3\""));
    }

    #[test]
    fn plain_style_has_text_labels() {
        let g = parse_text(Lexicon::clevr(), "the small rubber ball")
            .unwrap()
            .graph;
        let dot = to_dot(&g, DotStyle::Plain);
        assert!(dot.contains("label=\"small\""));
        assert!(!dot.contains("diamond"));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b\\c"), "\"a\\\"b\\\\c\"");
    }

    #[test]
    fn missing_binary_is_not_an_error() {
        assert!(render_svg_with("definitely-not-a-graphviz-binary", "graph {}")
            .unwrap()
            .is_none());
    }
}
