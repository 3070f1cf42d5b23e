//! CLEVR scene ingestion and `G_t` construction.
//!
//! `relationships[r][i]` lists every `j` such that "object j is r of
//! object i", the convention of the CLEVR scene generator. Each entry
//! becomes an edge `j -r-> i`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::graph::{Edge, EdgeLabel, GraphKind, Modality, Node, Provenance, StructuralGraph};
use crate::lexicon::{AttributeCategory, Lexicon};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("malformed scenes JSON: {0}")]
    Json(String),
    #[error("scene {scene}: {message}")]
    Schema { scene: usize, message: String },
    #[error("scene {scene}, object {object}: `{value}` is not a canonical {category} value")]
    NonCanonical {
        scene: usize,
        object: usize,
        category: AttributeCategory,
        value: String,
    },
    #[error("scene {scene}: relationships[{relation}] has {rows} rows for {objects} objects")]
    ShapeMismatch {
        scene: usize,
        relation: EdgeLabel,
        rows: usize,
        objects: usize,
    },
    #[error("scene {scene}: relationships[{relation}][{object}] lists the object itself")]
    Reflexive {
        scene: usize,
        relation: EdgeLabel,
        object: usize,
    },
    #[error("scene {scene}: relationships[{relation}][{object}] references object {index} of {objects}")]
    OutOfRange {
        scene: usize,
        relation: EdgeLabel,
        object: usize,
        index: usize,
        objects: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub index: usize,
    pub size: String,
    pub color: String,
    pub material: String,
    pub shape: String,
    pub coords_3d: [f64; 3],
    pub pixel_coords: Option<[f64; 3]>,
    pub rotation: Option<f64>,
}

impl SceneObject {
    pub fn attribute(&self, category: AttributeCategory) -> &str {
        match category {
            AttributeCategory::Size => &self.size,
            AttributeCategory::Color => &self.color,
            AttributeCategory::Material => &self.material,
            AttributeCategory::Shape => &self.shape,
        }
    }
}

/// Pairwise spatial relationship lists, one row per object.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Relationships {
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
    pub front: Vec<Vec<usize>>,
    pub behind: Vec<Vec<usize>>,
}

impl Relationships {
    pub fn empty(objects: usize) -> Relationships {
        Relationships {
            left: vec![Vec::new(); objects],
            right: vec![Vec::new(); objects],
            front: vec![Vec::new(); objects],
            behind: vec![Vec::new(); objects],
        }
    }

    pub fn get(&self, label: EdgeLabel) -> &[Vec<usize>] {
        match label {
            EdgeLabel::Left => &self.left,
            EdgeLabel::Right => &self.right,
            EdgeLabel::Front => &self.front,
            EdgeLabel::Behind => &self.behind,
            other => panic!("{other} is not a spatial relation"),
        }
    }

    pub fn get_mut(&mut self, label: EdgeLabel) -> &mut Vec<Vec<usize>> {
        match label {
            EdgeLabel::Left => &mut self.left,
            EdgeLabel::Right => &mut self.right,
            EdgeLabel::Front => &mut self.front,
            EdgeLabel::Behind => &mut self.behind,
            other => panic!("{other} is not a spatial relation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDocument {
    pub image_index: usize,
    pub image_filename: Option<String>,
    pub objects: Vec<SceneObject>,
    pub relationships: Relationships,
}

#[derive(Serialize, Deserialize)]
struct RawObject {
    size: String,
    color: String,
    material: String,
    shape: String,
    #[serde(rename = "3d_coords")]
    coords_3d: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pixel_coords: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawScene {
    #[serde(default)]
    image_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_filename: Option<String>,
    objects: Vec<RawObject>,
    #[serde(default)]
    relationships: BTreeMap<String, Vec<Vec<i64>>>,
}

impl SceneDocument {
    /// Identifier used as graph provenance.
    pub fn source(&self) -> String {
        self.image_filename
            .clone()
            .unwrap_or_else(|| format!("scene:{}", self.image_index))
    }

    /// CLEVR-format JSON object for this scene.
    pub fn to_json_value(&self) -> Value {
        let raw = RawScene {
            image_index: Some(self.image_index),
            image_filename: self.image_filename.clone(),
            objects: self
                .objects
                .iter()
                .map(|o| RawObject {
                    size: o.size.clone(),
                    color: o.color.clone(),
                    material: o.material.clone(),
                    shape: o.shape.clone(),
                    coords_3d: o.coords_3d,
                    pixel_coords: o.pixel_coords,
                    rotation: o.rotation,
                })
                .collect(),
            relationships: EdgeLabel::SPATIAL
                .iter()
                .map(|l| {
                    let rows = self
                        .relationships
                        .get(*l)
                        .iter()
                        .map(|r| r.iter().map(|&j| j as i64).collect())
                        .collect();
                    (l.as_str().to_string(), rows)
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("scene serializes")
    }

    fn from_raw(raw: RawScene, position: usize, lexicon: &Lexicon) -> Result<SceneDocument, SceneError> {
        let n = raw.objects.len();
        let mut objects = Vec::with_capacity(n);
        for (index, o) in raw.objects.into_iter().enumerate() {
            let object = SceneObject {
                index,
                size: o.size,
                color: o.color,
                material: o.material,
                shape: o.shape,
                coords_3d: o.coords_3d,
                pixel_coords: o.pixel_coords,
                rotation: o.rotation,
            };
            for category in AttributeCategory::ALL {
                let value = object.attribute(category);
                if !lexicon.is_canonical(category, value) {
                    return Err(SceneError::NonCanonical {
                        scene: position,
                        object: index,
                        category,
                        value: value.to_string(),
                    });
                }
            }
            objects.push(object);
        }

        let mut relationships = Relationships::empty(n);
        for (name, rows) in raw.relationships {
            let Ok(relation) = name.parse::<EdgeLabel>() else {
                continue;
            };
            if !relation.is_spatial() {
                continue;
            }
            if rows.len() != n {
                return Err(SceneError::ShapeMismatch {
                    scene: position,
                    relation,
                    rows: rows.len(),
                    objects: n,
                });
            }
            let mut parsed = Vec::with_capacity(n);
            for (i, row) in rows.into_iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for j in row {
                    if j < 0 || j as usize >= n {
                        return Err(SceneError::OutOfRange {
                            scene: position,
                            relation,
                            object: i,
                            index: j.max(0) as usize,
                            objects: n,
                        });
                    }
                    let j = j as usize;
                    if j == i {
                        return Err(SceneError::Reflexive {
                            scene: position,
                            relation,
                            object: i,
                        });
                    }
                    out.push(j);
                }
                parsed.push(out);
            }
            *relationships.get_mut(relation) = parsed;
        }

        Ok(SceneDocument {
            image_index: raw.image_index.unwrap_or(position),
            image_filename: raw.image_filename,
            objects,
            relationships,
        })
    }
}

/// Loads a CLEVR scenes file (`{"scenes": [...]}`) or a single scene object.
/// A missing `relationships` key, or a missing relation inside it, means no
/// relations of that kind.
pub fn load_scenes(bytes: &[u8], lexicon: &Lexicon) -> Result<Vec<SceneDocument>, SceneError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| SceneError::Json(e.to_string()))?;
    let raw_scenes: Vec<Value> = match value {
        Value::Object(mut map) if map.contains_key("scenes") => match map.remove("scenes") {
            Some(Value::Array(list)) => list,
            _ => return Err(SceneError::Json("`scenes` must be an array".into())),
        },
        single @ Value::Object(_) => vec![single],
        _ => return Err(SceneError::Json("expected a JSON object".into())),
    };
    raw_scenes
        .into_iter()
        .enumerate()
        .map(|(position, v)| {
            let raw: RawScene = serde_json::from_value(v).map_err(|e| SceneError::Schema {
                scene: position,
                message: e.to_string(),
            })?;
            SceneDocument::from_raw(raw, position, lexicon)
        })
        .collect()
}

/// Serializes scenes as a CLEVR scenes file.
pub fn scenes_to_json(scenes: &[SceneDocument]) -> Vec<u8> {
    let doc = serde_json::json!({
        "scenes": scenes.iter().map(SceneDocument::to_json_value).collect::<Vec<_>>()
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("scenes serialize");
    bytes.push(b'\n');
    bytes
}

/// Reports every spatial fact whose dual is missing: `j left-of i` needs
/// `i right-of j`, `j front-of i` needs `i behind j`, and vice versa.
pub fn check_duality(scene: &SceneDocument) -> Vec<Diagnostic> {
    let mut facts = HashSet::new();
    for label in EdgeLabel::SPATIAL {
        for (i, row) in scene.relationships.get(label).iter().enumerate() {
            for &j in row {
                facts.insert((j, label, i));
            }
        }
    }
    let mut out = Vec::new();
    for label in EdgeLabel::SPATIAL {
        let inverse = label.spatial_inverse().expect("spatial");
        for (i, row) in scene.relationships.get(label).iter().enumerate() {
            for &j in row {
                if !facts.contains(&(i, inverse, j)) {
                    out.push(Diagnostic::SceneInconsistency {
                        scene: scene.source(),
                        relation: label,
                        subject: j,
                        object: i,
                        missing: inverse,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SceneParse {
    pub graph: StructuralGraph,
    pub diagnostics: Vec<Diagnostic>,
}

/// Builds `G_t`. Each object becomes node `obj<i+1>` followed by its size,
/// color, material and shape nodes. Spatial edges follow the attribute
/// edges, grouped by relation (left, right, front, behind), then by object
/// row, then by list order.
///
/// With `prune`, only left and front edges are kept and each is reduced to
/// its transitive reduction; a relation with a cycle is left unreduced and
/// reported.
pub fn parse_scene(scene: &SceneDocument, prune: bool) -> SceneParse {
    let mut nodes = Vec::with_capacity(scene.objects.len() * 5);
    let mut edges = Vec::new();
    let mut object_node = Vec::with_capacity(scene.objects.len());
    for object in &scene.objects {
        let id = nodes.len();
        object_node.push(id);
        let mut node = Node::object(id, Modality::Image, format!("obj{}", object.index + 1));
        node.payload = Some(object_payload(object));
        nodes.push(node);
        for category in AttributeCategory::ALL {
            let aid = nodes.len();
            nodes.push(Node::attribute(
                aid,
                Modality::Image,
                category,
                object.attribute(category),
            ));
            edges.push(Edge::new(aid, id, EdgeLabel::AttributeOf));
        }
    }

    let mut diagnostics = check_duality(scene);
    let labels: &[EdgeLabel] = if prune {
        &[EdgeLabel::Left, EdgeLabel::Front]
    } else {
        &EdgeLabel::SPATIAL
    };
    for &label in labels {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        for (i, row) in scene.relationships.get(label).iter().enumerate() {
            for &j in row {
                if seen.insert((j, i)) {
                    pairs.push((j, i));
                }
            }
        }
        if prune {
            match transitive_reduction(scene.objects.len(), &pairs) {
                Some(reduced) => pairs = reduced,
                None => diagnostics.push(Diagnostic::CyclicRelation {
                    scene: scene.source(),
                    relation: label,
                }),
            }
        }
        edges.extend(
            pairs
                .into_iter()
                .map(|(j, i)| Edge::new(object_node[j], object_node[i], label)),
        );
    }

    let graph = StructuralGraph::from_parts_unchecked(
        GraphKind::Scene,
        Provenance::new(scene.source()),
        nodes,
        edges,
    );
    SceneParse { graph, diagnostics }
}

fn object_payload(object: &SceneObject) -> BTreeMap<String, Value> {
    let mut payload = BTreeMap::new();
    payload.insert("coords_3d".to_string(), serde_json::json!(object.coords_3d));
    if let Some(p) = object.pixel_coords {
        payload.insert("pixel_coords".to_string(), serde_json::json!(p));
    }
    if let Some(r) = object.rotation {
        payload.insert("rotation".to_string(), serde_json::json!(r));
    }
    payload.insert("scene_index".to_string(), serde_json::json!(object.index));
    payload
}

/// Transitive reduction of a DAG given as (from, to) pairs, preserving the
/// input order of kept pairs. `None` if the relation has a cycle.
fn transitive_reduction(n: usize, pairs: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in pairs {
        succ[a].push(b);
    }
    // reach[a][b]: b reachable from a by a path of length >= 1
    let mut reach = vec![vec![false; n]; n];
    for start in 0..n {
        let mut stack: Vec<usize> = succ[start].clone();
        while let Some(v) = stack.pop() {
            if !reach[start][v] {
                reach[start][v] = true;
                stack.extend(succ[v].iter().copied());
            }
        }
        if reach[start][start] {
            return None;
        }
    }
    Some(
        pairs
            .iter()
            .copied()
            .filter(|&(a, b)| !succ[a].iter().any(|&m| m != b && reach[m][b]))
            .collect(),
    )
}
