//! Seeded generators for scenes, questions and graphs. Used by the test
//! suites and for building fixture corpora.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::graph::{Edge, EdgeLabel, GraphKind, Modality, Node, Provenance, StructuralGraph};
use crate::grounding::ground;
use crate::lexicon::{AttributeCategory, Lexicon};
use crate::scene::{parse_scene, Relationships, SceneDocument, SceneObject};

const MODIFIER_CATEGORIES: [AttributeCategory; 3] = [
    AttributeCategory::Size,
    AttributeCategory::Color,
    AttributeCategory::Material,
];

fn random_value<'a, R: Rng>(rng: &mut R, lexicon: &'a Lexicon, category: AttributeCategory) -> &'a str {
    lexicon.values(category).choose(rng).expect("non-empty category")
}

/// A random surface form (canonical or synonym) for a canonical value.
pub fn surface_for<R: Rng>(
    rng: &mut R,
    lexicon: &Lexicon,
    category: AttributeCategory,
    value: &str,
) -> String {
    lexicon
        .surface_forms(category, value)
        .choose(rng)
        .cloned()
        .unwrap_or_else(|| value.to_string())
}

/// A scene with `n` objects at distinct random positions. Relationships are
/// derived from the coordinates: `j` is left of `i` when its x is smaller
/// and behind `i` when its y is smaller, so the lists are always dual.
pub fn random_scene<R: Rng>(rng: &mut R, lexicon: &Lexicon, n: usize, image_index: usize) -> SceneDocument {
    let mut objects = Vec::with_capacity(n);
    for index in 0..n {
        let size = random_value(rng, lexicon, AttributeCategory::Size).to_string();
        let z = if size == "large" { 0.7 } else { 0.35 };
        let x = rng.random_range(-3.0..3.0);
        let y = rng.random_range(-3.0..3.0);
        objects.push(SceneObject {
            index,
            size,
            color: random_value(rng, lexicon, AttributeCategory::Color).to_string(),
            material: random_value(rng, lexicon, AttributeCategory::Material).to_string(),
            shape: random_value(rng, lexicon, AttributeCategory::Shape).to_string(),
            coords_3d: [x, y, z],
            pixel_coords: None,
            rotation: Some(rng.random_range(0.0..360.0)),
        });
    }
    let mut relationships = Relationships::empty(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (objects[j].coords_3d, objects[i].coords_3d);
            if a[0] < b[0] {
                relationships.left[i].push(j);
            } else if a[0] > b[0] {
                relationships.right[i].push(j);
            }
            if a[1] < b[1] {
                relationships.behind[i].push(j);
            } else if a[1] > b[1] {
                relationships.front[i].push(j);
            }
        }
    }
    SceneDocument {
        image_index,
        image_filename: Some(format!("SYNTH_{image_index:06}.png")),
        objects,
        relationships,
    }
}

/// An entity phrase: a determiner, attribute modifiers and a head noun.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityPhrase {
    /// `(category, surface form)` per modifier, categories distinct.
    pub modifiers: Vec<(AttributeCategory, String)>,
    pub head: String,
    /// Canonical shape of the head noun; `None` for generic nouns.
    pub head_shape: Option<String>,
    /// Canonical constraint set the phrase expresses.
    pub constraints: BTreeMap<AttributeCategory, String>,
}

impl EntityPhrase {
    /// Renders the phrase with the modifiers in the given order.
    pub fn render(&self, order: &[usize]) -> String {
        let mut words = vec!["the".to_string()];
        words.extend(order.iter().map(|&k| self.modifiers[k].1.clone()));
        words.push(self.head.clone());
        words.join(" ")
    }

    pub fn text(&self) -> String {
        let order: Vec<usize> = (0..self.modifiers.len()).collect();
        self.render(&order)
    }
}

/// All orderings of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A random entity phrase with 0 to 3 modifiers. The head is a shape word
/// or, with `generic_rate` probability, a generic noun.
pub fn random_entity_phrase<R: Rng>(rng: &mut R, lexicon: &Lexicon, generic_rate: f64) -> EntityPhrase {
    let mut categories = MODIFIER_CATEGORIES.to_vec();
    categories.shuffle(rng);
    let count = rng.random_range(0..=categories.len());
    let mut constraints = BTreeMap::new();
    let mut modifiers = Vec::new();
    for &category in &categories[..count] {
        let value = random_value(rng, lexicon, category);
        constraints.insert(category, value.to_string());
        modifiers.push((category, surface_for(rng, lexicon, category, value)));
    }
    let (head, head_shape) = if rng.random_bool(generic_rate) {
        let generics: Vec<String> = lexicon
            .generic_nouns()
            .into_iter()
            .filter(|g| !g.ends_with('s'))
            .collect();
        (
            generics.choose(rng).cloned().unwrap_or_else(|| "thing".into()),
            None,
        )
    } else {
        let shape = random_value(rng, lexicon, AttributeCategory::Shape);
        constraints.insert(AttributeCategory::Shape, shape.to_string());
        (
            surface_for(rng, lexicon, AttributeCategory::Shape, shape),
            Some(shape.to_string()),
        )
    };
    EntityPhrase {
        modifiers,
        head,
        head_shape,
        constraints,
    }
}

/// A generated question with the constraint set of each mention in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthQuestion {
    pub text: String,
    pub mentions: Vec<BTreeMap<AttributeCategory, String>>,
}

const OPENERS: [&str; 4] = ["Is there", "Are there any", "What color is", "What size is"];
const LINKS: [&str; 6] = [
    "left of",
    "right of",
    "in front of",
    "behind",
    "the same size as",
    "the same material as",
];

/// A chain question over `1..=max_mentions` entity phrases linked by
/// relation phrases.
pub fn random_question<R: Rng>(rng: &mut R, lexicon: &Lexicon, max_mentions: usize) -> SynthQuestion {
    let count = rng.random_range(1..=max_mentions.max(1));
    let mut text = OPENERS.choose(rng).expect("openers").to_string();
    let mut mentions = Vec::with_capacity(count);
    for k in 0..count {
        let phrase = random_entity_phrase(rng, lexicon, 0.3);
        if k > 0 {
            text.push_str(" that is ");
            text.push_str(LINKS.choose(rng).expect("links"));
        }
        text.push(' ');
        text.push_str(&phrase.text());
        mentions.push(phrase.constraints);
    }
    text.push('?');
    SynthQuestion { text, mentions }
}

pub const TEMPLATE_COUNT: usize = 7;

const CHAIN_LINKS: [&str; 6] = [
    "left of",
    "behind",
    "right of",
    "in front of",
    "left of",
    "behind",
];
const CHAIN_MENTIONS: [&str; 6] = [
    "{size=large} {color=gray} {material=metal} {shape=sphere}",
    "{size=small} {color=blue} {material=rubber} {shape=cube}",
    "{size=large} {color=green} {material=rubber} {shape=cylinder}",
    "{size=small} {color=brown} {material=metal} {shape=sphere}",
    "{size=large} {color=purple} {material=metal} {shape=cube}",
    "{size=small} {color=cyan} {material=rubber} {shape=cylinder}",
];

/// Template `t` asks about a free-colored sphere followed by a chain of `t`
/// fully specified mentions. `{c}` is a random value of category `c`;
/// `{c=v}` is the fixed value `v` in a random surface form.
pub fn template(t: usize) -> String {
    let mut out = String::from("Is there a {color} {shape=sphere}");
    for k in 0..t {
        out.push_str(" that is ");
        out.push_str(CHAIN_LINKS[k]);
        out.push_str(" the ");
        out.push_str(CHAIN_MENTIONS[k]);
    }
    out.push('?');
    out
}

/// Fills [`template`] `t`.
pub fn instantiate_template<R: Rng>(rng: &mut R, lexicon: &Lexicon, t: usize) -> String {
    let template = template(t);
    let mut out = String::new();
    let mut rest = template.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("closed placeholder");
        let slot = &rest[open + 1..close];
        let (name, fixed) = match slot.split_once('=') {
            Some((c, v)) => (c, Some(v)),
            None => (slot, None),
        };
        let category: AttributeCategory = name.parse().expect("template category");
        let value = fixed.unwrap_or_else(|| random_value(rng, lexicon, category));
        out.push_str(&surface_for(rng, lexicon, category, value));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

/// A random valid graph of the given kind.
pub fn random_graph<R: Rng>(rng: &mut R, lexicon: &Lexicon, kind: GraphKind) -> StructuralGraph {
    match kind {
        GraphKind::Text => random_text_graph(rng, lexicon),
        GraphKind::Scene => {
            let n = rng.random_range(0..=6);
            parse_scene(&random_scene(rng, lexicon, n, 0), rng.random_bool(0.5)).graph
        }
        GraphKind::Joint => {
            let gs = random_text_graph(rng, lexicon);
            let n = rng.random_range(0..=6);
            let gt = parse_scene(&random_scene(rng, lexicon, n, 0), false).graph;
            ground(&gs, &gt).expect("kinds are correct").graph
        }
    }
}

fn random_text_graph<R: Rng>(rng: &mut R, lexicon: &Lexicon) -> StructuralGraph {
    let objects = rng.random_range(0..=5);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut object_ids = Vec::with_capacity(objects);
    for k in 0..objects {
        let id = nodes.len();
        object_ids.push(id);
        nodes.push(Node::object(id, Modality::Text, format!("obj{}", k + 1)));
        for category in AttributeCategory::ALL {
            if rng.random_bool(0.5) {
                let aid = nodes.len();
                let value = random_value(rng, lexicon, category);
                nodes.push(Node::attribute(aid, Modality::Text, category, value));
                edges.push(Edge::new(aid, id, EdgeLabel::AttributeOf));
            }
        }
    }
    if objects >= 2 {
        let relation_labels: Vec<EdgeLabel> = EdgeLabel::ALL
            .into_iter()
            .filter(|l| l.is_spatial() || l.is_matching())
            .collect();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..rng.random_range(0..=objects * 2) {
            let a = *object_ids.choose(rng).expect("objects");
            let b = *object_ids.choose(rng).expect("objects");
            let label = *relation_labels.choose(rng).expect("labels");
            if a != b && seen.insert((a, b, label)) {
                edges.push(Edge::new(a, b, label));
            }
        }
    }
    StructuralGraph::from_parts(
        GraphKind::Text,
        Provenance::new("synthetic"),
        nodes,
        edges,
        lexicon,
    )
    .expect("generated graph is valid")
}
