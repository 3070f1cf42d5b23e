//! Closed CLEVR vocabulary: attribute categories, canonical values, surface
//! synonyms and relation phrases.
//!
//! The built-in vocabulary is compiled from `data/clevr_lexicon.toml`. A
//! replacement file with the same three sections (`values`, `synonyms`,
//! `relation_terms`) can be loaded with [`Lexicon::from_toml_str`] or
//! [`Lexicon::load`]. The value lists must keep the CLEVR cardinalities
//! (2 sizes, 8 colors, 2 materials, 3 shapes) because they define the
//! one-hot feature layout; synonyms, generic nouns and relation phrases are
//! free to grow.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::EdgeLabel;

const DEFAULT_LEXICON: &str = include_str!("../data/clevr_lexicon.toml");

/// One of the four CLEVR attribute categories. The declaration order is the
/// feature-layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeCategory {
    Size,
    Color,
    Material,
    Shape,
}

impl AttributeCategory {
    pub const ALL: [AttributeCategory; 4] = [
        AttributeCategory::Size,
        AttributeCategory::Color,
        AttributeCategory::Material,
        AttributeCategory::Shape,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeCategory::Size => "size",
            AttributeCategory::Color => "color",
            AttributeCategory::Material => "material",
            AttributeCategory::Shape => "shape",
        }
    }

    /// Number of canonical values a lexicon must declare for this category.
    pub fn cardinality(self) -> usize {
        match self {
            AttributeCategory::Size => 2,
            AttributeCategory::Color => 8,
            AttributeCategory::Material => 2,
            AttributeCategory::Shape => 3,
        }
    }

    fn position(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AttributeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttributeCategory {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "size" => Ok(AttributeCategory::Size),
            "color" => Ok(AttributeCategory::Color),
            "material" => Ok(AttributeCategory::Material),
            "shape" => Ok(AttributeCategory::Shape),
            other => Err(LexiconError::UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("unknown attribute category `{0}`")]
    UnknownCategory(String),
    #[error("`{value}` is not a canonical {category} value")]
    NotCanonical {
        category: AttributeCategory,
        value: String,
    },
    #[error("malformed lexicon file: {0}")]
    Format(String),
    #[error("invalid lexicon: {0}")]
    Invalid(String),
    #[error("cannot read lexicon file: {0}")]
    Io(String),
}

/// Result of looking a surface form up in the lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup<'a> {
    Attribute {
        category: AttributeCategory,
        value: &'a str,
        plural: bool,
    },
    /// "thing", "object" and their plurals: an object with no shape constraint.
    Generic {
        plural: bool,
    },
    NotInLexicon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Entry {
    Attribute {
        category: AttributeCategory,
        slot: usize,
        plural: bool,
    },
    Generic {
        plural: bool,
    },
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    values: [Vec<String>; 4],
    synonyms: HashMap<Vec<String>, Entry>,
    relation_terms: HashMap<Vec<String>, EdgeLabel>,
    max_synonym_len: usize,
    max_relation_len: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    values: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    synonyms: BTreeMap<String, SynonymSpec>,
    #[serde(default)]
    relation_terms: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SynonymSpec {
    Short(String),
    Full {
        to: String,
        #[serde(default)]
        plural: bool,
    },
}

fn phrase_key(surface: &str) -> Vec<String> {
    surface.split_whitespace().map(str::to_lowercase).collect()
}

impl Lexicon {
    /// The built-in CLEVR vocabulary.
    pub fn clevr() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::from_toml_str(DEFAULT_LEXICON).expect("built-in lexicon is valid"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| LexiconError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Lexicon::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Lexicon, LexiconError> {
        let file: LexiconFile = toml::from_str(text).map_err(|e| LexiconError::Format(e.to_string()))?;

        let mut values: [Vec<String>; 4] = Default::default();
        for (name, list) in &file.values {
            let category: AttributeCategory = name.parse()?;
            values[category.position()] = list.iter().map(|v| v.trim().to_lowercase()).collect();
        }
        for category in AttributeCategory::ALL {
            let list = &values[category.position()];
            if list.len() != category.cardinality() {
                return Err(LexiconError::Invalid(format!(
                    "category {category} needs {} values, found {}",
                    category.cardinality(),
                    list.len()
                )));
            }
            for v in list {
                if v.is_empty() || v.split_whitespace().count() != 1 {
                    return Err(LexiconError::Invalid(format!(
                        "canonical value `{v}` must be a single word"
                    )));
                }
            }
        }

        let mut synonyms: HashMap<Vec<String>, Entry> = HashMap::new();
        for category in AttributeCategory::ALL {
            for (slot, v) in values[category.position()].iter().enumerate() {
                let entry = Entry::Attribute {
                    category,
                    slot,
                    plural: false,
                };
                if synonyms.insert(vec![v.clone()], entry).is_some() {
                    return Err(LexiconError::Invalid(format!(
                        "canonical value `{v}` is declared twice"
                    )));
                }
            }
        }

        for (surface, spec) in &file.synonyms {
            let (target, plural) = match spec {
                SynonymSpec::Short(t) => (t.as_str(), false),
                SynonymSpec::Full { to, plural } => (to.as_str(), *plural),
            };
            let entry = if target == "generic" {
                Entry::Generic { plural }
            } else {
                let (cat, value) = target.split_once(':').ok_or_else(|| {
                    LexiconError::Invalid(format!(
                        "synonym `{surface}` target `{target}` is not `category:value` or `generic`"
                    ))
                })?;
                let category: AttributeCategory = cat.parse()?;
                let slot = values[category.position()]
                    .iter()
                    .position(|v| v == value)
                    .ok_or_else(|| LexiconError::NotCanonical {
                        category,
                        value: value.to_string(),
                    })?;
                Entry::Attribute {
                    category,
                    slot,
                    plural,
                }
            };
            let key = phrase_key(surface);
            if key.is_empty() {
                return Err(LexiconError::Invalid("empty synonym surface form".into()));
            }
            if let Some(previous) = synonyms.insert(key, entry.clone()) {
                if previous != entry {
                    return Err(LexiconError::Invalid(format!(
                        "surface form `{surface}` maps to two different values"
                    )));
                }
            }
        }

        let mut relation_terms = HashMap::new();
        for (surface, label) in &file.relation_terms {
            let label: EdgeLabel = label
                .parse()
                .map_err(|_| LexiconError::Invalid(format!("unknown relation label `{label}`")))?;
            if !(label.is_spatial() || label.is_matching()) {
                return Err(LexiconError::Invalid(format!(
                    "relation phrase `{surface}` must map to a spatial or matching label"
                )));
            }
            let key = phrase_key(surface);
            if key.is_empty() {
                return Err(LexiconError::Invalid("empty relation phrase".into()));
            }
            relation_terms.insert(key, label);
        }

        let max_synonym_len = synonyms.keys().map(Vec::len).max().unwrap_or(1);
        let max_relation_len = relation_terms.keys().map(Vec::len).max().unwrap_or(0);
        Ok(Lexicon {
            values,
            synonyms,
            relation_terms,
            max_synonym_len,
            max_relation_len,
        })
    }

    /// Canonical values of a category in slot order.
    pub fn values(&self, category: AttributeCategory) -> &[String] {
        &self.values[category.position()]
    }

    /// Total number of canonical values over all categories.
    pub fn value_count(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    pub fn is_canonical(&self, category: AttributeCategory, value: &str) -> bool {
        self.values(category).iter().any(|v| v == value)
    }

    /// Maps a lowercase token sequence to its canonical meaning.
    pub fn canonicalize<S: AsRef<str>>(&self, surface: &[S]) -> Lookup<'_> {
        let key: Vec<String> = surface.iter().map(|s| s.as_ref().to_string()).collect();
        match self.synonyms.get(&key) {
            Some(entry) => self.resolve(entry),
            None => Lookup::NotInLexicon,
        }
    }

    fn resolve(&self, entry: &Entry) -> Lookup<'_> {
        match *entry {
            Entry::Attribute {
                category,
                slot,
                plural,
            } => Lookup::Attribute {
                category,
                value: &self.values[category.position()][slot],
                plural,
            },
            Entry::Generic { plural } => Lookup::Generic { plural },
        }
    }

    /// Ordinal of a canonical value within its category.
    pub fn slot_index(&self, category: AttributeCategory, value: &str) -> Result<usize, LexiconError> {
        self.values(category)
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| LexiconError::NotCanonical {
                category,
                value: value.to_string(),
            })
    }

    /// Longest synonym starting at `start`, as (token count, lookup).
    pub fn longest_synonym<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(usize, Lookup<'_>)> {
        let max = self.max_synonym_len.min(tokens.len().saturating_sub(start));
        (1..=max).rev().find_map(|len| {
            let key: Vec<String> = tokens[start..start + len]
                .iter()
                .map(|s| s.as_ref().to_string())
                .collect();
            self.synonyms.get(&key).map(|e| (len, self.resolve(e)))
        })
    }

    /// Longest relation phrase starting at `start`, as (token count, label).
    pub fn longest_relation<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(usize, EdgeLabel)> {
        let max = self.max_relation_len.min(tokens.len().saturating_sub(start));
        (1..=max).rev().find_map(|len| {
            let key: Vec<String> = tokens[start..start + len]
                .iter()
                .map(|s| s.as_ref().to_string())
                .collect();
            self.relation_terms.get(&key).map(|l| (len, *l))
        })
    }

    /// Exact lookup of a relation phrase.
    pub fn relation<S: AsRef<str>>(&self, phrase: &[S]) -> Option<EdgeLabel> {
        let key: Vec<String> = phrase.iter().map(|s| s.as_ref().to_string()).collect();
        self.relation_terms.get(&key).copied()
    }

    /// Relation phrases with their labels, sorted by phrase.
    pub fn relation_terms(&self) -> Vec<(String, EdgeLabel)> {
        let mut terms: Vec<_> = self
            .relation_terms
            .iter()
            .map(|(k, l)| (k.join(" "), *l))
            .collect();
        terms.sort();
        terms
    }

    /// Surface forms that denote an object without a shape constraint.
    pub fn generic_nouns(&self) -> Vec<String> {
        let mut nouns: Vec<String> = self
            .synonyms
            .iter()
            .filter(|(_, e)| matches!(e, Entry::Generic { .. }))
            .map(|(k, _)| k.join(" "))
            .collect();
        nouns.sort();
        nouns
    }

    /// All surface forms that canonicalize to the given attribute value,
    /// singular forms only, sorted.
    pub fn surface_forms(&self, category: AttributeCategory, value: &str) -> Vec<String> {
        let Ok(slot) = self.slot_index(category, value) else {
            return Vec::new();
        };
        let mut forms: Vec<String> = self
            .synonyms
            .iter()
            .filter(|(_, e)| {
                **e == Entry::Attribute {
                    category,
                    slot,
                    plural: false,
                }
            })
            .map(|(k, _)| k.join(" "))
            .collect();
        forms.sort();
        forms
    }

    /// A token naming an attribute category ("color", "size", ...).
    pub fn category_word(&self, token: &str) -> Option<AttributeCategory> {
        match token {
            "colour" => Some(AttributeCategory::Color),
            other => other.parse().ok(),
        }
    }
}
