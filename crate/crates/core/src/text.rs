//! Text parser: tokenization, CLEVR object entity recognition, relation
//! extraction and question-type classification, producing a `G_s` graph.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Diagnostic, Side};
use crate::graph::{Edge, EdgeLabel, GraphKind, Modality, Node, Provenance, StructuralGraph};
use crate::lexicon::{AttributeCategory, Lexicon, Lookup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("input text is empty")]
    EmptyInput,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("question matches no question-type rule")]
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character offsets into the source, end exclusive.
    pub start: usize,
    pub end: usize,
    pub lower: String,
}

/// A CLEVR object mention: zero or more attribute modifiers followed by a
/// shape noun or a generic noun.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    /// Inclusive token range.
    pub first: usize,
    pub last: usize,
    pub constraints: BTreeMap<AttributeCategory, String>,
    pub is_plural: bool,
    pub mention_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMention {
    pub label: EdgeLabel,
    pub src_mention: usize,
    pub dst_mention: usize,
    /// Inclusive token range of the trigger phrase.
    pub trigger: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Count,
    Exist,
    NumericalComparison,
    AttributeComparison,
    Query,
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuestionType::Count => "count",
            QuestionType::Exist => "exist",
            QuestionType::NumericalComparison => "numerical_comparison",
            QuestionType::AttributeComparison => "attribute_comparison",
            QuestionType::Query => "query",
        })
    }
}

/// Splits on whitespace and punctuation, dropping punctuation.
pub fn tokenize(text: &str) -> Result<Vec<Token>, TextError> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut count = 0;
    for (pos, ch) in text.chars().enumerate() {
        count = pos + 1;
        if ch.is_alphanumeric() {
            current.get_or_insert_with(|| (pos, String::new())).1.push(ch);
        } else if let Some((start, word)) = current.take() {
            tokens.push(make_token(word, start, pos));
        }
    }
    if let Some((start, word)) = current {
        tokens.push(make_token(word, start, count));
    }
    if tokens.is_empty() {
        return Err(TextError::EmptyInput);
    }
    Ok(tokens)
}

fn make_token(word: String, start: usize, end: usize) -> Token {
    Token {
        lower: word.to_lowercase(),
        text: word,
        start,
        end,
    }
}

/// Classifies a question into one of the five CLEVR question types.
///
/// Rules, first match wins:
/// 1. numerical comparison: a comparative (`more`, `fewer`, `less`,
///    `greater`) followed later by `than`; or a counting phrase together with
///    `equal number`/`same number` or a second counting phrase;
/// 2. count: `how many` or `number of`;
/// 3. exist: the question opens with `is there` / `are there`;
/// 4. query: `what` or `which` anywhere;
/// 5. attribute comparison: `same ... as`, `do`/`does ... same`, or `equal`.
pub fn classify_question(tokens: &[Token]) -> Result<QuestionType, ClassifyError> {
    let words: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
    let occurrences = |phrase: &[&str]| words.windows(phrase.len()).filter(|w| *w == phrase).count();
    let position = |word: &str| words.iter().position(|w| *w == word);

    let count_phrases = occurrences(&["how", "many"]) + occurrences(&["number", "of"]);
    let comparative_than = words.iter().enumerate().any(|(i, w)| {
        matches!(*w, "more" | "fewer" | "less" | "greater") && words[i + 1..].contains(&"than")
    });
    let equal_count = occurrences(&["equal", "number"]) + occurrences(&["same", "number"]) > 0;

    if comparative_than || (count_phrases > 0 && (equal_count || count_phrases >= 2)) {
        return Ok(QuestionType::NumericalComparison);
    }
    if count_phrases > 0 {
        return Ok(QuestionType::Count);
    }
    if matches!(words.first(), Some(&"is" | &"are")) && words.get(1) == Some(&"there") {
        return Ok(QuestionType::Exist);
    }
    if words.iter().any(|w| matches!(*w, "what" | "which")) {
        return Ok(QuestionType::Query);
    }
    let same_as = position("same").is_some_and(|i| words[i + 1..].contains(&"as"));
    let does_same = matches!(words.first(), Some(&"do" | &"does")) && position("same").is_some();
    if same_as || does_same || position("equal").is_some() {
        return Ok(QuestionType::AttributeComparison);
    }
    Err(ClassifyError::Unclassified)
}

/// Everything the text parser learned about one utterance.
#[derive(Debug, Clone)]
pub struct TextParse {
    pub graph: StructuralGraph,
    pub tokens: Vec<Token>,
    pub entities: Vec<EntitySpan>,
    pub relations: Vec<RelationMention>,
    pub question_type: Option<QuestionType>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Rule-based parser over a closed vocabulary.
#[derive(Debug, Clone, Copy)]
pub struct TextParser<'a> {
    lexicon: &'a Lexicon,
}

struct Modifier {
    start: usize,
    category: AttributeCategory,
    value: String,
}

impl<'a> TextParser<'a> {
    pub fn new(lexicon: &'a Lexicon) -> TextParser<'a> {
        TextParser { lexicon }
    }

    /// Finds object mentions. Each mention is a head noun (shape synonym or
    /// generic noun) plus the contiguous run of attribute modifiers directly
    /// before it; the run stops at a non-lexicon word or at a second modifier
    /// of an already constrained category. Modifier order never matters.
    pub fn recognize_entities(&self, tokens: &[Token]) -> Vec<EntitySpan> {
        let words: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
        let mut spans = Vec::new();
        let mut run: Vec<Modifier> = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let Some((len, lookup)) = self.lexicon.longest_synonym(&words, i) else {
                run.clear();
                i += 1;
                continue;
            };
            let head = match lookup {
                Lookup::Attribute {
                    category,
                    value,
                    plural: _,
                } if category != AttributeCategory::Shape => {
                    run.push(Modifier {
                        start: i,
                        category,
                        value: value.to_string(),
                    });
                    i += len;
                    continue;
                }
                Lookup::Attribute {
                    category,
                    value,
                    plural,
                } => (Some((category, value.to_string())), plural),
                Lookup::Generic { plural } => (None, plural),
                Lookup::NotInLexicon => unreachable!("longest_synonym only returns entries"),
            };

            let (shape, is_plural) = head;
            let mut constraints = BTreeMap::new();
            if let Some((category, value)) = shape {
                constraints.insert(category, value);
            }
            let mut first = i;
            for m in run.iter().rev() {
                if constraints.contains_key(&m.category) {
                    break;
                }
                constraints.insert(m.category, m.value.clone());
                first = m.start;
            }
            run.clear();
            spans.push(EntitySpan {
                first,
                last: i + len - 1,
                constraints,
                is_plural,
                mention_index: spans.len(),
            });
            i += len;
        }
        spans
    }

    /// Attaches spatial and matching relations to the nearest mentions around
    /// each trigger phrase.
    pub fn extract_relations(
        &self,
        tokens: &[Token],
        entities: &[EntitySpan],
        source: &str,
    ) -> (Vec<RelationMention>, Vec<Diagnostic>) {
        let words: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
        let mut covered = vec![false; words.len()];
        for e in entities {
            covered[e.first..=e.last].iter_mut().for_each(|c| *c = true);
        }

        let before = |pos: usize| entities.iter().rev().find(|e| e.last < pos);
        let after = |pos: usize| entities.iter().find(|e| e.first > pos);

        let mut relations = Vec::new();
        let mut diagnostics = Vec::new();
        let dangling = |trigger: (usize, usize), missing: Side| Diagnostic::DanglingRelation {
            source: source.to_string(),
            trigger: words[trigger.0..=trigger.1].join(" "),
            token_start: trigger.0,
            token_end: trigger.1,
            missing,
        };

        let mut i = 0;
        while i < words.len() {
            if covered[i] {
                i += 1;
                continue;
            }
            if let Some((len, label)) = self.lexicon.longest_relation(&words, i) {
                let trigger = (i, i + len - 1);
                let ends_with_as = words[trigger.1] == "as";
                let pair = if label.is_spatial() || ends_with_as {
                    match (before(trigger.0), after(trigger.1)) {
                        (Some(s), Some(d)) => Ok((s, d)),
                        (None, _) => Err(Side::Before),
                        (_, None) => Err(Side::After),
                    }
                } else {
                    // "do the X and the Y have the same color": the two
                    // mentions before the trigger.
                    let prior: Vec<&EntitySpan> = entities.iter().filter(|e| e.last < trigger.0).collect();
                    match prior.as_slice() {
                        [.., s, d] => Ok((*s, *d)),
                        _ => Err(Side::Before),
                    }
                };
                match pair {
                    Ok((s, d)) => relations.push(RelationMention {
                        label,
                        src_mention: s.mention_index,
                        dst_mention: d.mention_index,
                        trigger,
                    }),
                    Err(side) => diagnostics.push(dangling(trigger, side)),
                }
                i += len;
                continue;
            }
            if words[i] == "same" && words.get(i + 1) == Some(&"as") {
                let trigger = (i, i + 1);
                // "is the <category> of the X ... the same as the Y"
                let category = (0..i)
                    .rev()
                    .find_map(|j| self.lexicon.category_word(words[j]).map(|c| (j, c)));
                match category {
                    None => diagnostics.push(Diagnostic::UnresolvedComparison {
                        source: source.to_string(),
                        token_start: i,
                    }),
                    Some((at, category)) => {
                        let owner = entities.iter().find(|e| e.first > at && e.last < i);
                        match (owner, after(trigger.1)) {
                            (Some(s), Some(d)) => relations.push(RelationMention {
                                label: EdgeLabel::matching(category),
                                src_mention: s.mention_index,
                                dst_mention: d.mention_index,
                                trigger,
                            }),
                            (None, _) => diagnostics.push(dangling(trigger, Side::Before)),
                            (_, None) => diagnostics.push(dangling(trigger, Side::After)),
                        }
                    }
                }
                i += 2;
                continue;
            }
            i += 1;
        }
        (relations, diagnostics)
    }

    /// Parses an utterance into `G_s`. Object nodes are labeled `obj1..objN`
    /// in mention order, each followed by its attribute nodes in category
    /// order; relation edges follow the attribute edges in trigger order.
    pub fn parse(&self, text: &str) -> Result<TextParse, TextError> {
        let tokens = tokenize(text)?;
        let entities = self.recognize_entities(&tokens);
        let (relations, mut diagnostics) = self.extract_relations(&tokens, &entities, text);
        let question_type = classify_question(&tokens).ok();
        if question_type.is_none() {
            diagnostics.push(Diagnostic::UnclassifiedQuestion {
                source: text.to_string(),
            });
        }

        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut object_ids = Vec::with_capacity(entities.len());
        for (k, entity) in entities.iter().enumerate() {
            let object = nodes.len();
            object_ids.push(object);
            nodes.push(Node::object(object, Modality::Text, format!("obj{}", k + 1)));
            for (category, value) in &entity.constraints {
                let id = nodes.len();
                nodes.push(Node::attribute(id, Modality::Text, *category, value.clone()));
                edges.push(Edge::new(id, object, EdgeLabel::AttributeOf));
            }
        }
        let mut seen = HashSet::new();
        for r in &relations {
            let edge = Edge::new(object_ids[r.src_mention], object_ids[r.dst_mention], r.label);
            if edge.src != edge.dst && seen.insert(edge) {
                edges.push(edge);
            }
        }

        let provenance = Provenance {
            source: text.to_string(),
            question_type,
            joint: None,
        };
        let graph = StructuralGraph::from_parts_unchecked(GraphKind::Text, provenance, nodes, edges);
        Ok(TextParse {
            graph,
            tokens,
            entities,
            relations,
            question_type,
            diagnostics,
        })
    }
}

/// Parses `text` into `G_s` with the given lexicon.
pub fn parse_text(lexicon: &Lexicon, text: &str) -> Result<TextParse, TextError> {
    TextParser::new(lexicon).parse(text)
}

/// One question from a batch file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRecord {
    pub index: usize,
    pub text: String,
    pub image_index: Option<usize>,
    pub family: Option<usize>,
    pub split: Option<String>,
}

#[derive(Debug, Error)]
pub enum QuestionsError {
    #[error("malformed questions JSON: {0}")]
    Json(String),
    #[error("question {0} has an empty `question` string")]
    Empty(usize),
}

#[derive(Deserialize)]
struct QuestionsFile {
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
struct RawQuestion {
    question: String,
    #[serde(default)]
    question_index: Option<usize>,
    #[serde(default)]
    image_index: Option<usize>,
    #[serde(default)]
    question_family_index: Option<usize>,
    #[serde(default)]
    split: Option<String>,
}

/// Reads a CLEVR questions JSON document (`questions[]`) or plain text with
/// one question per line (blank lines skipped).
pub fn load_questions(bytes: &[u8]) -> Result<Vec<QuestionRecord>, QuestionsError> {
    let text = String::from_utf8_lossy(bytes);
    if text.trim_start().starts_with('{') {
        let file: QuestionsFile =
            serde_json::from_str(&text).map_err(|e| QuestionsError::Json(e.to_string()))?;
        return file
            .questions
            .into_iter()
            .enumerate()
            .map(|(pos, q)| {
                if q.question.trim().is_empty() {
                    return Err(QuestionsError::Empty(pos));
                }
                Ok(QuestionRecord {
                    index: q.question_index.unwrap_or(pos),
                    text: q.question,
                    image_index: q.image_index,
                    family: q.question_family_index,
                    split: q.split,
                })
            })
            .collect();
    }
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(index, line)| QuestionRecord {
            index,
            text: line.to_string(),
            image_index: None,
            family: None,
            split: None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const COLOR_QUESTION: &str = "Is the color of the metal block that is right of the yellow rubber object the same as the large metal cylinder?";

    fn words(text: &str) -> Vec<String> {
        tokenize(text).unwrap().into_iter().map(|t| t.lower).collect()
    }

    fn constraints(pairs: &[(AttributeCategory, &str)]) -> BTreeMap<AttributeCategory, String> {
        pairs.iter().map(|(c, v)| (*c, v.to_string())).collect()
    }

    #[test]
    fn tokenize_drops_punctuation() {
        assert_eq!(words("Is the ball red?"), ["is", "the", "ball", "red"]);
        let toks = tokenize("Is the ball red?").unwrap();
        assert_eq!((toks[2].start, toks[2].end), (7, 11));
        assert_eq!(toks[0].text, "Is");
    }

    #[test]
    fn tokenize_rejects_empty() {
        assert_eq!(tokenize(""), Err(TextError::EmptyInput));
        assert_eq!(tokenize("  \t\n"), Err(TextError::EmptyInput));
        assert_eq!(tokenize("?!"), Err(TextError::EmptyInput));
    }

    #[test]
    fn tokenize_counts_words() {
        let toks = tokenize(COLOR_QUESTION).unwrap();
        assert_eq!(toks.len(), 22);
        assert_eq!(toks.last().unwrap().lower, "cylinder");
    }

    #[test]
    fn tokenize_uses_char_offsets() {
        let toks = tokenize("é cube").unwrap();
        assert_eq!((toks[1].start, toks[1].end), (2, 6));
    }

    #[test]
    fn color_question_entities() {
        let parser = TextParser::new(Lexicon::clevr());
        let toks = tokenize(COLOR_QUESTION).unwrap();
        let ents = parser.recognize_entities(&toks);
        use AttributeCategory::*;
        let got: Vec<_> = ents.iter().map(|e| e.constraints.clone()).collect();
        assert_eq!(
            got,
            vec![
                constraints(&[(Material, "metal"), (Shape, "cube")]),
                constraints(&[(Color, "yellow"), (Material, "rubber")]),
                constraints(&[(Size, "large"), (Material, "metal"), (Shape, "cylinder")]),
            ]
        );
        assert_eq!(
            ents.iter().map(|e| e.mention_index).collect::<Vec<_>>(),
            [0, 1, 2]
        );
    }

    #[test]
    fn permuted_modifiers_give_same_constraints() {
        let parser = TextParser::new(Lexicon::clevr());
        let a = parser.recognize_entities(&tokenize("large red rubber ball").unwrap());
        let b = parser.recognize_entities(&tokenize("rubber red large ball").unwrap());
        use AttributeCategory::*;
        assert_eq!(a.len(), 1);
        assert_eq!(
            a[0].constraints,
            constraints(&[
                (Size, "large"),
                (Color, "red"),
                (Material, "rubber"),
                (Shape, "sphere")
            ])
        );
        assert_eq!(a[0].constraints, b[0].constraints);
    }

    #[test]
    fn bare_head_noun() {
        let parser = TextParser::new(Lexicon::clevr());
        let ents = parser.recognize_entities(&tokenize("ball").unwrap());
        assert_eq!(ents.len(), 1);
        assert_eq!(
            ents[0].constraints,
            constraints(&[(AttributeCategory::Shape, "sphere")])
        );
        assert!(!ents[0].is_plural);
    }

    #[test]
    fn plural_and_repeated_category() {
        let parser = TextParser::new(Lexicon::clevr());
        let ents = parser.recognize_entities(&tokenize("red blue cubes").unwrap());
        assert_eq!(ents.len(), 1);
        assert!(ents[0].is_plural);
        // the run stops at the second color
        assert_eq!(ents[0].first, 1);
        assert_eq!(ents[0].constraints[&AttributeCategory::Color], "blue");
    }

    #[test]
    fn trailing_modifiers_are_not_entities() {
        let parser = TextParser::new(Lexicon::clevr());
        let ents = parser.recognize_entities(&tokenize("Is the ball red?").unwrap());
        assert_eq!(ents.len(), 1);
        assert_eq!(ents[0].constraints.len(), 1);
    }

    #[test]
    fn color_question_relations() {
        let parser = TextParser::new(Lexicon::clevr());
        let toks = tokenize(COLOR_QUESTION).unwrap();
        let ents = parser.recognize_entities(&toks);
        let (rels, diags) = parser.extract_relations(&toks, &ents, COLOR_QUESTION);
        assert!(diags.is_empty(), "{diags:?}");
        let got: Vec<_> = rels
            .iter()
            .map(|r| (r.label, r.src_mention, r.dst_mention))
            .collect();
        assert_eq!(got, [(EdgeLabel::Right, 0, 1), (EdgeLabel::SameColor, 0, 2)]);
    }

    #[test]
    fn simple_spatial_relation() {
        let parser = TextParser::new(Lexicon::clevr());
        let text = "the cube left of the sphere";
        let toks = tokenize(text).unwrap();
        let ents = parser.recognize_entities(&toks);
        let (rels, _) = parser.extract_relations(&toks, &ents, text);
        assert_eq!(rels.len(), 1);
        assert_eq!(
            (rels[0].label, rels[0].src_mention, rels[0].dst_mention),
            (EdgeLabel::Left, 0, 1)
        );
    }

    #[test]
    fn no_triggers_no_relations() {
        let parser = TextParser::new(Lexicon::clevr());
        let text = "is the ball red";
        let toks = tokenize(text).unwrap();
        let ents = parser.recognize_entities(&toks);
        let (rels, diags) = parser.extract_relations(&toks, &ents, text);
        assert!(rels.is_empty());
        assert!(diags.is_empty());
    }

    #[test]
    fn dangling_trigger_is_diagnosed() {
        let parser = TextParser::new(Lexicon::clevr());
        let text = "what is left of the cube";
        let toks = tokenize(text).unwrap();
        let ents = parser.recognize_entities(&toks);
        let (rels, diags) = parser.extract_relations(&toks, &ents, text);
        assert!(rels.is_empty());
        assert!(matches!(
            diags.as_slice(),
            [Diagnostic::DanglingRelation {
                missing: Side::Before,
                ..
            }]
        ));
    }

    #[test]
    fn matching_pattern_variants() {
        let parser = TextParser::new(Lexicon::clevr());
        let cases = [
            (
                "Are there any other things that have the same size as the red ball?",
                (EdgeLabel::SameSize, 0, 1),
            ),
            (
                "Does the cube have the same material as the cylinder?",
                (EdgeLabel::SameMaterial, 0, 1),
            ),
            (
                "Do the cube and the small sphere have the same color?",
                (EdgeLabel::SameColor, 0, 1),
            ),
        ];
        for (text, expected) in cases {
            let toks = tokenize(text).unwrap();
            let ents = parser.recognize_entities(&toks);
            let (rels, _) = parser.extract_relations(&toks, &ents, text);
            assert_eq!(rels.len(), 1, "{text}");
            assert_eq!(
                (rels[0].label, rels[0].src_mention, rels[0].dst_mention),
                expected
            );
        }
    }

    #[test]
    fn classify_examples() {
        let c = |t: &str| classify_question(&tokenize(t).unwrap());
        assert_eq!(c(COLOR_QUESTION), Ok(QuestionType::AttributeComparison));
        assert_eq!(c("How many red cubes are there?"), Ok(QuestionType::Count));
        assert_eq!(
            c("Are there more cubes than spheres?"),
            Ok(QuestionType::NumericalComparison)
        );
        assert_eq!(c("Is there a big ball?"), Ok(QuestionType::Exist));
        assert_eq!(c("What color is the cube?"), Ok(QuestionType::Query));
        assert_eq!(
            c("Is the number of cubes the same as the number of balls?"),
            Ok(QuestionType::NumericalComparison)
        );
        assert_eq!(
            c("What number of things are the same size as the ball?"),
            Ok(QuestionType::Count)
        );
        assert_eq!(
            c("Are there any other things that have the same size as the red ball?"),
            Ok(QuestionType::Exist)
        );
        assert_eq!(
            c("What color is the other object that is the same size as the cube?"),
            Ok(QuestionType::Query)
        );
        assert_eq!(c("Is the ball red?"), Err(ClassifyError::Unclassified));
    }

    #[test]
    fn parse_color_question_topology() {
        let parse = parse_text(Lexicon::clevr(), COLOR_QUESTION).unwrap();
        let g = &parse.graph;
        assert_eq!(g.kind(), GraphKind::Text);
        assert_eq!(g.nodes().iter().filter(|n| n.is_object()).count(), 3);
        assert_eq!(g.nodes().iter().filter(|n| !n.is_object()).count(), 7);
        let count = |l: EdgeLabel| g.edges().iter().filter(|e| e.label == l).count();
        assert_eq!(count(EdgeLabel::AttributeOf), 7);
        assert_eq!(count(EdgeLabel::Right), 1);
        assert_eq!(count(EdgeLabel::SameColor), 1);
        assert_eq!(g.edges().len(), 9);
        assert_eq!(
            g.provenance().question_type,
            Some(QuestionType::AttributeComparison)
        );
        g.validate(Lexicon::clevr()).unwrap();
    }

    #[test]
    fn parse_without_entities_is_empty_graph() {
        let parse = parse_text(Lexicon::clevr(), "hello there").unwrap();
        assert!(parse.graph.nodes().is_empty());
        assert_eq!(
            parse_text(Lexicon::clevr(), "").unwrap_err(),
            TextError::EmptyInput
        );
    }

    #[test]
    fn load_questions_formats() {
        let json = br#"{"info":{},"questions":[{"question":"Is there a cube?","image_index":3,"question_index":7,"split":"val"}]}"#;
        let qs = load_questions(json).unwrap();
        assert_eq!(qs[0].index, 7);
        assert_eq!(qs[0].image_index, Some(3));
        let plain = b"Is there a cube?\n\nHow many balls?\n";
        let qs = load_questions(plain).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[1].index, 1);
        assert!(load_questions(b"{\"questions\": 3}").is_err());
    }
}
