//! Recursive-descent checker for the Graphviz DOT language.
//!
//! Follows the published abstract grammar: optional `strict`, `graph` or
//! `digraph`, optional ID, then a statement list of node, edge, attribute,
//! `ID = ID` and subgraph statements. IDs are identifiers, numerals,
//! double-quoted strings or HTML strings; keywords are case-insensitive and
//! reserved. The edge operator must match the graph type.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Colon,
    Edge { directed: bool },
}

const KEYWORDS: [&str; 6] = ["strict", "graph", "digraph", "node", "edge", "subgraph"];

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' && line_start {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err("unterminated comment".into());
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        match c {
            '{' => out.push(Tok::LBrace),
            '}' => out.push(Tok::RBrace),
            '[' => out.push(Tok::LBracket),
            ']' => out.push(Tok::RBracket),
            '=' => out.push(Tok::Eq),
            ';' => out.push(Tok::Semi),
            ',' => out.push(Tok::Comma),
            ':' => out.push(Tok::Colon),
            '-' if chars.get(i + 1) == Some(&'-') => {
                out.push(Tok::Edge { directed: false });
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Edge { directed: true });
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('\n') => {}
                                Some(&other) => {
                                    s.push('\\');
                                    s.push(other);
                                }
                                None => return Err("unterminated escape".into()),
                            }
                            i += 2;
                            continue;
                        }
                        Some(&ch) => s.push(ch),
                    }
                    i += 1;
                }
                out.push(Tok::Id(s));
            }
            '<' => {
                let mut depth = 0;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated HTML string".into()),
                        Some('<') => depth += 1,
                        Some('>') => depth -= 1,
                        _ => {}
                    }
                    s.push(chars[i]);
                    if depth == 0 {
                        break;
                    }
                    i += 1;
                }
                out.push(Tok::Id(s));
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let start = i;
                if c == '-' {
                    i += 1;
                }
                let mut digits = 0;
                let mut dots = 0;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    if chars[i] == '.' {
                        dots += 1;
                    } else {
                        digits += 1;
                    }
                    i += 1;
                }
                if digits == 0 || dots > 1 {
                    return Err(format!("bad numeral at char {start}"));
                }
                if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                    return Err(format!("identifier cannot start with a digit at char {start}"));
                }
                out.push(Tok::Id(chars[start..i].iter().collect()));
                continue;
            }
            c if c.is_alphabetic() || c == '_' || (c as u32) >= 0x80 => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || (chars[i] as u32) >= 0x80)
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Tok::Id(word));
                continue;
            }
            other => return Err(format!("unexpected character {other:?} at char {i}")),
        }
        i += 1;
    }
    Ok(out)
}

/// What the checker saw, for semantic follow-up checks.
pub type AttrList = Vec<(String, String)>;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct DotGraph {
    pub directed: bool,
    pub strict: bool,
    pub nodes: BTreeSet<String>,
    pub node_attrs: BTreeMap<String, AttrList>,
    pub edges: Vec<(String, String, AttrList)>,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    graph: DotGraph,
    keyword_ids: Vec<bool>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(format!(
                "expected {want:?}, found {other:?} at token {}",
                self.pos - 1
            )),
        }
    }

    fn is_keyword(&self, at: usize, kw: &str) -> bool {
        matches!(self.toks.get(at), Some(Tok::Id(s)) if self.keyword_ids[at] && s.eq_ignore_ascii_case(kw))
    }

    fn id(&mut self) -> Result<String, String> {
        let at = self.pos;
        match self.next() {
            Some(Tok::Id(s)) if !self.keyword_ids[at] => Ok(s),
            other => Err(format!("expected ID, found {other:?} at token {at}")),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        if self.is_keyword(self.pos, "strict") {
            self.graph.strict = true;
            self.pos += 1;
        }
        if self.is_keyword(self.pos, "graph") {
            self.graph.directed = false;
        } else if self.is_keyword(self.pos, "digraph") {
            self.graph.directed = true;
        } else {
            return Err("expected `graph` or `digraph`".into());
        }
        self.pos += 1;
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.id()?;
        }
        self.expect(Tok::LBrace)?;
        self.stmt_list()?;
        self.expect(Tok::RBrace)?;
        if self.pos != self.toks.len() {
            return Err(format!("trailing tokens after graph body at token {}", self.pos));
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Tok::RBrace) | None) {
            self.stmt()?;
            if matches!(self.peek(), Some(Tok::Semi)) {
                self.pos += 1;
            }
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        if ["graph", "node", "edge"]
            .iter()
            .any(|k| self.is_keyword(self.pos, k))
        {
            self.pos += 1;
            if !matches!(self.peek(), Some(Tok::LBracket)) {
                return Err("attribute statement needs an attribute list".into());
            }
            self.attr_list()?;
            return Ok(());
        }
        if self.is_keyword(self.pos, "subgraph") || matches!(self.peek(), Some(Tok::LBrace)) {
            let members = self.subgraph()?;
            return self.edge_rest(members);
        }
        let first = self.id()?;
        if matches!(self.peek(), Some(Tok::Eq)) {
            self.pos += 1;
            self.id()?;
            return Ok(());
        }
        self.port()?;
        if matches!(self.peek(), Some(Tok::Edge { .. })) {
            return self.edge_rest(vec![first]);
        }
        let attrs = if matches!(self.peek(), Some(Tok::LBracket)) {
            self.attr_list()?
        } else {
            Vec::new()
        };
        self.graph.nodes.insert(first.clone());
        self.graph.node_attrs.entry(first).or_default().extend(attrs);
        Ok(())
    }

    fn port(&mut self) -> Result<(), String> {
        for _ in 0..2 {
            if matches!(self.peek(), Some(Tok::Colon)) {
                self.pos += 1;
                self.id()?;
            }
        }
        Ok(())
    }

    fn subgraph(&mut self) -> Result<Vec<String>, String> {
        if self.is_keyword(self.pos, "subgraph") {
            self.pos += 1;
            if matches!(self.peek(), Some(Tok::Id(_))) {
                self.id()?;
            }
        }
        let before: BTreeSet<String> = self.graph.nodes.clone();
        self.expect(Tok::LBrace)?;
        self.stmt_list()?;
        self.expect(Tok::RBrace)?;
        Ok(self.graph.nodes.difference(&before).cloned().collect())
    }

    /// Parses `edgeop operand ... [attr_list]` after the first operand.
    fn edge_rest(&mut self, first: Vec<String>) -> Result<(), String> {
        let mut operands = vec![first];
        while let Some(Tok::Edge { directed }) = self.peek().cloned() {
            if directed != self.graph.directed {
                return Err(format!(
                    "edge operator {} used in a {}",
                    if directed { "->" } else { "--" },
                    if self.graph.directed { "digraph" } else { "graph" }
                ));
            }
            self.pos += 1;
            if self.is_keyword(self.pos, "subgraph") || matches!(self.peek(), Some(Tok::LBrace)) {
                operands.push(self.subgraph()?);
            } else {
                let id = self.id()?;
                self.port()?;
                operands.push(vec![id]);
            }
        }
        let attrs = if matches!(self.peek(), Some(Tok::LBracket)) {
            self.attr_list()?
        } else {
            Vec::new()
        };
        for pair in operands.windows(2) {
            for a in &pair[0] {
                for b in &pair[1] {
                    self.graph.nodes.insert(a.clone());
                    self.graph.nodes.insert(b.clone());
                    self.graph.edges.push((a.clone(), b.clone(), attrs.clone()));
                }
            }
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut attrs = Vec::new();
        while matches!(self.peek(), Some(Tok::LBracket)) {
            self.pos += 1;
            while !matches!(self.peek(), Some(Tok::RBracket)) {
                let key = self.id()?;
                self.expect(Tok::Eq)?;
                let value = self.id()?;
                attrs.push((key, value));
                if matches!(self.peek(), Some(Tok::Semi) | Some(Tok::Comma)) {
                    self.pos += 1;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(attrs)
    }
}

/// Parses a DOT document, returning what it declares or the first error.
pub fn check(src: &str) -> Result<DotGraph, String> {
    let toks = lex(src)?;
    // Quoted strings are never keywords; track which Id tokens came bare.
    let keyword_ids = bare_keyword_mask(src, &toks)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        graph: DotGraph::default(),
        keyword_ids,
    };
    parser.graph()?;
    Ok(parser.graph)
}

fn bare_keyword_mask(src: &str, toks: &[Tok]) -> Result<Vec<bool>, String> {
    // Re-lex with quoted strings blanked so any keyword text left is bare.
    let mut blanked = String::with_capacity(src.len());
    let mut in_string = false;
    let mut escape = false;
    for c in src.chars() {
        if in_string {
            if escape {
                escape = false;
                blanked.push('x');
            } else if c == '\\' {
                escape = true;
                blanked.push('x');
            } else if c == '"' {
                in_string = false;
                blanked.push('"');
            } else {
                blanked.push(if c == '\n' { '\n' } else { 'x' });
            }
        } else {
            if c == '"' {
                in_string = true;
            }
            blanked.push(c);
        }
    }
    let bare = lex(&blanked)?;
    if bare.len() != toks.len() {
        return Err("lexer mismatch".into());
    }
    Ok(bare
        .iter()
        .map(|t| matches!(t, Tok::Id(s) if KEYWORDS.iter().any(|k| s.eq_ignore_ascii_case(k))))
        .collect())
}

#[cfg(test)]
mod self_tests {
    #[allow(unused_imports)]
    use super::check;

    #[test]
    fn accepts_and_rejects() {
        assert!(check("graph {\n}\n").is_ok());
        assert!(check("strict digraph G { a -> b -> c [color=red]; node [shape=box] x=1 }").is_ok());
        assert!(check("graph { a -- { b c } }").unwrap().edges.len() == 2);
        assert!(check("graph { \"node\" [label=\"a \\\"q\\\"\"] }").is_ok());
        assert!(check("graph { a -> b }").is_err());
        assert!(check("graph { a -- }").is_err());
        assert!(check("graph { node }").is_err());
        assert!(check("graph { a [label=] }").is_err());
        assert!(check("graph { 1abc }").is_err());
        assert!(check("graph { a } b").is_err());
        assert!(check("graph { a [label=\"x] }").is_err());
        assert!(check("graph { edge -- b }").is_err());
    }
}
