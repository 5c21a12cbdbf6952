//! Minimal recursive-descent checker for the Graphviz DOT language grammar.
//!
//! Accepts the full statement grammar (node, edge, attribute and subgraph statements,
//! ports, `strict`, both edge operators) and returns the nodes and edges it saw with
//! their attributes, so tests can inspect colors without regexes.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Eq,
    Colon,
    Arrow,
    Line,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                    i += 1;
                }
                if i + 1 >= chars.len() {
                    return Err("unterminated comment".into());
                }
                i += 2;
            }
            '#' if i == 0 || chars[i - 1] == '\n' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' => {
                out.push(Tok::LBrace);
                i += 1
            }
            '}' => {
                out.push(Tok::RBrace);
                i += 1
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1
            }
            ';' => {
                out.push(Tok::Semi);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '=' => {
                out.push(Tok::Eq);
                i += 1
            }
            ':' => {
                out.push(Tok::Colon);
                i += 1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Arrow);
                i += 2
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                out.push(Tok::Line);
                i += 2
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('\\') if chars.get(i + 1) == Some(&'\n') => i += 2,
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
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
                    i += 1;
                    if depth == 0 {
                        break;
                    }
                }
                out.push(Tok::Id(s));
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let mut s = String::new();
                if c == '-' {
                    s.push(c);
                    i += 1;
                }
                let mut dot = false;
                while let Some(&ch) = chars.get(i) {
                    if ch.is_ascii_digit() {
                        s.push(ch);
                    } else if ch == '.' && !dot {
                        dot = true;
                        s.push(ch);
                    } else {
                        break;
                    }
                    i += 1;
                }
                if s == "-" || s == "." || s == "-." {
                    return Err(format!("bad numeral at char {i}"));
                }
                out.push(Tok::Id(s));
            }
            c if c.is_alphabetic() || c == '_' || (c as u32) >= 0x80 => {
                let mut s = String::new();
                while let Some(&ch) = chars.get(i) {
                    if ch.is_alphanumeric() || ch == '_' || (ch as u32) >= 0x80 {
                        s.push(ch);
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Tok::Id(s));
            }
            other => return Err(format!("unexpected character {other:?} at {i}")),
        }
    }
    Ok(out)
}

pub type Attrs = BTreeMap<String, String>;

#[derive(Debug, Default)]
pub struct DotGraph {
    pub directed: bool,
    pub nodes: BTreeMap<String, Attrs>,
    pub edges: Vec<(String, String, Attrs)>,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    graph: DotGraph,
}

fn is_keyword(s: &str, kw: &str) -> bool {
    s.eq_ignore_ascii_case(kw)
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

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(format!("expected {t:?}, got {got:?} at token {}", self.pos - 1)),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            got => Err(format!("expected ID, got {got:?} at token {}", self.pos - 1)),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        let mut first = self.id()?;
        if is_keyword(&first, "strict") {
            first = self.id()?;
        }
        self.graph.directed = if is_keyword(&first, "digraph") {
            true
        } else if is_keyword(&first, "graph") {
            false
        } else {
            return Err(format!("expected graph or digraph, got {first}"));
        };
        if let Some(Tok::Id(_)) = self.peek() {
            self.next();
        }
        self.expect(Tok::LBrace)?;
        self.stmt_list()?;
        self.expect(Tok::RBrace)?;
        if self.pos != self.toks.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        loop {
            match self.peek() {
                Some(Tok::RBrace) | None => return Ok(()),
                _ => {
                    self.stmt()?;
                    if let Some(Tok::Semi) = self.peek() {
                        self.next();
                    }
                }
            }
        }
    }

    fn attr_list(&mut self) -> Result<Attrs, String> {
        let mut attrs = Attrs::new();
        while let Some(Tok::LBracket) = self.peek() {
            self.next();
            loop {
                match self.peek() {
                    Some(Tok::RBracket) => {
                        self.next();
                        break;
                    }
                    Some(Tok::Id(_)) => {
                        let k = self.id()?;
                        self.expect(Tok::Eq)?;
                        let v = self.id()?;
                        attrs.insert(k, v);
                        if let Some(Tok::Semi | Tok::Comma) = self.peek() {
                            self.next();
                        }
                    }
                    got => return Err(format!("bad attribute list token {got:?}")),
                }
            }
        }
        Ok(attrs)
    }

    /// Parses a node id (with optional port) or a subgraph; returns the member node ids.
    fn endpoint(&mut self) -> Result<Vec<String>, String> {
        match self.peek() {
            Some(Tok::LBrace) => self.subgraph(),
            Some(Tok::Id(s)) if is_keyword(s, "subgraph") => self.subgraph(),
            _ => {
                let id = self.id()?;
                if let Some(Tok::Colon) = self.peek() {
                    self.next();
                    self.id()?;
                    if let Some(Tok::Colon) = self.peek() {
                        self.next();
                        self.id()?;
                    }
                }
                Ok(vec![id])
            }
        }
    }

    fn subgraph(&mut self) -> Result<Vec<String>, String> {
        if let Some(Tok::Id(s)) = self.peek() {
            if is_keyword(s, "subgraph") {
                self.next();
                if let Some(Tok::Id(_)) = self.peek() {
                    self.next();
                }
            }
        }
        let before: Vec<String> = self.graph.nodes.keys().cloned().collect();
        self.expect(Tok::LBrace)?;
        self.stmt_list()?;
        self.expect(Tok::RBrace)?;
        Ok(self
            .graph
            .nodes
            .keys()
            .filter(|k| !before.contains(k))
            .cloned()
            .collect())
    }

    fn stmt(&mut self) -> Result<(), String> {
        if let Some(Tok::Id(s)) = self.peek() {
            let s = s.clone();
            if ["graph", "node", "edge"].iter().any(|k| is_keyword(&s, k)) {
                self.next();
                if let Some(Tok::LBracket) = self.peek() {
                    self.attr_list()?;
                    return Ok(());
                }
                return Err(format!("{s} statement without attribute list"));
            }
            if let Some(Tok::Eq) = self.toks.get(self.pos + 1) {
                self.next();
                self.next();
                self.id()?;
                return Ok(());
            }
        }
        let mut heads = self.endpoint()?;
        let mut edges = Vec::new();
        while let Some(op @ (Tok::Arrow | Tok::Line)) = self.peek().cloned() {
            if (op == Tok::Arrow) != self.graph.directed {
                return Err("edge operator does not match graph kind".into());
            }
            self.next();
            let tails = self.endpoint()?;
            for h in &heads {
                for t in &tails {
                    edges.push((h.clone(), t.clone()));
                }
            }
            heads = tails;
        }
        let attrs = self.attr_list()?;
        if edges.is_empty() {
            for h in heads {
                self.graph.nodes.entry(h).or_default().extend(attrs.clone());
            }
        } else {
            for (a, b) in edges {
                self.graph.nodes.entry(a.clone()).or_default();
                self.graph.nodes.entry(b.clone()).or_default();
                self.graph.edges.push((a, b, attrs.clone()));
            }
        }
        Ok(())
    }
}

/// Parses `src` under the DOT grammar.
pub fn parse_dot(src: &str) -> Result<DotGraph, String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        graph: DotGraph::default(),
    };
    p.graph()?;
    Ok(p.graph)
}

#[test]
fn checker_accepts_and_rejects() {
    assert!(parse_dot("digraph { a -> b [label=\"x\"]; }").is_ok());
    assert!(parse_dot("strict digraph g { node [shape=box]; \"a\" -> {b c} -> d:n; x = y }").is_ok());
    assert!(parse_dot("digraph { a -- b }").is_err());
    assert!(parse_dot("digraph { a -> }").is_err());
    assert!(parse_dot("digraph { a [label=\"x] }").is_err());
    assert!(parse_dot("digraph { a } }").is_err());
}
