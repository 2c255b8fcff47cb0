//! RDF terms, datasets with named graphs, N-Quads ingestion and the
//! `Graphs` / `Quads` base-relation encoding.

use std::fmt;

use indexmap::{IndexMap, IndexSet};

use crate::error::SyntaxError;

/// An RDF term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RdfTerm {
    Iri(String),
    Literal(Literal),
    Blank(String),
}

/// A literal; the lang tag and the datatype are mutually exclusive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Simple,
    Lang(String),
    Typed(String),
}

impl RdfTerm {
    pub fn iri(iri: impl Into<String>) -> Self {
        RdfTerm::Iri(iri.into())
    }

    pub fn simple(lexical: impl Into<String>) -> Self {
        RdfTerm::Literal(Literal { lexical: lexical.into(), kind: LiteralKind::Simple })
    }

    pub fn lang(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        RdfTerm::Literal(Literal { lexical: lexical.into(), kind: LiteralKind::Lang(lang.into()) })
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        RdfTerm::Literal(Literal { lexical: lexical.into(), kind: LiteralKind::Typed(datatype.into()) })
    }

    pub fn blank(label: impl Into<String>) -> Self {
        RdfTerm::Blank(label.into())
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, RdfTerm::Iri(_))
    }

    /// Canonical single-string key of the term. Distinct terms never share a key.
    pub fn encode(&self) -> String {
        encode_term(self)
    }
}

impl fmt::Display for RdfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_term(self))
    }
}

/// Encodes a term as `<iri>`, `"lex"`, `"lex"@lang`, `"lex"^^<dt>` or `_:label`.
///
/// Lexical forms are escaped (`\\`, `\"`, `\n`, `\r`) so the closing quote is
/// always unambiguous; datatype literals are compared verbatim, without any
/// value-space normalization.
pub fn encode_term(term: &RdfTerm) -> String {
    match term {
        RdfTerm::Iri(iri) => format!("<{iri}>"),
        RdfTerm::Blank(label) => format!("_:{label}"),
        RdfTerm::Literal(lit) => {
            let mut out = String::with_capacity(lit.lexical.len() + 2);
            out.push('"');
            for c in lit.lexical.chars() {
                match c {
                    '\\' => out.push_str("\\\\"),
                    '"' => out.push_str("\\\""),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('"');
            match &lit.kind {
                LiteralKind::Simple => {}
                LiteralKind::Lang(lang) => {
                    out.push('@');
                    out.push_str(lang);
                }
                LiteralKind::Typed(dt) => {
                    out.push_str("^^<");
                    out.push_str(dt);
                    out.push('>');
                }
            }
            out
        }
    }
}

/// Blank nodes are local to the graph they occur in. Both the relational
/// encoding and the reference evaluator go through this to rename a blank
/// node of graph `gid` apart from the blank nodes of every other graph.
pub fn scope_blank(gid: usize, term: &RdfTerm) -> RdfTerm {
    match term {
        RdfTerm::Blank(label) => RdfTerm::Blank(format!("{gid}.{label}")),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: RdfTerm,
    pub predicate: RdfTerm,
    pub object: RdfTerm,
}

impl Triple {
    /// Fails when the predicate is not an IRI.
    pub fn new(subject: RdfTerm, predicate: RdfTerm, object: RdfTerm) -> Result<Self, String> {
        if !predicate.is_iri() {
            return Err(format!("predicate must be an IRI, found {predicate}"));
        }
        Ok(Triple { subject, predicate, object })
    }
}

pub type Graph = IndexSet<Triple>;

/// A default graph plus named graphs, kept in first-occurrence order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub default_graph: Graph,
    pub named_graphs: IndexMap<String, Graph>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts into the named graph `graph`, or the default graph when `None`.
    /// Returns false if the triple was already present.
    pub fn insert(&mut self, graph: Option<&str>, triple: Triple) -> bool {
        match graph {
            None => self.default_graph.insert(triple),
            Some(name) => self.named_graphs.entry(name.to_string()).or_default().insert(triple),
        }
    }

    /// Graph by identifier: 0 is the default graph, `i` the i-th named graph.
    pub fn graph(&self, gid: usize) -> Option<&Graph> {
        if gid == 0 {
            Some(&self.default_graph)
        } else {
            self.named_graphs.get_index(gid - 1).map(|(_, g)| g)
        }
    }

    /// Identifier of the named graph called `iri`.
    pub fn named_gid(&self, iri: &str) -> Option<usize> {
        self.named_graphs.get_index_of(iri).map(|i| i + 1)
    }

    pub fn graph_count(&self) -> usize {
        1 + self.named_graphs.len()
    }

    pub fn quad_count(&self) -> usize {
        self.default_graph.len() + self.named_graphs.values().map(IndexSet::len).sum::<usize>()
    }

    /// Serializes back to N-Quads, default graph first.
    pub fn to_nquads(&self) -> String {
        let mut out = String::new();
        for t in &self.default_graph {
            out.push_str(&format!("{} {} {} .\n", t.subject, t.predicate, t.object));
        }
        for (name, graph) in &self.named_graphs {
            for t in graph {
                out.push_str(&format!("{} {} {} <{name}> .\n", t.subject, t.predicate, t.object));
            }
        }
        out
    }
}

/// Parses the line-oriented N-Quads subset: `s p o .` or `s p o g .`, with
/// `#` comments and blank lines ignored.
pub fn parse_nquads(input: &str) -> Result<Dataset, SyntaxError> {
    let mut dataset = Dataset::new();
    for (idx, line) in input.lines().enumerate() {
        let mut lexer = LineLexer { line: idx + 1, chars: line.char_indices().peekable(), text: line };
        let mut terms = Vec::with_capacity(4);
        let mut terminated = false;
        while let Some(tok) = lexer.next_token()? {
            match tok {
                (_, Tok::Dot) => {
                    terminated = true;
                    break;
                }
                (col, Tok::Term(t)) => terms.push((col, t)),
            }
        }
        if terms.is_empty() && !terminated {
            continue;
        }
        if !terminated {
            return Err(lexer.error(line.chars().count() + 1, "expected '.' at end of statement"));
        }
        if let Some((col, _)) = lexer.next_token()? {
            return Err(lexer.error(col, "unexpected content after '.'"));
        }
        if terms.len() != 3 && terms.len() != 4 {
            return Err(lexer.error(1, &format!("expected 3 or 4 terms, found {}", terms.len())));
        }
        let mut it = terms.into_iter();
        let (_, s) = it.next().unwrap();
        let (pcol, p) = it.next().unwrap();
        // literal subjects are accepted (generalized triples)
        let (_, o) = it.next().unwrap();
        if !p.is_iri() {
            return Err(lexer.error(pcol, "predicate must be an IRI"));
        }
        let graph = match it.next() {
            None => None,
            Some((_, RdfTerm::Iri(g))) => Some(g),
            Some((gcol, _)) => return Err(lexer.error(gcol, "graph label must be an IRI")),
        };
        dataset.insert(graph.as_deref(), Triple { subject: s, predicate: p, object: o });
    }
    Ok(dataset)
}

enum Tok {
    Term(RdfTerm),
    Dot,
}

struct LineLexer<'a> {
    line: usize,
    text: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl LineLexer<'_> {
    fn error(&self, column: usize, message: &str) -> SyntaxError {
        SyntaxError { line: self.line, column, message: message.to_string() }
    }

    fn column_of(&self, byte: usize) -> usize {
        self.text[..byte].chars().count() + 1
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>, SyntaxError> {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
        let Some(&(start, c)) = self.chars.peek() else { return Ok(None) };
        let col = self.column_of(start);
        match c {
            '#' => {
                while self.chars.next().is_some() {}
                Ok(None)
            }
            '.' => {
                self.chars.next();
                Ok(Some((col, Tok::Dot)))
            }
            '<' => {
                self.chars.next();
                let iri = self.read_iri(col)?;
                Ok(Some((col, Tok::Term(RdfTerm::Iri(iri)))))
            }
            '_' => {
                self.chars.next();
                if !matches!(self.chars.next(), Some((_, ':'))) {
                    return Err(self.error(col, "expected ':' after '_'"));
                }
                let mut label = String::new();
                while let Some(&(_, c)) = self.chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        label.push(c);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                if label.is_empty() {
                    return Err(self.error(col, "empty blank node label"));
                }
                Ok(Some((col, Tok::Term(RdfTerm::Blank(label)))))
            }
            '"' => {
                self.chars.next();
                let lexical = self.read_string(col)?;
                let kind = match self.chars.peek() {
                    Some(&(_, '@')) => {
                        self.chars.next();
                        let mut lang = String::new();
                        while let Some(&(_, c)) = self.chars.peek() {
                            if c.is_ascii_alphanumeric() || c == '-' {
                                lang.push(c);
                                self.chars.next();
                            } else {
                                break;
                            }
                        }
                        if lang.is_empty() {
                            return Err(self.error(col, "empty language tag"));
                        }
                        LiteralKind::Lang(lang)
                    }
                    Some(&(_, '^')) => {
                        self.chars.next();
                        if !matches!(self.chars.next(), Some((_, '^'))) {
                            return Err(self.error(col, "expected '^^' before datatype"));
                        }
                        if !matches!(self.chars.next(), Some((_, '<'))) {
                            return Err(self.error(col, "expected datatype IRI"));
                        }
                        LiteralKind::Typed(self.read_iri(col)?)
                    }
                    _ => LiteralKind::Simple,
                };
                Ok(Some((col, Tok::Term(RdfTerm::Literal(Literal { lexical, kind })))))
            }
            other => Err(self.error(col, &format!("unexpected character '{other}'"))),
        }
    }

    fn read_iri(&mut self, col: usize) -> Result<String, SyntaxError> {
        let mut iri = String::new();
        loop {
            match self.chars.next() {
                Some((_, '>')) => return Ok(iri),
                Some((at, c)) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(self.error(self.column_of(at), "invalid character in IRI"));
                }
                Some((_, c)) => iri.push(c),
                None => return Err(self.error(col, "unterminated IRI")),
            }
        }
    }

    fn read_string(&mut self, col: usize) -> Result<String, SyntaxError> {
        let mut s = String::new();
        loop {
            match self.chars.next() {
                Some((_, '"')) => return Ok(s),
                Some((at, '\\')) => match self.chars.next() {
                    Some((_, '\\')) => s.push('\\'),
                    Some((_, '"')) => s.push('"'),
                    Some((_, 'n')) => s.push('\n'),
                    Some((_, 'r')) => s.push('\r'),
                    Some((_, 't')) => s.push('\t'),
                    _ => return Err(self.error(self.column_of(at), "invalid escape sequence")),
                },
                Some((_, c)) => s.push(c),
                None => return Err(self.error(col, "unterminated string literal")),
            }
        }
    }
}

/// One row of `Graphs(gid, IRI)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphRow {
    pub gid: u32,
    pub iri_key: String,
}

/// One row of `Quads(gid, sub, pred, obj)`; term columns hold encoded terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadRow {
    pub gid: u32,
    pub sub: String,
    pub pred: String,
    pub obj: String,
}

/// The dataset as the two base relations, plus one fresh annotation
/// identifier per row (`g0..gn` for graphs, `t1..tm` for quads).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseDb {
    pub graphs: Vec<GraphRow>,
    pub quads: Vec<QuadRow>,
    pub graph_ids: Vec<String>,
    pub quad_ids: Vec<String>,
}

/// Builds the base relations. The default graph is gid 0 with an empty IRI
/// key; named graphs get 1..n in dataset order. Quads follow graph order,
/// then triple insertion order.
pub fn encode_dataset(d: &Dataset) -> BaseDb {
    let mut graphs = vec![GraphRow { gid: 0, iri_key: String::new() }];
    for (i, name) in d.named_graphs.keys().enumerate() {
        graphs.push(GraphRow { gid: (i + 1) as u32, iri_key: encode_term(&RdfTerm::Iri(name.clone())) });
    }
    let mut quads = Vec::with_capacity(d.quad_count());
    for gid in 0..d.graph_count() {
        for t in d.graph(gid).expect("gid in range") {
            quads.push(QuadRow {
                gid: gid as u32,
                sub: scope_blank(gid, &t.subject).encode(),
                pred: t.predicate.encode(),
                obj: scope_blank(gid, &t.object).encode(),
            });
        }
    }
    let graph_ids = (0..graphs.len()).map(|i| format!("g{i}")).collect();
    let quad_ids = (1..=quads.len()).map(|i| format!("t{i}")).collect();
    BaseDb { graphs, quads, graph_ids, quad_ids }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ACCOUNTS: &str = "\
<http://people/david> <http://xmlns.com/foaf/0.1/account> <http://bank> .
<http://people/felix> <http://xmlns.com/foaf/0.1/account> <http://games> .
<http://bank> <http://xmlns.com/foaf/0.1/accountServiceHomepage> <http://bank/yourmoney> .
";

    #[test]
    fn parses_example_dataset() {
        let d = parse_nquads(ACCOUNTS).unwrap();
        assert_eq!(d.default_graph.len(), 3);
        assert!(d.named_graphs.is_empty());
        let first = d.default_graph.get_index(0).unwrap();
        assert_eq!(first.subject, RdfTerm::iri("http://people/david"));
        assert_eq!(first.object, RdfTerm::iri("http://bank"));
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let d = parse_nquads("").unwrap();
        assert!(d.default_graph.is_empty());
        assert!(d.named_graphs.is_empty());
        let d = parse_nquads("# only a comment\n\n").unwrap();
        assert_eq!(d.quad_count(), 0);
    }

    #[test]
    fn duplicate_statements_collapse() {
        let d = parse_nquads("<a> <p> <b> .\n<a> <p> <b> .\n").unwrap();
        assert_eq!(d.default_graph.len(), 1);
    }

    #[test]
    fn named_graphs_keep_first_occurrence_order() {
        let src = "<a> <p> <b> <http://g2> .\n<a> <p> <b> <http://g1> .\n<c> <p> <d> <http://g2> .\n";
        let d = parse_nquads(src).unwrap();
        let names: Vec<_> = d.named_graphs.keys().cloned().collect();
        assert_eq!(names, ["http://g2", "http://g1"]);
        assert_eq!(d.named_graphs["http://g2"].len(), 2);
    }

    #[test]
    fn literals_and_blanks() {
        let src = r#"_:b0 <http://p> "Carlos"@pt .
<http://s> <http://p> "1"^^<http://www.w3.org/2001/XMLSchema#int> .
<http://s> <http://p> "say \"hi\"" . # trailing comment
"#;
        let d = parse_nquads(src).unwrap();
        let objs: Vec<_> = d.default_graph.iter().map(|t| t.object.encode()).collect();
        assert_eq!(objs, ["\"Carlos\"@pt", "\"1\"^^<http://www.w3.org/2001/XMLSchema#int>", "\"say \\\"hi\\\"\""]);
        assert_eq!(d.default_graph[0].subject, RdfTerm::blank("b0"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_nquads("<a> <p> <b>\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_nquads("<a> <p> <b> .\n<a> \"lit\" <b> .\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert!(parse_nquads("<a> <p> <b> \"g\" .\n").is_err());
        assert!(parse_nquads("<a> <p> .\n").is_err());
        assert!(parse_nquads("<a> <p> <b> . <c>\n").is_err());
        assert!(parse_nquads("<a <p> <b> .\n").is_err());
    }

    #[test]
    fn term_encoding() {
        assert_eq!(encode_term(&RdfTerm::iri("http://bank")), "<http://bank>");
        assert_eq!(encode_term(&RdfTerm::lang("Carlos", "pt")), "\"Carlos\"@pt");
        assert_eq!(encode_term(&RdfTerm::blank("b0")), "_:b0");
        assert_ne!(
            encode_term(&RdfTerm::typed("1", "http://www.w3.org/2001/XMLSchema#int")),
            encode_term(&RdfTerm::typed("01", "http://www.w3.org/2001/XMLSchema#int"))
        );
    }

    #[test]
    fn encodes_example_dataset() {
        let db = encode_dataset(&parse_nquads(ACCOUNTS).unwrap());
        assert_eq!(db.graphs, vec![GraphRow { gid: 0, iri_key: String::new() }]);
        assert_eq!(db.graph_ids, ["g0"]);
        assert_eq!(db.quad_ids, ["t1", "t2", "t3"]);
        assert_eq!(db.quads[0].sub, "<http://people/david>");
        assert_eq!(db.quads[2].pred, "<http://xmlns.com/foaf/0.1/accountServiceHomepage>");
    }

    #[test]
    fn encodes_empty_dataset() {
        let db = encode_dataset(&Dataset::new());
        assert_eq!(db.graphs.len(), 1);
        assert_eq!(db.graphs[0].iri_key, "");
        assert!(db.quads.is_empty());
        assert!(db.quad_ids.is_empty());
    }

    #[test]
    fn encodes_named_graph() {
        let d = parse_nquads("<http://s> <http://p> <http://o> <http://g> .\n").unwrap();
        let db = encode_dataset(&d);
        assert_eq!(
            db.graphs,
            vec![GraphRow { gid: 0, iri_key: String::new() }, GraphRow { gid: 1, iri_key: "<http://g>".into() }]
        );
        assert_eq!(db.quads.len(), 1);
        assert_eq!(db.quads[0].gid, 1);
        assert_eq!(db.graph_ids, ["g0", "g1"]);
    }

    #[test]
    fn blank_nodes_are_scoped_per_graph() {
        let d = parse_nquads("_:x <http://p> <http://o> .\n_:x <http://p> <http://o> <http://g> .\n").unwrap();
        let db = encode_dataset(&d);
        assert_ne!(db.quads[0].sub, db.quads[1].sub);
    }

    #[test]
    fn roundtrips_through_nquads() {
        let src = "<a> <p> \"x\"@en <http://g> .\n_:b <p> <c> .\n";
        let d = parse_nquads(src).unwrap();
        assert_eq!(parse_nquads(&d.to_nquads()).unwrap(), d);
    }
}
