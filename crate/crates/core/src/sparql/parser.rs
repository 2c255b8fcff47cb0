//! Recursive-descent parser for the SPARQL fragment, with group desugaring.

use std::collections::BTreeMap;

use super::ast::*;
use crate::error::QueryError;
use crate::rdf::{Literal, LiteralKind, RdfTerm};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    Caret2,
    Word(String),
    Blank(String),
    Sym(&'static str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, position: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { position, message: message.into() }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn tokenize(mut self) -> Result<Vec<(usize, Tok)>, QueryError> {
        let mut out = Vec::new();
        loop {
            self.take_while(char::is_whitespace);
            let start = self.pos;
            let Some(c) = self.peek_char() else { break };
            let tok = match c {
                '#' => {
                    self.take_while(|c| c != '\n');
                    continue;
                }
                '<' => {
                    self.bump();
                    let iri = self.take_while(|c| c != '>' && !c.is_whitespace()).to_string();
                    if self.bump() != Some('>') {
                        return Err(self.err(start, "unterminated IRI"));
                    }
                    Tok::Iri(iri)
                }
                '?' | '$' => {
                    self.bump();
                    let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    if name.is_empty() {
                        return Err(self.err(start, "empty variable name"));
                    }
                    Tok::Var(name.to_string())
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('r') => s.push('\r'),
                                Some('t') => s.push('\t'),
                                Some(c @ ('"' | '\\' | '\'')) => s.push(c),
                                _ => return Err(self.err(start, "invalid escape in string")),
                            },
                            Some(c) => s.push(c),
                            None => return Err(self.err(start, "unterminated string")),
                        }
                    }
                    Tok::Str(s)
                }
                '@' => {
                    self.bump();
                    let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if tag.is_empty() {
                        return Err(self.err(start, "empty language tag"));
                    }
                    Tok::LangTag(tag.to_string())
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(start, "expected '^^'"));
                    }
                    Tok::Caret2
                }
                '_' if self.src[self.pos..].starts_with("_:") => {
                    self.pos += 2;
                    Tok::Blank(self.take_while(|c| c.is_alphanumeric() || c == '_').to_string())
                }
                '{' | '}' | '(' | ')' | '.' | '*' | '=' | ',' | ';' => {
                    self.bump();
                    Tok::Sym(match c {
                        '{' => "{",
                        '}' => "}",
                        '(' => "(",
                        ')' => ")",
                        '.' => ".",
                        '*' => "*",
                        '=' => "=",
                        ',' => ",",
                        _ => ";",
                    })
                }
                '!' => {
                    self.bump();
                    if self.peek_char() == Some('=') {
                        self.bump();
                        Tok::Sym("!=")
                    } else {
                        Tok::Sym("!")
                    }
                }
                '&' | '|' => {
                    self.bump();
                    if self.bump() != Some(c) {
                        return Err(self.err(start, format!("expected '{c}{c}'")));
                    }
                    Tok::Sym(if c == '&' { "&&" } else { "||" })
                }
                c if c.is_alphabetic() || c == ':' => {
                    let word = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
                    if self.peek_char() == Some(':') {
                        self.bump();
                        let local = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
                        // a trailing dot ends the statement, it is not part of the name
                        let trimmed = local.trim_end_matches('.');
                        self.pos -= local.len() - trimmed.len();
                        Tok::PName(word.to_string(), trimmed.to_string())
                    } else {
                        Tok::Word(word.to_string())
                    }
                }
                other => return Err(self.err(start, format!("unexpected character '{other}'"))),
            };
            out.push((start, tok));
        }
        Ok(out)
    }
}

/// One element of a group graph pattern, before desugaring.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupItem {
    Triple(TriplePattern),
    Optional(GraphPattern),
    Minus(GraphPattern),
    Filter(FilterExpr),
    /// A nested group, a UNION chain, or a GRAPH pattern: joined as a unit.
    Pattern(GraphPattern),
}

/// Folds the elements of one group into a single pattern.
///
/// Adjacent triples form a basic graph pattern, nested as
/// `t1 AND (t2 AND (... AND tn))`. OPTIONAL and MINUS attach to everything
/// accumulated before them; an OPTIONAL group of the form `{ P FILTER R }`
/// becomes `Optional(acc, P, R)`. The group's FILTERs, wherever they appear,
/// apply to the whole group last.
pub fn desugar_group(items: Vec<GroupItem>) -> GraphPattern {
    fn join(acc: Option<GraphPattern>, p: GraphPattern) -> Option<GraphPattern> {
        Some(match acc {
            None => p,
            Some(a) => GraphPattern::and(a, p),
        })
    }
    fn bgp(block: &mut Vec<TriplePattern>) -> Option<GraphPattern> {
        let mut it = std::mem::take(block).into_iter().rev().map(GraphPattern::Triple);
        let last = it.next()?;
        Some(it.fold(last, |acc, t| GraphPattern::and(t, acc)))
    }

    let mut acc: Option<GraphPattern> = None;
    let mut block = Vec::new();
    let mut filters = Vec::new();
    for item in items {
        if let GroupItem::Triple(t) = item {
            block.push(t);
            continue;
        }
        if let Some(b) = bgp(&mut block) {
            acc = join(acc, b);
        }
        match item {
            GroupItem::Triple(_) => unreachable!(),
            GroupItem::Filter(r) => filters.push(r),
            GroupItem::Pattern(p) => acc = join(acc, p),
            GroupItem::Optional(p) => {
                let left = acc.take().unwrap_or(GraphPattern::Empty);
                acc = Some(match p {
                    GraphPattern::Filter(inner, r) => GraphPattern::optional(left, *inner, Some(r)),
                    p => GraphPattern::optional(left, p, None),
                });
            }
            GroupItem::Minus(p) => {
                let left = acc.take().unwrap_or(GraphPattern::Empty);
                acc = Some(GraphPattern::minus(left, p));
            }
        }
    }
    if let Some(b) = bgp(&mut block) {
        acc = join(acc, b);
    }
    let pattern = acc.unwrap_or(GraphPattern::Empty);
    match filters.into_iter().reduce(FilterExpr::and) {
        None => pattern,
        Some(r) => GraphPattern::filter(pattern, r),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    prefixes: BTreeMap<String, String>,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { position: self.pos(), message: message.into() }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), QueryError> {
        if self.is_sym(s) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{s}'")))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), QueryError> {
        if self.is_word(w) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {w}")))
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        while self.is_word("PREFIX") {
            self.at += 1;
            let name = match self.next() {
                Some(Tok::PName(p, local)) if local.is_empty() => p,
                Some(Tok::Word(p)) => p,
                _ => {
                    self.at -= 1;
                    return Err(self.err("expected prefix name"));
                }
            };
            match self.next() {
                Some(Tok::Iri(iri)) => {
                    self.prefixes.insert(name, iri);
                }
                _ => {
                    self.at -= 1;
                    return Err(self.err("expected IRI in PREFIX declaration"));
                }
            }
        }
        self.expect_word("SELECT")?;
        let projection = if self.is_sym("*") {
            self.at += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(Var::new(v.clone()));
                self.at += 1;
            }
            if vars.is_empty() {
                return Err(self.err("expected '*' or variables after SELECT"));
            }
            Projection::Vars(vars)
        };
        if self.is_word("WHERE") {
            self.at += 1;
        }
        let pattern = self.group()?;
        if self.peek().is_some() {
            return Err(self.err("unexpected content after query"));
        }
        let query = Query { prefixes: std::mem::take(&mut self.prefixes), projection, pattern };
        if let Projection::Vars(vs) = &query.projection {
            let in_scope = query.pattern.vars();
            if let Some(v) = vs.iter().find(|v| !in_scope.contains(v)) {
                return Err(QueryError::Projection(v.0.clone()));
            }
        }
        Ok(query)
    }

    fn group(&mut self) -> Result<GraphPattern, QueryError> {
        self.expect_sym("{")?;
        let mut items = Vec::new();
        loop {
            if self.is_sym("}") {
                self.at += 1;
                break;
            }
            if self.is_sym(".") {
                self.at += 1;
                continue;
            }
            if self.peek().is_none() {
                return Err(self.err("unterminated group, expected '}'"));
            }
            let item = if self.is_word("OPTIONAL") {
                self.at += 1;
                GroupItem::Optional(self.group()?)
            } else if self.is_word("MINUS") {
                self.at += 1;
                GroupItem::Minus(self.group()?)
            } else if self.is_word("FILTER") {
                self.at += 1;
                GroupItem::Filter(self.constraint()?)
            } else if self.is_word("GRAPH") {
                self.at += 1;
                let name = match self.next() {
                    Some(Tok::Var(v)) => GraphName::Var(Var::new(v)),
                    Some(Tok::Iri(iri)) => GraphName::Iri(iri),
                    Some(Tok::PName(p, l)) => GraphName::Iri(self.expand(&p, &l)?),
                    _ => {
                        self.at -= 1;
                        return Err(self.err("expected IRI or variable after GRAPH"));
                    }
                };
                GroupItem::Pattern(GraphPattern::graph(name, self.group()?))
            } else if self.is_sym("{") {
                let mut p = self.group()?;
                while self.is_word("UNION") {
                    self.at += 1;
                    p = GraphPattern::union(p, self.group()?);
                }
                GroupItem::Pattern(p)
            } else {
                let t = self.triple()?;
                if matches!(self.peek(), Some(Tok::Var(_) | Tok::Iri(_) | Tok::PName(..) | Tok::Str(_))) {
                    return Err(self.err("expected '.' between triple patterns"));
                }
                GroupItem::Triple(t)
            };
            items.push(item);
        }
        Ok(desugar_group(items))
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<String, QueryError> {
        match self.prefixes.get(prefix) {
            Some(base) => Ok(format!("{base}{local}")),
            None => Err(QueryError::UnknownPrefix(prefix.to_string())),
        }
    }

    fn triple(&mut self) -> Result<TriplePattern, QueryError> {
        let subject = self.term_or_var()?;
        let pred_pos = self.pos();
        let predicate = if self.is_word("a") {
            self.at += 1;
            TermPattern::iri(RDF_TYPE)
        } else {
            self.term_or_var()?
        };
        if !matches!(predicate, TermPattern::Var(_) | TermPattern::Term(RdfTerm::Iri(_))) {
            return Err(QueryError::Syntax {
                position: pred_pos,
                message: "predicate must be an IRI or a variable".into(),
            });
        }
        let object = self.term_or_var()?;
        Ok(TriplePattern::new(subject, predicate, object))
    }

    fn term_or_var(&mut self) -> Result<TermPattern, QueryError> {
        let start = self.pos();
        let tok = self.next().ok_or_else(|| self.err("unexpected end of query"))?;
        Ok(match tok {
            Tok::Var(v) => TermPattern::Var(Var::new(v)),
            Tok::Iri(iri) => TermPattern::iri(&iri),
            Tok::PName(p, l) => TermPattern::Term(RdfTerm::Iri(self.expand(&p, &l)?)),
            Tok::Str(lexical) => {
                let kind = match self.peek() {
                    Some(Tok::LangTag(tag)) => {
                        let tag = tag.clone();
                        self.at += 1;
                        LiteralKind::Lang(tag)
                    }
                    Some(Tok::Caret2) => {
                        self.at += 1;
                        match self.next() {
                            Some(Tok::Iri(dt)) => LiteralKind::Typed(dt),
                            Some(Tok::PName(p, l)) => LiteralKind::Typed(self.expand(&p, &l)?),
                            _ => return Err(self.err("expected datatype IRI after '^^'")),
                        }
                    }
                    _ => LiteralKind::Simple,
                };
                TermPattern::Term(RdfTerm::Literal(Literal { lexical, kind }))
            }
            Tok::Blank(_) => {
                return Err(QueryError::Syntax {
                    position: start,
                    message: "blank nodes are not allowed in patterns".into(),
                })
            }
            other => {
                return Err(QueryError::Syntax {
                    position: start,
                    message: format!("expected a term or variable, found {other:?}"),
                })
            }
        })
    }

    fn constraint(&mut self) -> Result<FilterExpr, QueryError> {
        if self.is_sym("(") {
            self.at += 1;
            let e = self.expr()?;
            self.expect_sym(")")?;
            Ok(e)
        } else if self.is_word("EXISTS") || self.is_word("NOT") || self.is_word("BOUND") {
            match self.primary()? {
                Primary::Bool(e) => Ok(e),
                Primary::Term(_) => unreachable!(),
            }
        } else {
            Err(self.err("expected '(' , EXISTS, NOT EXISTS or BOUND after FILTER"))
        }
    }

    fn expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut e = self.conj()?;
        while self.is_sym("||") {
            self.at += 1;
            e = FilterExpr::or(e, self.conj()?);
        }
        Ok(e)
    }

    fn conj(&mut self) -> Result<FilterExpr, QueryError> {
        let mut e = self.unary()?;
        while self.is_sym("&&") {
            self.at += 1;
            e = FilterExpr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<FilterExpr, QueryError> {
        if self.is_sym("!") {
            self.at += 1;
            return Ok(FilterExpr::not(self.unary()?));
        }
        let start = self.pos();
        let lhs = self.primary()?;
        let op = if self.is_sym("=") {
            Some(true)
        } else if self.is_sym("!=") {
            Some(false)
        } else {
            None
        };
        match (lhs, op) {
            (Primary::Bool(e), None) => Ok(e),
            (Primary::Term(a), Some(eq)) => {
                self.at += 1;
                let b = match self.primary()? {
                    Primary::Term(b) => b,
                    Primary::Bool(_) => return Err(self.err("expected a term or variable operand")),
                };
                Ok(if eq { FilterExpr::Eq(a, b) } else { FilterExpr::Neq(a, b) })
            }
            (Primary::Term(_), None) => {
                Err(QueryError::Syntax { position: start, message: "a bare term is not a boolean expression".into() })
            }
            (Primary::Bool(_), Some(_)) => Err(self.err("cannot compare boolean expressions")),
        }
    }

    fn primary(&mut self) -> Result<Primary, QueryError> {
        if self.is_sym("(") {
            self.at += 1;
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(Primary::Bool(e));
        }
        if self.is_word("BOUND") {
            self.at += 1;
            self.expect_sym("(")?;
            let v = match self.next() {
                Some(Tok::Var(v)) => Var::new(v),
                _ => {
                    self.at -= 1;
                    return Err(self.err("expected variable in BOUND"));
                }
            };
            self.expect_sym(")")?;
            return Ok(Primary::Bool(FilterExpr::Bound(v)));
        }
        if self.is_word("EXISTS") {
            self.at += 1;
            return Ok(Primary::Bool(FilterExpr::exists(self.group()?)));
        }
        if self.is_word("NOT") && matches!(self.peek2(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case("EXISTS")) {
            self.at += 2;
            return Ok(Primary::Bool(FilterExpr::not_exists(self.group()?)));
        }
        if self.is_word("true") {
            self.at += 1;
            return Ok(Primary::Bool(FilterExpr::True));
        }
        if self.is_word("false") {
            self.at += 1;
            return Ok(Primary::Bool(FilterExpr::False));
        }
        Ok(Primary::Term(self.term_or_var()?))
    }
}

enum Primary {
    Bool(FilterExpr),
    Term(TermPattern),
}

/// Parses a query, expanding prefixed names and desugaring every group.
pub fn parse_query(input: &str) -> Result<Query, QueryError> {
    let toks = Lexer { src: input, pos: 0 }.tokenize()?;
    Parser { toks, at: 0, end: input.len(), prefixes: BTreeMap::new() }.query()
}
