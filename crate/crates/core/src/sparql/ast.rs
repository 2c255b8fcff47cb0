//! Abstract syntax of the supported SPARQL fragment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rdf::RdfTerm;

/// A query variable, stored without its `?`. Variables are totally ordered
/// by name; every schema in the engine follows this order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// An RDF term or a variable, in a triple pattern or filter operand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermPattern {
    Term(RdfTerm),
    Var(Var),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(Var::new(name))
    }

    pub fn iri(iri: &str) -> Self {
        TermPattern::Term(RdfTerm::iri(iri))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Term(t) => t.fmt(f),
            TermPattern::Var(v) => v.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Subject and object range over IRIs, literals and variables, the
    /// predicate over IRIs and variables. Blank nodes never occur.
    pub fn is_well_sorted(&self) -> bool {
        let no_blank = |p: &TermPattern| !matches!(p, TermPattern::Term(RdfTerm::Blank(_)));
        no_blank(&self.subject)
            && no_blank(&self.object)
            && matches!(self.predicate, TermPattern::Var(_) | TermPattern::Term(RdfTerm::Iri(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphName {
    Iri(String),
    Var(Var),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphPattern {
    Empty,
    Triple(TriplePattern),
    And(Box<GraphPattern>, Box<GraphPattern>),
    Union(Box<GraphPattern>, Box<GraphPattern>),
    Minus(Box<GraphPattern>, Box<GraphPattern>),
    /// `left OPTIONAL right`, with the filter lifted out of the optional group
    /// when the group was `{ ... FILTER R }`.
    Optional {
        left: Box<GraphPattern>,
        right: Box<GraphPattern>,
        filter: Option<FilterExpr>,
    },
    Filter(Box<GraphPattern>, FilterExpr),
    Graph(GraphName, Box<GraphPattern>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FilterExpr {
    True,
    False,
    Eq(TermPattern, TermPattern),
    Neq(TermPattern, TermPattern),
    Bound(Var),
    Not(Box<FilterExpr>),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Exists(Box<GraphPattern>),
    NotExists(Box<GraphPattern>),
}

impl GraphPattern {
    pub fn triple(s: TermPattern, p: TermPattern, o: TermPattern) -> Self {
        GraphPattern::Triple(TriplePattern::new(s, p, o))
    }

    pub fn and(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::And(Box::new(a), Box::new(b))
    }

    pub fn union(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::Union(Box::new(a), Box::new(b))
    }

    pub fn minus(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::Minus(Box::new(a), Box::new(b))
    }

    pub fn optional(a: GraphPattern, b: GraphPattern, filter: Option<FilterExpr>) -> Self {
        GraphPattern::Optional { left: Box::new(a), right: Box::new(b), filter }
    }

    pub fn filter(p: GraphPattern, r: FilterExpr) -> Self {
        GraphPattern::Filter(Box::new(p), r)
    }

    pub fn graph(name: GraphName, p: GraphPattern) -> Self {
        GraphPattern::Graph(name, Box::new(p))
    }

    /// In-scope variables, in variable order.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            GraphPattern::Empty => {}
            GraphPattern::Triple(t) => {
                out.extend(t.positions().into_iter().filter_map(TermPattern::as_var).cloned());
            }
            GraphPattern::And(a, b) | GraphPattern::Union(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            GraphPattern::Optional { left, right, .. } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
            // right-hand side of MINUS and filter expressions bind nothing
            GraphPattern::Minus(a, _) | GraphPattern::Filter(a, _) => a.collect_vars(out),
            GraphPattern::Graph(name, p) => {
                if let GraphName::Var(v) = name {
                    out.insert(v.clone());
                }
                p.collect_vars(out);
            }
        }
    }

    /// True when every triple pattern, including those nested in filters,
    /// is well sorted.
    pub fn is_well_sorted(&self) -> bool {
        match self {
            GraphPattern::Empty => true,
            GraphPattern::Triple(t) => t.is_well_sorted(),
            GraphPattern::And(a, b) | GraphPattern::Union(a, b) | GraphPattern::Minus(a, b) => {
                a.is_well_sorted() && b.is_well_sorted()
            }
            GraphPattern::Optional { left, right, filter } => {
                left.is_well_sorted()
                    && right.is_well_sorted()
                    && filter.as_ref().is_none_or(FilterExpr::is_well_sorted)
            }
            GraphPattern::Filter(p, r) => p.is_well_sorted() && r.is_well_sorted(),
            GraphPattern::Graph(_, p) => p.is_well_sorted(),
        }
    }

    /// Splits an optional into `(right, filter)`, treating an unfiltered
    /// optional whose right side is a FILTER pattern like the filtered form.
    pub fn optional_parts<'a>(
        right: &'a GraphPattern,
        filter: &'a Option<FilterExpr>,
    ) -> (&'a GraphPattern, Option<&'a FilterExpr>) {
        match (filter, right) {
            (Some(r), p) => (p, Some(r)),
            (None, GraphPattern::Filter(p, r)) => (p, Some(r)),
            (None, p) => (p, None),
        }
    }
}

impl FilterExpr {
    pub fn and(a: FilterExpr, b: FilterExpr) -> Self {
        FilterExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FilterExpr, b: FilterExpr) -> Self {
        FilterExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: FilterExpr) -> Self {
        FilterExpr::Not(Box::new(a))
    }

    pub fn exists(p: GraphPattern) -> Self {
        FilterExpr::Exists(Box::new(p))
    }

    pub fn not_exists(p: GraphPattern) -> Self {
        FilterExpr::NotExists(Box::new(p))
    }

    /// EXISTS / NOT EXISTS subpatterns, left to right.
    pub fn exists_patterns(&self) -> Vec<&GraphPattern> {
        let mut out = Vec::new();
        self.collect_exists(&mut out);
        out
    }

    fn collect_exists<'a>(&'a self, out: &mut Vec<&'a GraphPattern>) {
        match self {
            FilterExpr::Exists(p) | FilterExpr::NotExists(p) => out.push(p),
            FilterExpr::Not(e) => e.collect_exists(out),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.collect_exists(out);
                b.collect_exists(out);
            }
            _ => {}
        }
    }

    fn is_well_sorted(&self) -> bool {
        match self {
            FilterExpr::Exists(p) | FilterExpr::NotExists(p) => p.is_well_sorted(),
            FilterExpr::Not(e) => e.is_well_sorted(),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => a.is_well_sorted() && b.is_well_sorted(),
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<Var>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub projection: Projection,
    pub pattern: GraphPattern,
}

impl Query {
    /// `SELECT *` over `pattern`.
    pub fn select_all(pattern: GraphPattern) -> Self {
        Query { prefixes: BTreeMap::new(), projection: Projection::All, pattern }
    }

    /// The output columns: the selected variables, or every in-scope
    /// variable in variable order for `SELECT *`.
    pub fn projected_vars(&self) -> Vec<Var> {
        match &self.projection {
            Projection::All => self.pattern.vars().into_iter().collect(),
            Projection::Vars(vs) => vs.clone(),
        }
    }
}
