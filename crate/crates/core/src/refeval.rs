//! Reference evaluator: SPARQL graph patterns evaluated directly over a
//! dataset with multiset semantics. This is the ground truth the relational
//! translation is checked against.

use std::collections::BTreeMap;
use std::fmt;

use crate::rdf::{scope_blank, Dataset, RdfTerm};
use crate::sparql::{FilterExpr, GraphName, GraphPattern, TermPattern, TriplePattern, Var};

/// A partial function from variables to terms. Absent = unbound.
pub type SolutionMapping = BTreeMap<Var, RdfTerm>;

/// A bag of solution mappings; multiplicities are always at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionMultiset {
    counts: BTreeMap<SolutionMapping, u64>,
}

impl SolutionMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// `{| μ |}` with multiplicity `n`.
    pub fn singleton(mu: SolutionMapping, n: u64) -> Self {
        let mut m = Self::new();
        m.insert(mu, n);
        m
    }

    /// `{| μ0 |}`.
    pub fn unit() -> Self {
        Self::singleton(SolutionMapping::new(), 1)
    }

    /// Adds `n` copies of `mu`; adding zero copies is a no-op.
    pub fn insert(&mut self, mu: SolutionMapping, n: u64) {
        if n > 0 {
            *self.counts.entry(mu).or_insert(0) += n;
        }
    }

    pub fn multiplicity(&self, mu: &SolutionMapping) -> u64 {
        self.counts.get(mu).copied().unwrap_or(0)
    }

    /// Total number of solutions, counting duplicates.
    pub fn len(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct_len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SolutionMapping, u64)> {
        self.counts.iter().map(|(m, &n)| (m, n))
    }
}

impl FromIterator<(SolutionMapping, u64)> for SolutionMultiset {
    fn from_iter<I: IntoIterator<Item = (SolutionMapping, u64)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (mu, n) in iter {
            m.insert(mu, n);
        }
        m
    }
}

impl fmt::Display for SolutionMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{|")?;
        for (i, (mu, n)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {{")?;
            for (j, (v, t)) in mu.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}->{t}")?;
            }
            write!(f, "}}")?;
            if n > 1 {
                write!(f, " x{n}")?;
            }
        }
        write!(f, " |}}")
    }
}

/// Mappings are compatible when they agree on every shared variable.
pub fn compatible(a: &SolutionMapping, b: &SolutionMapping) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().all(|(v, t)| large.get(v).is_none_or(|u| u == t))
}

fn merge(a: &SolutionMapping, b: &SolutionMapping) -> SolutionMapping {
    let mut out = a.clone();
    out.extend(b.iter().map(|(v, t)| (v.clone(), t.clone())));
    out
}

fn disjoint(a: &SolutionMapping, b: &SolutionMapping) -> bool {
    a.keys().all(|v| !b.contains_key(v))
}

/// Bag join: unions of compatible pairs, multiplicities multiplied.
pub fn join(left: &SolutionMultiset, right: &SolutionMultiset) -> SolutionMultiset {
    let mut out = SolutionMultiset::new();
    for (m1, c1) in left.iter() {
        for (m2, c2) in right.iter() {
            if compatible(m1, m2) {
                out.insert(merge(m1, m2), c1 * c2);
            }
        }
    }
    out
}

/// Bag union: multiplicities add.
pub fn union(left: &SolutionMultiset, right: &SolutionMultiset) -> SolutionMultiset {
    let mut out = left.clone();
    for (m, c) in right.iter() {
        out.insert(m.clone(), c);
    }
    out
}

/// Keeps a left solution unless some right solution is compatible with it
/// and shares at least one variable.
pub fn minus(left: &SolutionMultiset, right: &SolutionMultiset) -> SolutionMultiset {
    left.iter()
        .filter(|(m1, _)| right.iter().all(|(m2, _)| !compatible(m1, m2) || disjoint(m1, m2)))
        .map(|(m, c)| (m.clone(), c))
        .collect()
}

/// How `EXISTS (P)` relates a solution `μ` to the solutions of `P`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExistsSemantics {
    /// `μ(P)` has a solution: the variables of `μ` are substituted into
    /// `P` before it is evaluated.
    #[default]
    Substitution,
    /// Some solution of `P` binds every variable that `μ` binds and `P`
    /// has in scope to the same term. This is the reading realised by
    /// the relational translation; it differs from substitution when `P`
    /// may leave such a variable unbound, or mentions a variable of `μ`
    /// only inside a filter or a MINUS right-hand side.
    SharedVariables,
}

/// Evaluates graph patterns over one dataset.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    dataset: &'a Dataset,
    exists: ExistsSemantics,
}

impl<'a> Evaluator<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Evaluator { dataset, exists: ExistsSemantics::Substitution }
    }

    pub fn with_exists_semantics(mut self, exists: ExistsSemantics) -> Self {
        self.exists = exists;
        self
    }

    /// Evaluates `p` with active graph `gid` (0 = default graph).
    pub fn eval(&self, p: &GraphPattern, gid: usize) -> SolutionMultiset {
        match p {
            GraphPattern::Empty => SolutionMultiset::unit(),
            GraphPattern::Triple(t) => self.eval_triple(t, gid),
            GraphPattern::And(a, b) => join(&self.eval(a, gid), &self.eval(b, gid)),
            GraphPattern::Union(a, b) => union(&self.eval(a, gid), &self.eval(b, gid)),
            GraphPattern::Minus(a, b) => minus(&self.eval(a, gid), &self.eval(b, gid)),
            GraphPattern::Optional { left, right, filter } => {
                let (right, filter) = GraphPattern::optional_parts(right, filter);
                let r = filter.cloned().unwrap_or(FilterExpr::True);
                self.left_join(&self.eval(left, gid), &self.eval(right, gid), &r, gid)
            }
            GraphPattern::Filter(inner, r) => self
                .eval(inner, gid)
                .iter()
                .filter(|(mu, _)| self.satisfies(mu, r, gid))
                .map(|(mu, c)| (mu.clone(), c))
                .collect(),
            GraphPattern::Graph(GraphName::Iri(iri), inner) => match self.dataset.named_gid(iri) {
                Some(g) => self.eval(inner, g),
                None => SolutionMultiset::new(),
            },
            GraphPattern::Graph(GraphName::Var(v), inner) => {
                let mut out = SolutionMultiset::new();
                for (i, name) in self.dataset.named_graphs.keys().enumerate() {
                    let binding = SolutionMultiset::singleton(
                        SolutionMapping::from([(v.clone(), RdfTerm::Iri(name.clone()))]),
                        1,
                    );
                    out = union(&out, &join(&self.eval(inner, i + 1), &binding));
                }
                out
            }
        }
    }

    fn eval_triple(&self, t: &TriplePattern, gid: usize) -> SolutionMultiset {
        let mut out = SolutionMultiset::new();
        let Some(graph) = self.dataset.graph(gid) else { return out };
        let pattern = t.positions();
        for triple in graph {
            let terms = [scope_blank(gid, &triple.subject), triple.predicate.clone(), scope_blank(gid, &triple.object)];
            let mut mu = SolutionMapping::new();
            let matched = pattern.iter().zip(terms).all(|(p, term)| match p {
                TermPattern::Term(c) => *c == term,
                TermPattern::Var(v) => match mu.get(v) {
                    Some(bound) => *bound == term,
                    None => {
                        mu.insert(v.clone(), term);
                        true
                    }
                },
            });
            if matched {
                out.insert(mu, 1);
            }
        }
        out
    }

    /// Keeps each left solution for which no right solution is compatible
    /// and, merged with it, satisfies `r`.
    pub fn diff(
        &self,
        left: &SolutionMultiset,
        right: &SolutionMultiset,
        r: &FilterExpr,
        gid: usize,
    ) -> SolutionMultiset {
        left.iter()
            .filter(|(m1, _)| {
                right.iter().all(|(m2, _)| !compatible(m1, m2) || !self.satisfies(&merge(m1, m2), r, gid))
            })
            .map(|(m, c)| (m.clone(), c))
            .collect()
    }

    /// Join restricted to merged pairs satisfying `r`, plus `diff`.
    pub fn left_join(
        &self,
        left: &SolutionMultiset,
        right: &SolutionMultiset,
        r: &FilterExpr,
        gid: usize,
    ) -> SolutionMultiset {
        let mut joined = SolutionMultiset::new();
        for (m1, c1) in left.iter() {
            for (m2, c2) in right.iter() {
                if compatible(m1, m2) {
                    let mu = merge(m1, m2);
                    if self.satisfies(&mu, r, gid) {
                        joined.insert(mu, c1 * c2);
                    }
                }
            }
        }
        union(&joined, &self.diff(left, right, r, gid))
    }

    /// Filter satisfaction. A comparison with an unbound operand is false,
    /// and the connectives are evaluated classically over that outcome.
    pub fn satisfies(&self, mu: &SolutionMapping, r: &FilterExpr, gid: usize) -> bool {
        let value = |p: &TermPattern| -> Option<RdfTerm> {
            match p {
                TermPattern::Term(t) => Some(t.clone()),
                TermPattern::Var(v) => mu.get(v).cloned(),
            }
        };
        match r {
            FilterExpr::True => true,
            FilterExpr::False => false,
            FilterExpr::Eq(a, b) => matches!((value(a), value(b)), (Some(x), Some(y)) if x == y),
            FilterExpr::Neq(a, b) => matches!((value(a), value(b)), (Some(x), Some(y)) if x != y),
            FilterExpr::Bound(v) => mu.contains_key(v),
            FilterExpr::Not(e) => !self.satisfies(mu, e, gid),
            FilterExpr::And(a, b) => self.satisfies(mu, a, gid) && self.satisfies(mu, b, gid),
            FilterExpr::Or(a, b) => self.satisfies(mu, a, gid) || self.satisfies(mu, b, gid),
            FilterExpr::Exists(p) => self.exists(mu, p, gid),
            FilterExpr::NotExists(p) => !self.exists(mu, p, gid),
        }
    }

    fn exists(&self, mu: &SolutionMapping, p: &GraphPattern, gid: usize) -> bool {
        match self.exists {
            ExistsSemantics::Substitution => !self.eval(&substitute(mu, p), gid).is_empty(),
            ExistsSemantics::SharedVariables => {
                let in_scope = p.vars();
                let shared: Vec<_> = mu.iter().filter(|(v, _)| in_scope.contains(*v)).collect();
                self.eval(p, gid).iter().any(|(nu, _)| shared.iter().all(|(v, t)| nu.get(*v) == Some(*t)))
            }
        }
    }
}

/// Evaluates `p` over `d` with active graph `gid`.
pub fn eval(p: &GraphPattern, d: &Dataset, gid: usize) -> SolutionMultiset {
    Evaluator::new(d).eval(p, gid)
}

pub fn satisfies(mu: &SolutionMapping, r: &FilterExpr, d: &Dataset, gid: usize) -> bool {
    Evaluator::new(d).satisfies(mu, r, gid)
}

pub fn diff(
    left: &SolutionMultiset,
    right: &SolutionMultiset,
    r: &FilterExpr,
    d: &Dataset,
    gid: usize,
) -> SolutionMultiset {
    Evaluator::new(d).diff(left, right, r, gid)
}

pub fn left_join(
    left: &SolutionMultiset,
    right: &SolutionMultiset,
    r: &FilterExpr,
    d: &Dataset,
    gid: usize,
) -> SolutionMultiset {
    Evaluator::new(d).left_join(left, right, r, gid)
}

/// Replaces every variable bound by `mu` with its term, throughout `p`
/// including nested filters.
pub fn substitute(mu: &SolutionMapping, p: &GraphPattern) -> GraphPattern {
    let sub = |x: &GraphPattern| Box::new(substitute(mu, x));
    match p {
        GraphPattern::Empty => GraphPattern::Empty,
        GraphPattern::Triple(t) => GraphPattern::Triple(TriplePattern::new(
            substitute_term(mu, &t.subject),
            substitute_term(mu, &t.predicate),
            substitute_term(mu, &t.object),
        )),
        GraphPattern::And(a, b) => GraphPattern::And(sub(a), sub(b)),
        GraphPattern::Union(a, b) => GraphPattern::Union(sub(a), sub(b)),
        GraphPattern::Minus(a, b) => GraphPattern::Minus(sub(a), sub(b)),
        GraphPattern::Optional { left, right, filter } => GraphPattern::Optional {
            left: sub(left),
            right: sub(right),
            filter: filter.as_ref().map(|r| substitute_expr(mu, r)),
        },
        GraphPattern::Filter(inner, r) => GraphPattern::Filter(sub(inner), substitute_expr(mu, r)),
        GraphPattern::Graph(GraphName::Var(v), inner) => match mu.get(v) {
            None => GraphPattern::Graph(GraphName::Var(v.clone()), sub(inner)),
            Some(RdfTerm::Iri(iri)) => GraphPattern::Graph(GraphName::Iri(iri.clone()), sub(inner)),
            // no graph is named by a literal or blank node
            Some(_) => GraphPattern::Filter(sub(inner), FilterExpr::False),
        },
        GraphPattern::Graph(name, inner) => GraphPattern::Graph(name.clone(), sub(inner)),
    }
}

fn substitute_term(mu: &SolutionMapping, t: &TermPattern) -> TermPattern {
    match t {
        TermPattern::Var(v) => mu.get(v).map_or_else(|| t.clone(), |term| TermPattern::Term(term.clone())),
        TermPattern::Term(_) => t.clone(),
    }
}

fn substitute_expr(mu: &SolutionMapping, r: &FilterExpr) -> FilterExpr {
    match r {
        FilterExpr::True | FilterExpr::False => r.clone(),
        FilterExpr::Eq(a, b) => FilterExpr::Eq(substitute_term(mu, a), substitute_term(mu, b)),
        FilterExpr::Neq(a, b) => FilterExpr::Neq(substitute_term(mu, a), substitute_term(mu, b)),
        FilterExpr::Bound(v) if mu.contains_key(v) => FilterExpr::True,
        FilterExpr::Bound(_) => r.clone(),
        FilterExpr::Not(e) => FilterExpr::not(substitute_expr(mu, e)),
        FilterExpr::And(a, b) => FilterExpr::and(substitute_expr(mu, a), substitute_expr(mu, b)),
        FilterExpr::Or(a, b) => FilterExpr::or(substitute_expr(mu, a), substitute_expr(mu, b)),
        FilterExpr::Exists(p) => FilterExpr::exists(substitute(mu, p)),
        FilterExpr::NotExists(p) => FilterExpr::not_exists(substitute(mu, p)),
    }
}
