//! Seeded generators for small datasets, graph patterns and provenance
//! terms.

use rand::seq::SliceRandom;
use rand::Rng;

use sparqlprov::rdf::{Dataset, RdfTerm, Triple};
use sparqlprov::semiring::ProvTerm;
use sparqlprov::sparql::{FilterExpr, GraphName, GraphPattern, Projection, Query, TermPattern, Var};

pub const IRIS: [&str; 4] = ["http://ex/a", "http://ex/b", "http://ex/c", "http://ex/d"];
pub const VARS: [&str; 3] = ["x", "y", "z"];

fn iri<R: Rng>(rng: &mut R) -> RdfTerm {
    RdfTerm::iri(*IRIS.choose(rng).unwrap())
}

/// Up to 8 triples over the 4-IRI vocabulary spread across the default
/// graph and up to two named graphs, which are themselves named by
/// vocabulary IRIs. Objects are occasionally a literal or a blank node.
pub fn dataset<R: Rng>(rng: &mut R) -> Dataset {
    let mut d = Dataset::new();
    let count = rng.gen_range(0..=2);
    let named: Vec<&str> = IRIS.choose_multiple(rng, count).copied().collect();
    for g in &named {
        d.named_graphs.entry(g.to_string()).or_default();
    }
    let size = if rng.gen_bool(0.85) { rng.gen_range(4..=8) } else { rng.gen_range(0..4) };
    for _ in 0..size {
        let object = match rng.gen_range(0..10) {
            0 => RdfTerm::simple("v"),
            1 => RdfTerm::blank("b"),
            _ => iri(rng),
        };
        let subject = if rng.gen_range(0..12) == 0 { RdfTerm::blank("b") } else { iri(rng) };
        let triple = Triple::new(subject, iri(rng), object).unwrap();
        let graph = if named.is_empty() || rng.gen_bool(0.5) { None } else { Some(*named.choose(rng).unwrap()) };
        d.insert(graph, triple);
    }
    d
}

fn term_pattern<R: Rng>(rng: &mut R, var_bias: f64) -> TermPattern {
    if rng.gen_bool(var_bias) {
        TermPattern::var(VARS.choose(rng).unwrap())
    } else if rng.gen_range(0..8) == 0 {
        TermPattern::Term(RdfTerm::simple("v"))
    } else {
        TermPattern::Term(iri(rng))
    }
}

fn triple<R: Rng>(rng: &mut R) -> GraphPattern {
    let s = term_pattern(rng, 0.85);
    let p = if rng.gen_bool(0.6) { TermPattern::var(VARS.choose(rng).unwrap()) } else { TermPattern::Term(iri(rng)) };
    GraphPattern::triple(s, p, term_pattern(rng, 0.85))
}

fn expr<R: Rng>(rng: &mut R, depth: u32) -> FilterExpr {
    let top = if depth == 0 { 4 } else { 9 };
    match rng.gen_range(0..top) {
        0 => FilterExpr::Eq(term_pattern(rng, 0.8), term_pattern(rng, 0.6)),
        1 => FilterExpr::Neq(term_pattern(rng, 0.8), term_pattern(rng, 0.6)),
        2 => FilterExpr::Bound(Var::new(*VARS.choose(rng).unwrap())),
        3 => {
            if rng.gen_bool(0.5) {
                FilterExpr::True
            } else {
                FilterExpr::Eq(term_pattern(rng, 1.0), term_pattern(rng, 1.0))
            }
        }
        4 => FilterExpr::not(expr(rng, depth - 1)),
        5 => FilterExpr::and(expr(rng, depth - 1), expr(rng, depth - 1)),
        6 => FilterExpr::or(expr(rng, depth - 1), expr(rng, depth - 1)),
        7 => FilterExpr::exists(pattern(rng, depth - 1)),
        _ => FilterExpr::not_exists(pattern(rng, depth - 1)),
    }
}

/// A pattern of nesting depth at most `depth` over every supported
/// construct.
pub fn pattern<R: Rng>(rng: &mut R, depth: u32) -> GraphPattern {
    if depth == 0 {
        return if rng.gen_range(0..10) == 0 { GraphPattern::Empty } else { triple(rng) };
    }
    let sub = |rng: &mut R| pattern(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => triple(rng),
        1 => GraphPattern::and(sub(rng), sub(rng)),
        2 => GraphPattern::union(sub(rng), sub(rng)),
        3 => GraphPattern::minus(sub(rng), sub(rng)),
        4 | 5 => {
            let filter = if rng.gen_bool(0.4) { Some(expr(rng, depth.min(2) - 1)) } else { None };
            GraphPattern::optional(sub(rng), sub(rng), filter)
        }
        6 => GraphPattern::filter(sub(rng), expr(rng, depth.min(2))),
        _ => {
            let name = match rng.gen_range(0..4) {
                0 => GraphName::Iri("http://ex/none".into()),
                1 => GraphName::Iri(IRIS.choose(rng).unwrap().to_string()),
                _ => GraphName::Var(Var::new(*VARS.choose(rng).unwrap())),
            };
            GraphPattern::graph(name, sub(rng))
        }
    }
}

/// `SELECT *` most of the time, otherwise a random subset of the
/// in-scope variables in random order.
pub fn query<R: Rng>(rng: &mut R, depth: u32) -> Query {
    let mut q = Query::select_all(pattern(rng, depth));
    if rng.gen_bool(0.3) {
        let mut vars: Vec<Var> = q.pattern.vars().into_iter().collect();
        vars.shuffle(rng);
        vars.truncate(rng.gen_range(0..=vars.len()));
        q.projection = Projection::Vars(vars);
    }
    q
}

pub fn contains_exists(p: &GraphPattern) -> bool {
    let in_expr = |r: &FilterExpr| !r.exists_patterns().is_empty();
    match p {
        GraphPattern::Empty | GraphPattern::Triple(_) => false,
        GraphPattern::And(a, b) | GraphPattern::Union(a, b) | GraphPattern::Minus(a, b) => {
            contains_exists(a) || contains_exists(b)
        }
        GraphPattern::Optional { left, right, filter } => {
            contains_exists(left) || contains_exists(right) || filter.as_ref().is_some_and(in_expr)
        }
        GraphPattern::Filter(inner, r) => contains_exists(inner) || in_expr(r),
        GraphPattern::Graph(_, inner) => contains_exists(inner),
    }
}

/// Identifiers used by random provenance terms.
pub const IDS: [&str; 5] = ["g0", "t1", "t2", "t3", "t10"];

pub fn prov_term<R: Rng>(rng: &mut R, depth: u32) -> ProvTerm {
    let leaf = |rng: &mut R| match rng.gen_range(0..7) {
        0 => ProvTerm::Zero,
        1 => ProvTerm::One,
        _ => ProvTerm::id(*IDS.choose(rng).unwrap()),
    };
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => ProvTerm::Add((0..rng.gen_range(2..=3)).map(|_| prov_term(rng, depth - 1)).collect()),
        1 => ProvTerm::Mul((0..rng.gen_range(2..=3)).map(|_| prov_term(rng, depth - 1)).collect()),
        2 => {
            // repeat the left operand now and then to exercise x-x
            let a = prov_term(rng, depth - 1);
            let b = if rng.gen_range(0..5) == 0 { a.clone() } else { prov_term(rng, depth - 1) };
            ProvTerm::monus(a, b)
        }
        _ => ProvTerm::delta(prov_term(rng, depth - 1)),
    }
}
