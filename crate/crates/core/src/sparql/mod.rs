//! SPARQL fragment: syntax tree, parser and a stable s-expression dump.

mod ast;
mod parser;

pub use ast::*;
pub use parser::{desugar_group, parse_query, GroupItem};

use crate::tree::Node;

/// Renders a query as an s-expression, one node per line, two-space indent.
pub fn to_sexpr(q: &Query) -> String {
    let head = match &q.projection {
        Projection::All => "select *".to_string(),
        Projection::Vars(vs) => {
            let names: Vec<_> = vs.iter().map(Var::to_string).collect();
            format!("select {}", names.join(" "))
        }
    };
    Node::new(head, vec![pattern_node(&q.pattern)]).render_sexpr()
}

fn pattern_node(p: &GraphPattern) -> Node {
    match p {
        GraphPattern::Empty => Node::leaf("empty"),
        GraphPattern::Triple(t) => Node::leaf(format!("triple {} {} {}", t.subject, t.predicate, t.object)),
        GraphPattern::And(a, b) => Node::new("and", vec![pattern_node(a), pattern_node(b)]),
        GraphPattern::Union(a, b) => Node::new("union", vec![pattern_node(a), pattern_node(b)]),
        GraphPattern::Minus(a, b) => Node::new("minus", vec![pattern_node(a), pattern_node(b)]),
        GraphPattern::Optional { left, right, filter } => {
            let mut children = vec![pattern_node(left), pattern_node(right)];
            if let Some(r) = filter {
                children.push(expr_node(r));
            }
            Node::new("optional", children)
        }
        GraphPattern::Filter(p, r) => Node::new("filter", vec![pattern_node(p), expr_node(r)]),
        GraphPattern::Graph(name, p) => {
            let head = match name {
                GraphName::Iri(iri) => format!("graph <{iri}>"),
                GraphName::Var(v) => format!("graph {v}"),
            };
            Node::new(head, vec![pattern_node(p)])
        }
    }
}

fn expr_node(e: &FilterExpr) -> Node {
    match e {
        FilterExpr::True => Node::leaf("true"),
        FilterExpr::False => Node::leaf("false"),
        FilterExpr::Eq(a, b) => Node::leaf(format!("= {a} {b}")),
        FilterExpr::Neq(a, b) => Node::leaf(format!("!= {a} {b}")),
        FilterExpr::Bound(v) => Node::leaf(format!("bound {v}")),
        FilterExpr::Not(a) => Node::new("!", vec![expr_node(a)]),
        FilterExpr::And(a, b) => Node::new("&&", vec![expr_node(a), expr_node(b)]),
        FilterExpr::Or(a, b) => Node::new("||", vec![expr_node(a), expr_node(b)]),
        FilterExpr::Exists(p) => Node::new("exists", vec![pattern_node(p)]),
        FilterExpr::NotExists(p) => Node::new("not-exists", vec![pattern_node(p)]),
    }
}
