//! Compilation of graph patterns into relational algebra over the
//! `Graphs(gid, iri)` and `Quads(gid, sub, pred, obj)` base relations.
//!
//! Every translated pattern has schema `[G, ?v1, ..., ?vn]`: the active
//! graph attribute followed by the in-scope variables in variable order.
//! An unbound variable is represented by `Value::Unb`.

use std::collections::BTreeSet;

use crate::error::QueryError;
use crate::krel::{Operand, ProjCol, ProjFn, RAExpr, SelPredicate, Value};
use crate::rdf::{encode_term, RdfTerm};
use crate::sparql::{FilterExpr, GraphName, GraphPattern, Query, TermPattern, TriplePattern, Var};

/// Attribute holding the value of `v`.
pub fn var_attr(v: &Var) -> String {
    format!("?{}", v.name())
}

/// Issues attribute names that cannot clash with variable attributes,
/// base attributes or each other.
#[derive(Debug, Default)]
pub struct NameSupply {
    next: usize,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&mut self) -> usize {
        self.next += 1;
        self.next
    }

    /// A graph attribute `G<n>`.
    pub fn graph(&mut self) -> String {
        format!("G{}", self.bump())
    }

    /// A copy of the variable attribute, `?v'<n>` or `?v''<n>`.
    pub fn primed(&mut self, v: &Var, primes: usize) -> String {
        format!("?{}{}{}", v.name(), "'".repeat(primes), self.bump())
    }

    /// An EXISTS marker attribute `ex<n>`.
    pub fn exists(&mut self) -> String {
        format!("ex{}", self.bump())
    }
}

fn keep_all(schema: &[String]) -> Vec<ProjCol> {
    schema.iter().map(ProjCol::keep).collect()
}

fn not_unb(o: &Operand) -> SelPredicate {
    match o {
        Operand::Const(Value::Unb) => SelPredicate::False,
        Operand::Const(_) => SelPredicate::True,
        Operand::Attr(_) => SelPredicate::not(SelPredicate::Eq(o.clone(), Operand::Const(Value::Unb))),
    }
}

fn is_unb(attr: &str) -> SelPredicate {
    SelPredicate::attr_is(attr, Value::Unb)
}

/// `a = unb ∨ b = unb ∨ a = b`
fn compatible(a: &str, b: &str) -> SelPredicate {
    SelPredicate::or(vec![is_unb(a), is_unb(b), SelPredicate::attr_eq(a, b)])
}

/// Translation state for one query.
#[derive(Debug, Default)]
pub struct Translator {
    names: NameSupply,
}

impl Translator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_graph(&mut self) -> String {
        self.names.graph()
    }

    pub fn translate(&mut self, p: &GraphPattern, g: &str) -> RAExpr {
        match p {
            GraphPattern::Empty => self.translate_empty(g),
            GraphPattern::Triple(t) => self.translate_triple(t, g),
            GraphPattern::And(a, b) => self.translate_and(a, b, g),
            GraphPattern::Union(a, b) => self.translate_union(a, b, g),
            GraphPattern::Minus(a, b) => self.translate_minus(a, b, g),
            GraphPattern::Optional { left, right, filter } => {
                let (right, filter) = GraphPattern::optional_parts(right, filter);
                self.translate_optional(left, right, filter, g)
            }
            GraphPattern::Filter(inner, r) => self.translate_filter(inner, r, g),
            GraphPattern::Graph(name, inner) => self.translate_graph(name, inner, g),
        }
    }

    /// `Π_G[ρ_{G←gid}(Graphs)]`
    pub fn translate_empty(&mut self, g: &str) -> RAExpr {
        RAExpr::project(vec![ProjCol::keep(g)], RAExpr::rename(vec![("gid".into(), g.into())], RAExpr::BaseGraphs))
    }

    /// Selects matching quads, renames the graph column and one column per
    /// distinct variable, and projects on `[G, vars]`.
    pub fn translate_triple(&mut self, t: &TriplePattern, g: &str) -> RAExpr {
        let columns = ["sub", "pred", "obj"];
        let mut conds = Vec::new();
        let mut renames = vec![("gid".to_string(), g.to_string())];
        let mut seen: Vec<(&Var, &str)> = Vec::new();
        for (pos, col) in t.positions().into_iter().zip(columns) {
            match pos {
                TermPattern::Term(term) => conds.push(SelPredicate::attr_is(col, Value::Term(encode_term(term)))),
                TermPattern::Var(v) => match seen.iter().find(|(w, _)| *w == v) {
                    Some((_, first)) => conds.push(SelPredicate::attr_eq(first, col)),
                    None => {
                        seen.push((v, col));
                        renames.push((col.to_string(), var_attr(v)));
                    }
                },
            }
        }
        let mut vars: Vec<&Var> = seen.iter().map(|(v, _)| *v).collect();
        vars.sort();
        let mut cols = vec![ProjCol::keep(g)];
        cols.extend(vars.into_iter().map(|v| ProjCol::keep(var_attr(v))));
        let selected = match SelPredicate::and(conds) {
            SelPredicate::True => RAExpr::BaseQuads,
            c => RAExpr::select(c, RAExpr::BaseQuads),
        };
        RAExpr::project(cols, RAExpr::rename(renames, selected))
    }

    /// Evaluates the inner pattern against the named graph(s) under a fresh
    /// graph attribute, then joins with `⟦()⟧^G` so the result does not
    /// depend on the active graph.
    pub fn translate_graph(&mut self, name: &GraphName, p1: &GraphPattern, g: &str) -> RAExpr {
        let inner_vars = p1.vars();
        let g2 = self.names.graph();
        let body = match name {
            GraphName::Iri(iri) => {
                let graph = RAExpr::project(
                    vec![ProjCol::keep(&g2)],
                    RAExpr::rename(
                        vec![("gid".into(), g2.clone())],
                        RAExpr::select(
                            SelPredicate::attr_is("iri", Value::Term(encode_term(&RdfTerm::iri(iri.as_str())))),
                            RAExpr::BaseGraphs,
                        ),
                    ),
                );
                let joined = RAExpr::join(graph, self.translate(p1, &g2));
                RAExpr::project(inner_vars.iter().map(|v| ProjCol::keep(var_attr(v))).collect(), joined)
            }
            GraphName::Var(v) => {
                let named = RAExpr::select(SelPredicate::GidGreater("gid".into(), 0), RAExpr::BaseGraphs);
                let mut all_vars = inner_vars.clone();
                all_vars.insert(v.clone());
                let translated = self.translate(p1, &g2);
                if inner_vars.contains(v) {
                    // the inner pattern may itself bind or leave unbound v
                    let v2 = self.names.primed(v, 1);
                    let va = var_attr(v);
                    let graphs = RAExpr::rename(vec![("gid".into(), g2.clone()), ("iri".into(), v2.clone())], named);
                    let agree = SelPredicate::or(vec![is_unb(&va), SelPredicate::attr_eq(&va, &v2)]);
                    let joined = RAExpr::select(agree, RAExpr::join(graphs, translated));
                    let cols = all_vars
                        .iter()
                        .map(|w| {
                            if w == v {
                                ProjCol::computed(var_attr(w), ProjFn::First(v2.clone(), va.clone()))
                            } else {
                                ProjCol::keep(var_attr(w))
                            }
                        })
                        .collect();
                    RAExpr::project(cols, joined)
                } else {
                    let graphs = RAExpr::rename(vec![("gid".into(), g2.clone()), ("iri".into(), var_attr(v))], named);
                    let joined = RAExpr::join(graphs, translated);
                    RAExpr::project(all_vars.iter().map(|w| ProjCol::keep(var_attr(w))).collect(), joined)
                }
            }
        };
        RAExpr::join(self.translate_empty(g), body)
    }

    /// Pads each side with `unb` for the variables only the other side has.
    pub fn translate_union(&mut self, p1: &GraphPattern, p2: &GraphPattern, g: &str) -> RAExpr {
        let (v1, v2) = (p1.vars(), p2.vars());
        let all: BTreeSet<Var> = v1.union(&v2).cloned().collect();
        let l = self.translate(p1, g);
        let r = self.translate(p2, g);
        RAExpr::union(pad(g, &all, &v1, l), pad(g, &all, &v2, r))
    }

    pub fn translate_and(&mut self, p1: &GraphPattern, p2: &GraphPattern, g: &str) -> RAExpr {
        let l = self.translate(p1, g);
        let r = self.translate(p2, g);
        self.join_patterns(&p1.vars(), l, &p2.vars(), r, g).0
    }

    /// Joins two translated patterns with the compatibility check on their
    /// shared variables. Returns the expression and, for each shared
    /// variable, the attribute holding the left side's original value,
    /// which the projection keeps after the output columns when
    /// `keep_left` is set.
    fn join_patterns(
        &mut self,
        v1: &BTreeSet<Var>,
        l: RAExpr,
        v2: &BTreeSet<Var>,
        r: RAExpr,
        g: &str,
    ) -> (RAExpr, Vec<(Var, String)>) {
        self.join_patterns_keeping(v1, l, v2, r, g, false)
    }

    fn join_patterns_keeping(
        &mut self,
        v1: &BTreeSet<Var>,
        l: RAExpr,
        v2: &BTreeSet<Var>,
        r: RAExpr,
        g: &str,
        keep_left: bool,
    ) -> (RAExpr, Vec<(Var, String)>) {
        let shared: Vec<Var> = v1.intersection(v2).cloned().collect();
        let all: BTreeSet<Var> = v1.union(v2).cloned().collect();
        if shared.is_empty() {
            let mut cols = vec![ProjCol::keep(g)];
            cols.extend(all.iter().map(|v| ProjCol::keep(var_attr(v))));
            return (RAExpr::project(cols, RAExpr::join(l, r)), Vec::new());
        }
        let mut left_names = Vec::new();
        let mut rename_l = Vec::new();
        let mut rename_r = Vec::new();
        let mut comp = Vec::new();
        for v in &shared {
            let (a, b) = (self.names.primed(v, 1), self.names.primed(v, 2));
            rename_l.push((var_attr(v), a.clone()));
            rename_r.push((var_attr(v), b.clone()));
            comp.push(compatible(&a, &b));
            left_names.push((v.clone(), a, b));
        }
        let joined = RAExpr::select(
            SelPredicate::and(comp),
            RAExpr::join(RAExpr::rename(rename_l, l), RAExpr::rename(rename_r, r)),
        );
        let mut cols = vec![ProjCol::keep(g)];
        for v in &all {
            match left_names.iter().find(|(w, _, _)| w == v) {
                Some((_, a, b)) => cols.push(ProjCol::computed(var_attr(v), ProjFn::First(a.clone(), b.clone()))),
                None => cols.push(ProjCol::keep(var_attr(v))),
            }
        }
        if keep_left {
            cols.extend(left_names.iter().map(|(_, a, _)| ProjCol::keep(a)));
        }
        let kept = left_names.into_iter().map(|(v, a, _)| (v, a)).collect();
        (RAExpr::project(cols, joined), kept)
    }

    /// `⟦P1⟧ ⋈ [δ(⟦P1⟧) − Π_{G,var(P1)} σ_{comp ∧ ¬disj}(⟦P1⟧ ⋈ ρ'⟦P2⟧)]`,
    /// or `⟦P1⟧` when no variable is shared.
    pub fn translate_minus(&mut self, p1: &GraphPattern, p2: &GraphPattern, g: &str) -> RAExpr {
        let (v1, v2) = (p1.vars(), p2.vars());
        let shared: Vec<Var> = v1.intersection(&v2).cloned().collect();
        let l = self.translate(p1, g);
        if shared.is_empty() {
            return l;
        }
        let r = self.translate(p2, g);
        let mut renames = Vec::new();
        let mut comp = Vec::new();
        let mut disj = Vec::new();
        for v in &shared {
            let (a, b) = (var_attr(v), self.names.primed(v, 1));
            comp.push(compatible(&a, &b));
            disj.push(SelPredicate::or(vec![is_unb(&a), is_unb(&b)]));
            renames.push((a, b));
        }
        let cond = SelPredicate::and(vec![SelPredicate::and(comp), SelPredicate::not(SelPredicate::and(disj))]);
        let matched = RAExpr::project(
            schema_cols(g, &v1),
            RAExpr::select(cond, RAExpr::join(l.clone(), RAExpr::rename(renames, r))),
        );
        RAExpr::join(l.clone(), RAExpr::diff(RAExpr::dup_elim(l), matched))
    }

    /// `σ_R(⟦P⟧)`, or with EXISTS subpatterns the join with one marker
    /// relation per subpattern.
    pub fn translate_filter(&mut self, p: &GraphPattern, r: &FilterExpr, g: &str) -> RAExpr {
        let vars = p.vars();
        let translated = self.translate(p, g);
        let mut schema = vec![g.to_string()];
        schema.extend(vars.iter().map(var_attr));
        self.filter_relation(translated, &schema, &vars, r, g)
    }

    /// Applies `r` to `base`, whose schema is `schema` (graph attribute
    /// first) and whose columns include one per variable of `vars`.
    fn filter_relation(
        &mut self,
        base: RAExpr,
        schema: &[String],
        vars: &BTreeSet<Var>,
        r: &FilterExpr,
        g: &str,
    ) -> RAExpr {
        let subpatterns = r.exists_patterns();
        if subpatterns.is_empty() {
            return RAExpr::select(compile_filter(r, vars, &mut std::iter::empty()), base);
        }
        let mut joined = base.clone();
        let mut markers = Vec::new();
        for pi in subpatterns {
            let ex = self.names.exists();
            joined = RAExpr::join(joined, self.exists_marker(&base, schema, vars, pi, &ex, g));
            markers.push(ex);
        }
        let cond = compile_filter(r, vars, &mut markers.into_iter());
        RAExpr::project(keep_all(schema), RAExpr::select(cond, joined))
    }

    /// One tuple per tuple of `base`, extended with `ex = 1` when `pi`
    /// has a solution agreeing on the shared variables and `ex = 0`
    /// otherwise.
    fn exists_marker(
        &mut self,
        base: &RAExpr,
        schema: &[String],
        vars: &BTreeSet<Var>,
        pi: &GraphPattern,
        ex: &str,
        g: &str,
    ) -> RAExpr {
        let pi_vars = pi.vars();
        let translated = self.translate(pi, g);
        let mut renames = Vec::new();
        let mut subst = Vec::new();
        for v in vars.intersection(&pi_vars) {
            let (a, b) = (var_attr(v), self.names.primed(v, 1));
            subst.push(SelPredicate::or(vec![SelPredicate::attr_eq(&a, &b), is_unb(&a)]));
            renames.push((a, b));
        }
        let witnessed = RAExpr::project(
            keep_all(schema),
            RAExpr::select(SelPredicate::and(subst), RAExpr::join(base.clone(), RAExpr::rename(renames, translated))),
        );
        let without = RAExpr::diff(RAExpr::dup_elim(base.clone()), witnessed);
        let with = RAExpr::diff(RAExpr::dup_elim(base.clone()), without.clone());
        let tagged = |rel: RAExpr, n: u32| {
            let mut cols = keep_all(schema);
            cols.push(ProjCol::computed(ex, ProjFn::ConstGid(n)));
            RAExpr::project(cols, rel)
        };
        RAExpr::union(tagged(without, 0), tagged(with, 1))
    }

    /// The join part, filtered by `r`, united with the padded solutions of
    /// `P1` that have no compatible solution of `P2` satisfying `r`.
    ///
    /// The join part keeps, next to each merged shared variable, the value
    /// it had in `P1`; the left-join part subtracts on those original
    /// values so that a solution of `P1` leaving a shared variable unbound
    /// is removed exactly when it was extended.
    pub fn translate_optional(
        &mut self,
        p1: &GraphPattern,
        p2: &GraphPattern,
        r: Option<&FilterExpr>,
        g: &str,
    ) -> RAExpr {
        let (v1, v2) = (p1.vars(), p2.vars());
        let all: BTreeSet<Var> = v1.union(&v2).cloned().collect();
        let l = self.translate(p1, g);
        let rt = self.translate(p2, g);
        let (merged, originals) = self.join_patterns_keeping(&v1, l.clone(), &v2, rt, g, true);
        let mut merged_schema = schema_cols_names(g, &all);
        merged_schema.extend(originals.iter().map(|(_, a)| a.clone()));
        let filtered = match r {
            None | Some(FilterExpr::True) => merged,
            Some(r) => self.filter_relation(merged, &merged_schema, &all, r, g),
        };
        let joined = if originals.is_empty() {
            filtered.clone()
        } else {
            RAExpr::project(schema_cols(g, &all), filtered.clone())
        };
        let mut back = vec![ProjCol::keep(g)];
        let mut renames = Vec::new();
        for v in &v1 {
            match originals.iter().find(|(w, _)| w == v) {
                Some((_, a)) => {
                    back.push(ProjCol::keep(a));
                    renames.push((a.clone(), var_attr(v)));
                }
                None => back.push(ProjCol::keep(var_attr(v))),
            }
        }
        let mut matched = RAExpr::project(back, filtered);
        if !renames.is_empty() {
            matched = RAExpr::rename(renames, matched);
        }
        let unmatched = RAExpr::join(l.clone(), RAExpr::diff(RAExpr::dup_elim(l), matched));
        RAExpr::union(joined, pad(g, &all, &v1, unmatched))
    }

    /// `Π_V[σ_{G'=0}(⟦()⟧^{G'} ⋈ ⟦P⟧^{G'})]`
    pub fn translate_query(&mut self, q: &Query) -> Result<RAExpr, QueryError> {
        let in_scope = q.pattern.vars();
        let selected = q.projected_vars();
        if let Some(v) = selected.iter().find(|v| !in_scope.contains(*v)) {
            return Err(QueryError::Projection(v.name().to_string()));
        }
        let g = self.names.graph();
        let root = RAExpr::join(self.translate_empty(&g), self.translate(&q.pattern, &g));
        let at_default = RAExpr::select(SelPredicate::attr_is(&g, Value::Gid(0)), root);
        Ok(RAExpr::project(selected.iter().map(|v| ProjCol::keep(var_attr(v))).collect(), at_default))
    }
}

fn schema_cols_names(g: &str, vars: &BTreeSet<Var>) -> Vec<String> {
    let mut out = vec![g.to_string()];
    out.extend(vars.iter().map(var_attr));
    out
}

fn schema_cols(g: &str, vars: &BTreeSet<Var>) -> Vec<ProjCol> {
    keep_all(&schema_cols_names(g, vars))
}

/// `Π_{G, all}` with `unb` for the variables of `all` missing from `have`.
fn pad(g: &str, all: &BTreeSet<Var>, have: &BTreeSet<Var>, e: RAExpr) -> RAExpr {
    if all == have {
        return e;
    }
    let mut cols = vec![ProjCol::keep(g)];
    for v in all {
        cols.push(if have.contains(v) {
            ProjCol::keep(var_attr(v))
        } else {
            ProjCol::computed(var_attr(v), ProjFn::ConstUnb)
        });
    }
    RAExpr::project(cols, e)
}

/// Compiles a filter over a relation with one attribute per variable in
/// `vars`. Comparisons involving an unbound value are false; variables
/// outside `vars` are always unbound. `markers` yields the EXISTS marker
/// attributes in the order the subpatterns occur.
fn compile_filter(r: &FilterExpr, vars: &BTreeSet<Var>, markers: &mut dyn Iterator<Item = String>) -> SelPredicate {
    let operand = |t: &TermPattern| match t {
        TermPattern::Term(term) => Operand::Const(Value::Term(encode_term(term))),
        TermPattern::Var(v) if vars.contains(v) => Operand::Attr(var_attr(v)),
        TermPattern::Var(_) => Operand::Const(Value::Unb),
    };
    let both_bound = |a: &Operand, b: &Operand| SelPredicate::and(vec![not_unb(a), not_unb(b)]);
    match r {
        FilterExpr::True => SelPredicate::True,
        FilterExpr::False => SelPredicate::False,
        FilterExpr::Eq(a, b) => {
            let (a, b) = (operand(a), operand(b));
            SelPredicate::and(vec![both_bound(&a, &b), SelPredicate::Eq(a, b)])
        }
        FilterExpr::Neq(a, b) => {
            let (a, b) = (operand(a), operand(b));
            SelPredicate::and(vec![both_bound(&a, &b), SelPredicate::not(SelPredicate::Eq(a, b))])
        }
        FilterExpr::Bound(v) => not_unb(&operand(&TermPattern::Var(v.clone()))),
        FilterExpr::Not(e) => match compile_filter(e, vars, markers) {
            SelPredicate::True => SelPredicate::False,
            SelPredicate::False => SelPredicate::True,
            c => SelPredicate::not(c),
        },
        FilterExpr::And(a, b) => {
            let a = compile_filter(a, vars, markers);
            SelPredicate::and(vec![a, compile_filter(b, vars, markers)])
        }
        FilterExpr::Or(a, b) => {
            let a = compile_filter(a, vars, markers);
            SelPredicate::or(vec![a, compile_filter(b, vars, markers)])
        }
        FilterExpr::Exists(_) => {
            let ex = markers.next().expect("one marker per EXISTS");
            SelPredicate::not(SelPredicate::attr_is(&ex, Value::Gid(0)))
        }
        FilterExpr::NotExists(_) => {
            let ex = markers.next().expect("one marker per EXISTS");
            SelPredicate::attr_is(&ex, Value::Gid(0))
        }
    }
}

/// Translates `p` with active-graph attribute `g` and a fresh name supply.
pub fn translate_pattern(p: &GraphPattern, g: &str) -> RAExpr {
    Translator::new().translate(p, g)
}

/// Translates a whole query with a fresh name supply.
pub fn translate_query(q: &Query) -> Result<RAExpr, QueryError> {
    Translator::new().translate_query(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krel::{eval_provenance, eval_ra, BaseAnnotations, KRelation};
    use crate::rdf::{encode_dataset, parse_nquads, Dataset};
    use crate::refeval::{eval, SolutionMultiset};
    use crate::semiring::Natural;
    use crate::sparql::parse_query;

    const FOAF: &str = "http://xmlns.com/foaf/0.1/";
    const ACCOUNTS: &str = "\
<http://people/david> <http://xmlns.com/foaf/0.1/account> <http://bank> .
<http://people/felix> <http://xmlns.com/foaf/0.1/account> <http://games> .
<http://bank> <http://xmlns.com/foaf/0.1/accountServiceHomepage> <http://bank/yourmoney> .
";
    const NAMED: &str = "\
<http://ex/a> <http://ex/p> <http://ex/b> .
<http://ex/a> <http://ex/p> <http://ex/c> <http://ex/g1> .
<http://ex/b> <http://ex/p> <http://ex/c> <http://ex/g1> .
<http://ex/c> <http://ex/p> <http://ex/a> <http://ex/g2> .
";

    fn counts(e: &RAExpr, d: &Dataset) -> KRelation<u64> {
        let db = encode_dataset(d);
        eval_ra(e, &db, &Natural, &BaseAnnotations::uniform(&db, 1)).unwrap()
    }

    /// The reference answer as relation rows `[G = 0, vars...]`.
    fn reference(p: &GraphPattern, d: &Dataset) -> Vec<(Vec<Value>, u64)> {
        let vars = p.vars();
        let omega: SolutionMultiset = eval(p, d, 0);
        let mut rows: Vec<_> = omega
            .iter()
            .map(|(mu, n)| {
                let mut t = vec![Value::Gid(0)];
                t.extend(vars.iter().map(|v| mu.get(v).map_or(Value::Unb, |x| Value::Term(encode_term(x)))));
                (t, n)
            })
            .collect();
        rows.sort();
        rows
    }

    fn at_default(e: &RAExpr, d: &Dataset) -> Vec<(Vec<Value>, u64)> {
        counts(e, d).rows.into_iter().filter(|(t, _)| t[0] == Value::Gid(0)).collect()
    }

    fn pattern(src: &str) -> GraphPattern {
        parse_query(&format!("PREFIX foaf: <{FOAF}> SELECT * WHERE {{ {src} }}")).unwrap().pattern
    }

    fn count(e: &RAExpr, f: fn(&RAExpr) -> bool) -> usize {
        e.count_nodes(&f)
    }

    #[test]
    fn empty_pattern() {
        let e = translate_pattern(&GraphPattern::Empty, "G");
        assert_eq!(e.schema().unwrap(), ["G"]);
        let r = eval_provenance(&e, &encode_dataset(&parse_nquads(ACCOUNTS).unwrap())).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.get(&[Value::Gid(0)]).unwrap().render(), "g0");
        assert_eq!(counts(&e, &parse_nquads(NAMED).unwrap()).len(), 3);
    }

    #[test]
    fn triple_patterns() {
        let t1 = translate_pattern(&pattern("?who foaf:account ?acc"), "G");
        assert_eq!(t1.schema().unwrap(), ["G", "?acc", "?who"]);
        assert_eq!(
            t1.to_tree_string(),
            "Project [G, ?acc, ?who]\n  Rename [gid -> G, sub -> ?who, obj -> ?acc]\n    \
             Select pred = <http://xmlns.com/foaf/0.1/account>\n      Quads\n"
        );
        let t2 = translate_pattern(&pattern("?who foaf:knows ?who"), "G");
        assert!(t2.to_tree_string().contains("sub = obj"));
        assert_eq!(t2.schema().unwrap(), ["G", "?who"]);
        let t3 = translate_pattern(&pattern("<http://cd> foaf:name \"Carlos\"@pt"), "G");
        assert_eq!(t3.schema().unwrap(), ["G"]);
        assert!(t3.to_tree_string().contains("obj = \"Carlos\"@pt"));
    }

    #[test]
    fn graph_patterns() {
        let d = parse_nquads(NAMED).unwrap();
        for src in [
            "GRAPH <http://ex/g1> { ?s ?p ?o }",
            "GRAPH <http://ex/nope> { ?s ?p ?o }",
            "GRAPH ?g { ?s ?p ?o }",
            "GRAPH ?g { ?g ?p ?o }",
            "GRAPH ?s { ?s ?p ?o OPTIONAL { ?o ?q ?s } }",
        ] {
            let p = pattern(src);
            assert_eq!(at_default(&translate_pattern(&p, "G"), &d), reference(&p, &d), "{src}");
        }
        let nope = translate_pattern(&pattern("GRAPH <http://ex/nope> { ?s ?p ?o }"), "G");
        assert!(counts(&nope, &d).is_empty());
        let g1 = translate_pattern(&pattern("GRAPH <http://ex/g1> { ?s ?p ?o }"), "G");
        // same answer under every active graph
        assert_eq!(counts(&g1, &d).len(), 2 * 3);
    }

    #[test]
    fn union_padding() {
        let d = parse_nquads(NAMED).unwrap();
        let p = pattern("{ ?a <http://ex/p> <http://ex/b> } UNION { ?b <http://ex/p> <http://ex/c> }");
        let e = translate_pattern(&p, "G");
        assert_eq!(e.schema().unwrap(), ["G", "?a", "?b"]);
        assert_eq!(at_default(&e, &d), reference(&p, &d));
        let same = translate_pattern(&pattern("{ ?a ?p ?b } UNION { ?a ?p ?b }"), "G");
        assert_eq!(
            count(
                &same,
                |n| matches!(n, RAExpr::Project(cols, _) if cols.iter().any(|c| matches!(c, ProjCol::Computed { .. })))
            ),
            0
        );
        let with_empty = pattern("{ ?a ?p ?b } UNION { ?c <http://ex/zzz> ?d }");
        assert_eq!(at_default(&translate_pattern(&with_empty, "G"), &d), reference(&with_empty, &d));
    }

    #[test]
    fn and_patterns() {
        let d = parse_nquads(ACCOUNTS).unwrap();
        let p = pattern("?who foaf:account ?acc . ?acc foaf:accountServiceHomepage ?home");
        let r = eval_provenance(&translate_pattern(&p, "G"), &encode_dataset(&d)).unwrap();
        assert_eq!(r.rows.values().map(|a| a.render()).collect::<Vec<_>>(), ["t1*t3"]);
        let disjoint = translate_pattern(&pattern("?a foaf:account ?b . ?c foaf:accountServiceHomepage ?e"), "G");
        assert!(matches!(&disjoint, RAExpr::Project(_, inner) if matches!(**inner, RAExpr::NatJoin(..))));
        // both sides may leave ?c unbound
        let d = parse_nquads(NAMED).unwrap();
        let p = pattern("{ { ?a ?p ?b } UNION { ?c ?p ?a } } { { ?c ?q ?e } UNION { ?e ?q ?a } }");
        assert_eq!(at_default(&translate_pattern(&p, "G"), &d), reference(&p, &d));
    }

    #[test]
    fn minus_patterns() {
        let d = parse_nquads(NAMED).unwrap();
        let p = pattern("{ ?a ?p ?b } MINUS { ?a ?p ?b }");
        assert!(at_default(&translate_pattern(&p, "G"), &d).is_empty());
        let disjoint = GraphPattern::minus(pattern("?a ?p ?b"), pattern("?c ?q ?e"));
        assert_eq!(translate_pattern(&disjoint, "G"), translate_pattern(&pattern("?a ?p ?b"), "G"));
        let dup = pattern("{ { ?a ?p ?b } UNION { ?a ?p ?b } } MINUS { ?a ?p <http://ex/c> }");
        let got = at_default(&translate_pattern(&dup, "G"), &d);
        assert_eq!(got, reference(&dup, &d));
        assert!(got.iter().all(|(_, n)| *n == 2));
    }

    #[test]
    fn filter_patterns() {
        let d = parse_nquads(ACCOUNTS).unwrap();
        let plain = translate_pattern(&pattern("?a ?p ?b FILTER(?b != <http://bank>)"), "G");
        assert!(matches!(plain, RAExpr::Select(..)));
        assert_eq!(count(&plain, |n| matches!(n, RAExpr::Select(..))), 1);
        let ex = pattern("?who foaf:account ?acc FILTER EXISTS { ?acc foaf:accountServiceHomepage ?h }");
        let got = at_default(&translate_pattern(&ex, "G"), &d);
        assert_eq!(got, reference(&ex, &d));
        assert_eq!(got.len(), 1);
        let dup =
            pattern("{ { ?who foaf:account ?acc } UNION { ?who foaf:account ?acc } } FILTER NOT EXISTS { ?acc ?p ?x }");
        let got = at_default(&translate_pattern(&dup, "G"), &d);
        assert_eq!(got, reference(&dup, &d));
        assert_eq!(got.iter().map(|(_, n)| n).collect::<Vec<_>>(), [&2]);
    }

    #[test]
    fn optional_patterns() {
        let q = parse_query(&format!(
            "PREFIX foaf: <{FOAF}> SELECT * WHERE {{ ?who foaf:account ?acc OPTIONAL {{ ?acc foaf:accountServiceHomepage ?home }} }}"
        ))
        .unwrap();
        let e = translate_query(&q).unwrap();
        assert_eq!(count(&e, |n| matches!(n, RAExpr::Diff(..))), 1);
        assert_eq!(count(&e, |n| matches!(n, RAExpr::DupElim(..))), 1);
        let d = parse_nquads(NAMED).unwrap();
        let never = pattern("?a ?p ?b OPTIONAL { ?b <http://ex/none> ?c }");
        let got = at_default(&translate_pattern(&never, "G"), &d);
        assert_eq!(got, reference(&never, &d));
        // schema [G, ?a, ?b, ?c, ?p]
        assert!(!got.is_empty() && got.iter().all(|(t, _)| t[3] == Value::Unb));
        let filtered = pattern("?a ?p ?b OPTIONAL { ?b ?p ?c FILTER(?a != ?c) }");
        assert_eq!(at_default(&translate_pattern(&filtered, "G"), &d), reference(&filtered, &d));
    }

    /// The left join written directly over the projection of the join part
    /// cannot tell apart a left solution that leaves a shared variable
    /// unbound from the merged solution that binds it.
    #[test]
    fn left_join_must_subtract_on_original_left_values() {
        let d = parse_nquads("<http://ex/a> <http://ex/p> <http://ex/b> .\n<http://ex/a> <http://ex/q> <http://ex/c> .\n<http://ex/c> <http://ex/r> <http://ex/d> .\n").unwrap();
        let p1 = pattern("{ ?a <http://ex/p> ?b } UNION { ?a <http://ex/q> ?c }");
        let p2 = pattern("?c <http://ex/r> ?e");
        let mut t = Translator::new();
        let g = "G";
        let v1 = p1.vars();
        let all: BTreeSet<Var> = v1.union(&p2.vars()).cloned().collect();
        let and = t.translate_and(&p1, &p2, g);
        let l = t.translate(&p1, g);
        let literal = RAExpr::union(
            and.clone(),
            pad(
                g,
                &all,
                &v1,
                RAExpr::join(l.clone(), RAExpr::diff(RAExpr::dup_elim(l), RAExpr::project(schema_cols(g, &v1), and))),
            ),
        );
        let optional = GraphPattern::optional(p1, p2, None);
        let expected = reference(&optional, &d);
        assert_ne!(at_default(&literal, &d), expected);
        assert_eq!(at_default(&translate_pattern(&optional, g), &d), expected);
    }

    #[test]
    fn query_level() {
        let q = parse_query("SELECT * WHERE {}").unwrap();
        let e = translate_query(&q).unwrap();
        assert_eq!(count(&e, |n| matches!(n, RAExpr::BaseGraphs)), 2);
        let bad = Query { projection: crate::sparql::Projection::Vars(vec![Var::new("zz")]), ..q };
        assert_eq!(translate_query(&bad), Err(QueryError::Projection("zz".into())));
    }

    #[test]
    fn fresh_names_are_not_reused() {
        let mut names = NameSupply::new();
        let v = Var::new("x");
        let issued = [names.graph(), names.primed(&v, 1), names.primed(&v, 2), names.exists(), names.graph()];
        let unique: BTreeSet<_> = issued.iter().collect();
        assert_eq!(unique.len(), issued.len());
    }
}
