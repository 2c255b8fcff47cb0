//! End-to-end pipeline: encode the dataset, annotate every base row with
//! its identifier, translate the query, evaluate in the free m-semiring,
//! and specialise the annotations afterwards.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value as Json};

use crate::error::Result;
use crate::krel::{eval_provenance, eval_ra, BaseAnnotations, KRelation, RAExpr, Value};
use crate::rdf::{encode_dataset, encode_term, Dataset};
use crate::refeval::Evaluator;
use crate::semiring::{bool_semiring, hom_eval, nat_semiring, Homomorphism, ProvTerm};
use crate::sparql::{Query, Var};
use crate::translate::translate_query;

/// One result row: encoded terms per column (`None` = unbound).
pub type Cells = Vec<Option<String>>;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedRow {
    pub values: Cells,
    pub annotation: ProvTerm,
}

/// The query answer with a normalized provenance term per row.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedResult {
    pub columns: Vec<Var>,
    pub rows: Vec<AnnotatedRow>,
}

/// Bound values first, then by encoded text, column by column.
fn row_key(cells: &Cells) -> Vec<(bool, &str)> {
    cells.iter().map(|c| (c.is_none(), c.as_deref().unwrap_or(""))).collect()
}

fn cells_of(t: &[Value]) -> Cells {
    t.iter()
        .map(|v| match v {
            Value::Term(s) => Some(s.clone()),
            Value::Unb => None,
            Value::Gid(n) => Some(n.to_string()),
        })
        .collect()
}

fn sorted_rows<E: Clone + PartialEq + std::fmt::Debug>(rel: &KRelation<E>) -> Vec<(Cells, E)> {
    let mut rows: Vec<_> = rel.rows.iter().map(|(t, a)| (cells_of(t), a.clone())).collect();
    rows.sort_by(|a, b| row_key(&a.0).cmp(&row_key(&b.0)));
    rows
}

/// Evaluates `q` over `d` with every triple and graph annotated by its
/// identifier (`t1..tm`, `g0..gn`).
pub fn run_provenance(q: &Query, d: &Dataset) -> Result<AnnotatedResult> {
    let db = encode_dataset(d);
    let expr = translate_query(q)?;
    let rel = eval_provenance(&expr, &db)?;
    let rows = sorted_rows(&rel).into_iter().map(|(values, annotation)| AnnotatedRow { values, annotation }).collect();
    Ok(AnnotatedResult { columns: q.projected_vars(), rows })
}

/// Which identifiers are trusted; unlisted ones take `default`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrustAssignment {
    pub trusted: BTreeMap<String, bool>,
    pub default: bool,
}

impl Default for TrustAssignment {
    fn default() -> Self {
        TrustAssignment { trusted: BTreeMap::new(), default: true }
    }
}

impl TrustAssignment {
    pub fn set(mut self, id: impl Into<String>, trusted: bool) -> Self {
        self.trusted.insert(id.into(), trusted);
        self
    }

    fn homomorphism(&self) -> Homomorphism<crate::semiring::Boolean> {
        let mut h = Homomorphism::new(bool_semiring()).with_default(self.default);
        for (id, &t) in &self.trusted {
            h.set(id.clone(), t);
        }
        h
    }
}

/// Evaluates each annotation in the boolean m-semiring.
pub fn apply_trust<'a>(r: &'a AnnotatedResult, ta: &TrustAssignment) -> Vec<(&'a AnnotatedRow, bool)> {
    let h = ta.homomorphism();
    r.rows.iter().map(|row| (row, hom_eval(&row.annotation, &h).expect("assignment has a default"))).collect()
}

/// The query answer as a bag: each row with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountedResult {
    pub columns: Vec<Var>,
    pub rows: Vec<(Cells, u64)>,
}

/// Evaluates `expr` in ℕ with every base row counted once.
pub fn eval_counts(expr: &RAExpr, d: &Dataset) -> Result<BTreeMap<Cells, u64>> {
    let db = encode_dataset(d);
    let rel = eval_ra(expr, &db, &nat_semiring(), &BaseAnnotations::uniform(&db, 1))?;
    Ok(sorted_rows(&rel).into_iter().collect())
}

pub fn run_counts(q: &Query, d: &Dataset) -> Result<CountedResult> {
    let expr = translate_query(q)?;
    let mut rows: Vec<_> = eval_counts(&expr, d)?.into_iter().collect();
    rows.sort_by(|a, b| row_key(&a.0).cmp(&row_key(&b.0)));
    Ok(CountedResult { columns: q.projected_vars(), rows })
}

/// The reference evaluator's answer, projected on the query's columns.
pub fn reference_counts(q: &Query, ev: &Evaluator<'_>) -> BTreeMap<Cells, u64> {
    let cols = q.projected_vars();
    let mut out = BTreeMap::new();
    for (mu, n) in ev.eval(&q.pattern, 0).iter() {
        let cells = cols.iter().map(|v| mu.get(v).map(encode_term)).collect();
        *out.entry(cells).or_insert(0) += n;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub values: Cells,
    pub ra_count: u64,
    pub ref_count: u64,
}

/// Per-row comparison of the translated query's counts against the
/// reference evaluator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub columns: Vec<Var>,
    pub rows: Vec<CountRow>,
}

impl CountReport {
    pub fn matches(&self) -> bool {
        self.rows.iter().all(|r| r.ra_count == r.ref_count)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &CountRow> {
        self.rows.iter().filter(|r| r.ra_count != r.ref_count)
    }
}

pub fn count_check(q: &Query, d: &Dataset) -> Result<CountReport> {
    let expr = translate_query(q)?;
    count_check_with(q, d, &expr)
}

/// Like `count_check`, but evaluating the given expression in place of
/// the translation of `q`.
pub fn count_check_with(q: &Query, d: &Dataset, expr: &RAExpr) -> Result<CountReport> {
    let ra = eval_counts(expr, d)?;
    let reference = reference_counts(q, &Evaluator::new(d));
    let mut keys: Vec<&Cells> = ra.keys().chain(reference.keys()).collect();
    keys.sort_by(|a, b| row_key(a).cmp(&row_key(b)));
    keys.dedup();
    let rows = keys
        .into_iter()
        .map(|k| CountRow {
            values: k.clone(),
            ra_count: ra.get(k).copied().unwrap_or(0),
            ref_count: reference.get(k).copied().unwrap_or(0),
        })
        .collect();
    Ok(CountReport { columns: q.projected_vars(), rows })
}

fn tsv_cell(c: &Option<String>) -> String {
    c.as_deref().unwrap_or("").replace('\t', "\\t")
}

fn tsv_header(columns: &[Var], extra: &[&str]) -> String {
    let mut head: Vec<String> = columns.iter().map(Var::to_string).collect();
    head.extend(extra.iter().map(|s| s.to_string()));
    head.join("\t") + "\n"
}

/// Tab-separated rows: one column per variable, unbound cells empty, then
/// the rendered annotation and, when given, `t`/`f` trust flags.
pub fn write_tsv(r: &AnnotatedResult, trust: Option<&[bool]>) -> String {
    let extra: &[&str] = if trust.is_some() { &["provenance", "trust"] } else { &["provenance"] };
    let mut out = tsv_header(&r.columns, extra);
    for (i, row) in r.rows.iter().enumerate() {
        let mut cells: Vec<String> = row.values.iter().map(tsv_cell).collect();
        cells.push(row.annotation.render());
        if let Some(t) = trust {
            cells.push(if t[i] { "t" } else { "f" }.to_string());
        }
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

pub fn write_counts_tsv(r: &CountedResult) -> String {
    let mut out = tsv_header(&r.columns, &["count"]);
    for (values, n) in &r.rows {
        let mut cells: Vec<String> = values.iter().map(tsv_cell).collect();
        cells.push(n.to_string());
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

/// Each row with its relational and reference multiplicities.
pub fn write_check_tsv(r: &CountReport) -> String {
    let mut out = tsv_header(&r.columns, &["relational", "reference"]);
    for row in &r.rows {
        let mut cells: Vec<String> = row.values.iter().map(tsv_cell).collect();
        cells.push(row.ra_count.to_string());
        cells.push(row.ref_count.to_string());
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

fn bindings(columns: &[Var], values: &Cells) -> Json {
    let mut m = Map::new();
    for (v, c) in columns.iter().zip(values) {
        m.insert(v.name().to_string(), c.as_ref().map_or(Json::Null, |s| Json::String(s.clone())));
    }
    Json::Object(m)
}

fn json_document(columns: &[Var], rows: Vec<Json>) -> String {
    let vars: Vec<&str> = columns.iter().map(Var::name).collect();
    let mut s = serde_json::to_string_pretty(&json!({ "vars": vars, "rows": rows })).expect("serializable");
    s.push('\n');
    s
}

/// `{"vars": [...], "rows": [{"bindings": {...}, "provenance": "..."}]}`,
/// unbound variables as `null`, with a `trust` flag per row when given.
pub fn write_json(r: &AnnotatedResult, trust: Option<&[bool]>) -> String {
    let rows = r
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut o = json!({
                "bindings": bindings(&r.columns, &row.values),
                "provenance": row.annotation.render(),
            });
            if let Some(t) = trust {
                o["trust"] = Json::Bool(t[i]);
            }
            o
        })
        .collect();
    json_document(&r.columns, rows)
}

pub fn write_counts_json(r: &CountedResult) -> String {
    let rows =
        r.rows.iter().map(|(values, n)| json!({ "bindings": bindings(&r.columns, values), "count": n })).collect();
    json_document(&r.columns, rows)
}
