//! Duplicate-preserving list interpreter for relational expressions.
//! Shares only data types with the engine; every operator is re-derived
//! from bag semantics with nested loops.

use std::collections::BTreeMap;

use sparqlprov::krel::{Operand, ProjCol, ProjFn, RAExpr, SelPredicate, Value};
use sparqlprov::rdf::BaseDb;

#[derive(Clone, Debug)]
pub struct Bag {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Bag {
    fn col(&self, a: &str) -> usize {
        self.schema.iter().position(|x| x == a).unwrap_or_else(|| panic!("no attribute {a}"))
    }

    /// Tuple -> number of occurrences.
    pub fn counts(&self) -> BTreeMap<Vec<Value>, u64> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry(r.clone()).or_insert(0) += 1;
        }
        out
    }
}

fn holds(p: &SelPredicate, b: &Bag, row: &[Value]) -> bool {
    let val = |o: &Operand| match o {
        Operand::Attr(a) => row[b.col(a)].clone(),
        Operand::Const(v) => v.clone(),
    };
    match p {
        SelPredicate::True => true,
        SelPredicate::False => false,
        SelPredicate::Eq(x, y) => val(x) == val(y),
        SelPredicate::GidGreater(a, n) => match row[b.col(a)] {
            Value::Gid(m) => m > *n,
            _ => false,
        },
        SelPredicate::Not(q) => !holds(q, b, row),
        SelPredicate::And(qs) => qs.iter().all(|q| holds(q, b, row)),
        SelPredicate::Or(qs) => qs.iter().any(|q| holds(q, b, row)),
    }
}

pub fn eval(e: &RAExpr, db: &BaseDb) -> Bag {
    match e {
        RAExpr::BaseGraphs => Bag {
            schema: vec!["gid".into(), "iri".into()],
            rows: db.graphs.iter().map(|g| vec![Value::Gid(g.gid), Value::Term(g.iri_key.clone())]).collect(),
        },
        RAExpr::BaseQuads => Bag {
            schema: vec!["gid".into(), "sub".into(), "pred".into(), "obj".into()],
            rows: db
                .quads
                .iter()
                .map(|q| {
                    vec![
                        Value::Gid(q.gid),
                        Value::Term(q.sub.clone()),
                        Value::Term(q.pred.clone()),
                        Value::Term(q.obj.clone()),
                    ]
                })
                .collect(),
        },
        RAExpr::Select(p, inner) => {
            let b = eval(inner, db);
            let rows = b.rows.iter().filter(|r| holds(p, &b, r)).cloned().collect();
            Bag { schema: b.schema, rows }
        }
        RAExpr::Project(cols, inner) => {
            let b = eval(inner, db);
            let mut rows = Vec::new();
            for r in &b.rows {
                let mut out = Vec::new();
                for c in cols {
                    out.push(match c {
                        ProjCol::Keep(a) => r[b.col(a)].clone(),
                        ProjCol::Computed { fun: ProjFn::ConstUnb, .. } => Value::Unb,
                        ProjCol::Computed { fun: ProjFn::ConstGid(n), .. } => Value::Gid(*n),
                        ProjCol::Computed { fun: ProjFn::First(x, y), .. } => {
                            let first = r[b.col(x)].clone();
                            if first == Value::Unb {
                                r[b.col(y)].clone()
                            } else {
                                first
                            }
                        }
                    });
                }
                rows.push(out);
            }
            Bag { schema: cols.iter().map(|c| c.name().to_string()).collect(), rows }
        }
        RAExpr::Rename(pairs, inner) => {
            let mut b = eval(inner, db);
            let old = b.schema.clone();
            for (from, to) in pairs {
                let i = old.iter().position(|x| x == from).unwrap();
                b.schema[i] = to.clone();
            }
            b
        }
        RAExpr::NatJoin(l, r) => {
            let (a, b) = (eval(l, db), eval(r, db));
            let mut schema = a.schema.clone();
            schema.extend(b.schema.iter().filter(|x| !a.schema.contains(x)).cloned());
            let mut rows = Vec::new();
            for x in &a.rows {
                for y in &b.rows {
                    let agree =
                        b.schema.iter().enumerate().all(|(j, attr)| match a.schema.iter().position(|z| z == attr) {
                            Some(i) => x[i] == y[j],
                            None => true,
                        });
                    if agree {
                        let mut t = x.clone();
                        for (j, attr) in b.schema.iter().enumerate() {
                            if !a.schema.contains(attr) {
                                t.push(y[j].clone());
                            }
                        }
                        rows.push(t);
                    }
                }
            }
            Bag { schema, rows }
        }
        RAExpr::Union(l, r) => {
            let (mut a, b) = (eval(l, db), eval(r, db));
            assert_eq!(a.schema, b.schema);
            a.rows.extend(b.rows);
            a
        }
        RAExpr::Diff(l, r) => {
            let (a, b) = (eval(l, db), eval(r, db));
            assert_eq!(a.schema, b.schema);
            // each right row cancels one matching left row
            let mut remaining = b.rows.clone();
            let mut rows = Vec::new();
            for x in a.rows {
                match remaining.iter().position(|y| *y == x) {
                    Some(k) => {
                        remaining.swap_remove(k);
                    }
                    None => rows.push(x),
                }
            }
            Bag { schema: a.schema, rows }
        }
        RAExpr::DupElim(inner) => {
            let b = eval(inner, db);
            let mut rows: Vec<Vec<Value>> = Vec::new();
            for r in b.rows {
                if !rows.contains(&r) {
                    rows.push(r);
                }
            }
            Bag { schema: b.schema, rows }
        }
    }
}
