//! K-relations over an m-semiring and the operators of positive relational
//! algebra extended with difference and constant annotation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::RaError;
use crate::rdf::BaseDb;
use crate::semiring::{Free, MSemiring, ProvTerm};
use crate::tree::Node;

pub const GRAPHS_SCHEMA: [&str; 2] = ["gid", "iri"];
pub const QUADS_SCHEMA: [&str; 4] = ["gid", "sub", "pred", "obj"];

/// An attribute value: an encoded RDF term, the unbound marker, or a
/// graph identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Term(String),
    Unb,
    Gid(u32),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Term(t) => f.write_str(t),
            Value::Unb => f.write_str("unb"),
            Value::Gid(n) => write!(f, "{n}"),
        }
    }
}

pub type Schema = Vec<String>;
pub type Tuple = Vec<Value>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Attr(String),
    Const(Value),
}

impl Operand {
    pub fn attr(name: impl Into<String>) -> Self {
        Operand::Attr(name.into())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr(a) => f.write_str(a),
            Operand::Const(v) => v.fmt(f),
        }
    }
}

/// Selection condition. `Eq` is plain value equality, so `unb = unb`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SelPredicate {
    True,
    False,
    Eq(Operand, Operand),
    /// The attribute holds a graph identifier greater than the constant.
    GidGreater(String, u32),
    Not(Box<SelPredicate>),
    And(Vec<SelPredicate>),
    Or(Vec<SelPredicate>),
}

impl SelPredicate {
    pub fn eq(a: Operand, b: Operand) -> Self {
        SelPredicate::Eq(a, b)
    }

    pub fn attr_eq(a: &str, b: &str) -> Self {
        SelPredicate::Eq(Operand::attr(a), Operand::attr(b))
    }

    pub fn attr_is(a: &str, v: Value) -> Self {
        SelPredicate::Eq(Operand::attr(a), Operand::Const(v))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: SelPredicate) -> Self {
        SelPredicate::Not(Box::new(p))
    }

    /// Conjunction, dropping `True` operands and collapsing on `False`.
    pub fn and(ps: Vec<SelPredicate>) -> Self {
        let mut out = Vec::new();
        for p in ps {
            match p {
                SelPredicate::True => {}
                SelPredicate::False => return SelPredicate::False,
                SelPredicate::And(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => SelPredicate::True,
            1 => out.pop().unwrap(),
            _ => SelPredicate::And(out),
        }
    }

    /// Disjunction, dropping `False` operands and collapsing on `True`.
    pub fn or(ps: Vec<SelPredicate>) -> Self {
        let mut out = Vec::new();
        for p in ps {
            match p {
                SelPredicate::False => {}
                SelPredicate::True => return SelPredicate::True,
                SelPredicate::Or(inner) => out.extend(inner),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => SelPredicate::False,
            1 => out.pop().unwrap(),
            _ => SelPredicate::Or(out),
        }
    }

    fn attrs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SelPredicate::True | SelPredicate::False => {}
            SelPredicate::Eq(a, b) => {
                for o in [a, b] {
                    if let Operand::Attr(n) = o {
                        out.push(n);
                    }
                }
            }
            SelPredicate::GidGreater(a, _) => out.push(a),
            SelPredicate::Not(p) => p.attrs(out),
            SelPredicate::And(ps) | SelPredicate::Or(ps) => ps.iter().for_each(|p| p.attrs(out)),
        }
    }
}

impl fmt::Display for SelPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ps: &[SelPredicate], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            SelPredicate::True => f.write_str("true"),
            SelPredicate::False => f.write_str("false"),
            SelPredicate::Eq(a, b) => write!(f, "{a} = {b}"),
            SelPredicate::GidGreater(a, n) => write!(f, "{a} > {n}"),
            SelPredicate::Not(p) => match p.as_ref() {
                SelPredicate::Eq(a, b) => write!(f, "{a} != {b}"),
                p => write!(f, "not {p}"),
            },
            SelPredicate::And(ps) => join(f, ps, "and"),
            SelPredicate::Or(ps) => join(f, ps, "or"),
        }
    }
}

/// Value computed by an extended-projection column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjFn {
    ConstUnb,
    ConstGid(u32),
    /// The first argument unless it is `unb`, else the second.
    First(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProjCol {
    Keep(String),
    Computed { name: String, fun: ProjFn },
}

impl ProjCol {
    pub fn keep(a: impl Into<String>) -> Self {
        ProjCol::Keep(a.into())
    }

    pub fn computed(name: impl Into<String>, fun: ProjFn) -> Self {
        ProjCol::Computed { name: name.into(), fun }
    }

    pub fn name(&self) -> &str {
        match self {
            ProjCol::Keep(a) => a,
            ProjCol::Computed { name, .. } => name,
        }
    }
}

impl fmt::Display for ProjCol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjCol::Keep(a) => f.write_str(a),
            ProjCol::Computed { name, fun: ProjFn::ConstUnb } => write!(f, "{name} <- unb"),
            ProjCol::Computed { name, fun: ProjFn::ConstGid(n) } => write!(f, "{name} <- {n}"),
            ProjCol::Computed { name, fun: ProjFn::First(a, b) } => write!(f, "{name} <- first({a}, {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RAExpr {
    BaseGraphs,
    BaseQuads,
    Select(SelPredicate, Box<RAExpr>),
    Project(Vec<ProjCol>, Box<RAExpr>),
    /// Renames the listed attributes, leaving the others and the column
    /// order unchanged.
    Rename(Vec<(String, String)>, Box<RAExpr>),
    NatJoin(Box<RAExpr>, Box<RAExpr>),
    Union(Box<RAExpr>, Box<RAExpr>),
    Diff(Box<RAExpr>, Box<RAExpr>),
    /// Duplicate elimination, evaluated as the constant-one annotation.
    DupElim(Box<RAExpr>),
}

impl RAExpr {
    pub fn select(p: SelPredicate, e: RAExpr) -> Self {
        RAExpr::Select(p, Box::new(e))
    }

    pub fn project(cols: Vec<ProjCol>, e: RAExpr) -> Self {
        RAExpr::Project(cols, Box::new(e))
    }

    pub fn rename(pairs: Vec<(String, String)>, e: RAExpr) -> Self {
        RAExpr::Rename(pairs, Box::new(e))
    }

    pub fn join(a: RAExpr, b: RAExpr) -> Self {
        RAExpr::NatJoin(Box::new(a), Box::new(b))
    }

    pub fn union(a: RAExpr, b: RAExpr) -> Self {
        RAExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn diff(a: RAExpr, b: RAExpr) -> Self {
        RAExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn dup_elim(e: RAExpr) -> Self {
        RAExpr::DupElim(Box::new(e))
    }

    /// Output attributes, computed from the expression alone.
    pub fn schema(&self) -> Result<Schema, RaError> {
        match self {
            RAExpr::BaseGraphs => Ok(GRAPHS_SCHEMA.iter().map(|s| s.to_string()).collect()),
            RAExpr::BaseQuads => Ok(QUADS_SCHEMA.iter().map(|s| s.to_string()).collect()),
            RAExpr::Select(p, e) => {
                let s = e.schema()?;
                let mut used = Vec::new();
                p.attrs(&mut used);
                for a in used {
                    position(&s, a)?;
                }
                Ok(s)
            }
            RAExpr::Project(cols, e) => {
                let s = e.schema()?;
                let mut out: Schema = Vec::with_capacity(cols.len());
                for c in cols {
                    match c {
                        ProjCol::Keep(a) => {
                            position(&s, a)?;
                        }
                        ProjCol::Computed { fun: ProjFn::First(a, b), .. } => {
                            position(&s, a)?;
                            position(&s, b)?;
                        }
                        ProjCol::Computed { .. } => {}
                    }
                    push_unique(&mut out, c.name())?;
                }
                Ok(out)
            }
            RAExpr::Rename(pairs, e) => {
                let s = e.schema()?;
                let mut out = s.clone();
                for (old, new) in pairs {
                    out[position(&s, old)?] = new.clone();
                }
                let mut check = Vec::with_capacity(out.len());
                for a in &out {
                    push_unique(&mut check, a)?;
                }
                Ok(out)
            }
            RAExpr::NatJoin(a, b) => {
                let mut out = a.schema()?;
                for attr in b.schema()? {
                    if !out.contains(&attr) {
                        out.push(attr);
                    }
                }
                Ok(out)
            }
            RAExpr::Union(a, b) | RAExpr::Diff(a, b) => {
                let (l, r) = (a.schema()?, b.schema()?);
                if l != r {
                    let op = if matches!(self, RAExpr::Union(..)) { "union" } else { "difference" };
                    return Err(RaError::SchemaMismatch { op, left: l, right: r });
                }
                Ok(l)
            }
            RAExpr::DupElim(e) => e.schema(),
        }
    }

    /// Number of nodes satisfying `pred`.
    pub fn count_nodes(&self, pred: &dyn Fn(&RAExpr) -> bool) -> usize {
        let own = usize::from(pred(self));
        own + match self {
            RAExpr::BaseGraphs | RAExpr::BaseQuads => 0,
            RAExpr::Select(_, e) | RAExpr::Project(_, e) | RAExpr::Rename(_, e) | RAExpr::DupElim(e) => {
                e.count_nodes(pred)
            }
            RAExpr::NatJoin(a, b) | RAExpr::Union(a, b) | RAExpr::Diff(a, b) => {
                a.count_nodes(pred) + b.count_nodes(pred)
            }
        }
    }

    fn node(&self) -> Node {
        let list = |items: Vec<String>| items.join(", ");
        match self {
            RAExpr::BaseGraphs => Node::leaf("Graphs"),
            RAExpr::BaseQuads => Node::leaf("Quads"),
            RAExpr::Select(p, e) => Node::new(format!("Select {p}"), vec![e.node()]),
            RAExpr::Project(cols, e) => {
                Node::new(format!("Project [{}]", list(cols.iter().map(ProjCol::to_string).collect())), vec![e.node()])
            }
            RAExpr::Rename(pairs, e) => Node::new(
                format!("Rename [{}]", list(pairs.iter().map(|(o, n)| format!("{o} -> {n}")).collect())),
                vec![e.node()],
            ),
            RAExpr::NatJoin(a, b) => Node::new("Join", vec![a.node(), b.node()]),
            RAExpr::Union(a, b) => Node::new("Union", vec![a.node(), b.node()]),
            RAExpr::Diff(a, b) => Node::new("Diff", vec![a.node(), b.node()]),
            RAExpr::DupElim(e) => Node::new("DupElim", vec![e.node()]),
        }
    }

    /// One operator per line, operands indented by two spaces.
    pub fn to_tree_string(&self) -> String {
        self.node().render_indented()
    }
}

impl fmt::Display for RAExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tree_string())
    }
}

fn position(schema: &[String], attr: &str) -> Result<usize, RaError> {
    schema.iter().position(|a| a == attr).ok_or_else(|| RaError::UnknownAttribute(attr.to_string()))
}

fn push_unique(out: &mut Schema, attr: &str) -> Result<(), RaError> {
    if out.iter().any(|a| a == attr) {
        return Err(RaError::DuplicateAttribute(attr.to_string()));
    }
    out.push(attr.to_string());
    Ok(())
}

/// A finite K-relation: only tuples with a nonzero annotation are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct KRelation<E> {
    pub schema: Schema,
    pub rows: BTreeMap<Tuple, E>,
}

impl<E: Clone + PartialEq + fmt::Debug> KRelation<E> {
    pub fn empty(schema: Schema) -> Self {
        KRelation { schema, rows: BTreeMap::new() }
    }

    /// Builds a relation, summing the annotations of repeated tuples.
    pub fn from_rows<S: MSemiring<Elem = E>>(
        s: &S,
        schema: Schema,
        rows: impl IntoIterator<Item = (Tuple, E)>,
    ) -> Self {
        let mut r = KRelation::empty(schema);
        for (t, a) in rows {
            r.accumulate(s, t, a);
        }
        r.drop_zeros(s);
        r
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, t: &[Value]) -> Option<&E> {
        self.rows.get(t)
    }

    pub fn attr_index(&self, attr: &str) -> Result<usize, RaError> {
        position(&self.schema, attr)
    }

    fn accumulate<S: MSemiring<Elem = E>>(&mut self, s: &S, t: Tuple, a: E) {
        match self.rows.get_mut(&t) {
            Some(existing) => *existing = s.add(existing, &a),
            None => {
                self.rows.insert(t, a);
            }
        }
    }

    fn drop_zeros<S: MSemiring<Elem = E>>(&mut self, s: &S) {
        self.rows.retain(|_, a| !s.is_zero(a));
    }
}

fn same_schema<E>(op: &'static str, a: &KRelation<E>, b: &KRelation<E>) -> Result<(), RaError> {
    if a.schema != b.schema {
        return Err(RaError::SchemaMismatch { op, left: a.schema.clone(), right: b.schema.clone() });
    }
    Ok(())
}

/// `(R1 ∪ R2)(t) = R1(t) ⊕ R2(t)`.
pub fn ra_union<S: MSemiring>(
    s: &S,
    a: &KRelation<S::Elem>,
    b: &KRelation<S::Elem>,
) -> Result<KRelation<S::Elem>, RaError> {
    same_schema("union", a, b)?;
    let mut out = a.clone();
    for (t, x) in &b.rows {
        out.accumulate(s, t.clone(), x.clone());
    }
    out.drop_zeros(s);
    Ok(out)
}

/// `(R1 − R2)(t) = R1(t) ⊖ R2(t)`.
pub fn ra_diff<S: MSemiring>(
    s: &S,
    a: &KRelation<S::Elem>,
    b: &KRelation<S::Elem>,
) -> Result<KRelation<S::Elem>, RaError> {
    same_schema("difference", a, b)?;
    let mut out = KRelation::empty(a.schema.clone());
    for (t, x) in &a.rows {
        let y = match b.rows.get(t) {
            Some(y) => s.monus(x, y),
            None => x.clone(),
        };
        if !s.is_zero(&y) {
            out.rows.insert(t.clone(), y);
        }
    }
    Ok(out)
}

/// Compiled selection condition over column positions.
enum Compiled {
    Const(bool),
    Eq(Slot, Slot),
    GidGreater(usize, u32),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
}

enum Slot {
    Col(usize),
    Val(Value),
}

impl Slot {
    fn get<'a>(&'a self, t: &'a [Value]) -> &'a Value {
        match self {
            Slot::Col(i) => &t[*i],
            Slot::Val(v) => v,
        }
    }
}

fn compile(p: &SelPredicate, schema: &[String]) -> Result<Compiled, RaError> {
    let slot = |o: &Operand| -> Result<Slot, RaError> {
        Ok(match o {
            Operand::Attr(a) => Slot::Col(position(schema, a)?),
            Operand::Const(v) => Slot::Val(v.clone()),
        })
    };
    let all = |ps: &[SelPredicate]| ps.iter().map(|p| compile(p, schema)).collect::<Result<Vec<_>, _>>();
    Ok(match p {
        SelPredicate::True => Compiled::Const(true),
        SelPredicate::False => Compiled::Const(false),
        SelPredicate::Eq(a, b) => Compiled::Eq(slot(a)?, slot(b)?),
        SelPredicate::GidGreater(a, n) => Compiled::GidGreater(position(schema, a)?, *n),
        SelPredicate::Not(p) => Compiled::Not(Box::new(compile(p, schema)?)),
        SelPredicate::And(ps) => Compiled::And(all(ps)?),
        SelPredicate::Or(ps) => Compiled::Or(all(ps)?),
    })
}

impl Compiled {
    fn holds(&self, t: &[Value]) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Eq(a, b) => a.get(t) == b.get(t),
            Compiled::GidGreater(i, n) => matches!(t[*i], Value::Gid(m) if m > *n),
            Compiled::Not(p) => !p.holds(t),
            Compiled::And(ps) => ps.iter().all(|p| p.holds(t)),
            Compiled::Or(ps) => ps.iter().any(|p| p.holds(t)),
        }
    }
}

/// `(σ_P(R))(t) = R(t) ⊗ P(t)` with `P(t) ∈ {0, 1}`.
pub fn ra_select<E: Clone + PartialEq + fmt::Debug>(
    p: &SelPredicate,
    r: &KRelation<E>,
) -> Result<KRelation<E>, RaError> {
    let c = compile(p, &r.schema)?;
    let rows = r.rows.iter().filter(|(t, _)| c.holds(t)).map(|(t, a)| (t.clone(), a.clone())).collect();
    Ok(KRelation { schema: r.schema.clone(), rows })
}

/// Extended projection: the annotation of an output tuple is the sum over
/// the input tuples mapped to it.
pub fn ra_project<S: MSemiring>(
    s: &S,
    cols: &[ProjCol],
    r: &KRelation<S::Elem>,
) -> Result<KRelation<S::Elem>, RaError> {
    enum Col {
        At(usize),
        Fixed(Value),
        First(usize, usize),
    }
    let mut schema = Vec::with_capacity(cols.len());
    let mut plan = Vec::with_capacity(cols.len());
    for c in cols {
        push_unique(&mut schema, c.name())?;
        plan.push(match c {
            ProjCol::Keep(a) => Col::At(r.attr_index(a)?),
            ProjCol::Computed { fun: ProjFn::ConstUnb, .. } => Col::Fixed(Value::Unb),
            ProjCol::Computed { fun: ProjFn::ConstGid(n), .. } => Col::Fixed(Value::Gid(*n)),
            ProjCol::Computed { fun: ProjFn::First(a, b), .. } => Col::First(r.attr_index(a)?, r.attr_index(b)?),
        });
    }
    let mut out = KRelation::empty(schema);
    for (t, x) in &r.rows {
        let image = plan
            .iter()
            .map(|c| match c {
                Col::At(i) => t[*i].clone(),
                Col::Fixed(v) => v.clone(),
                Col::First(i, j) => {
                    if t[*i] != Value::Unb {
                        t[*i].clone()
                    } else {
                        t[*j].clone()
                    }
                }
            })
            .collect();
        out.accumulate(s, image, x.clone());
    }
    out.drop_zeros(s);
    Ok(out)
}

/// Renames attributes; tuples and annotations are unchanged.
pub fn ra_rename<E: Clone + PartialEq + fmt::Debug>(
    pairs: &[(String, String)],
    r: &KRelation<E>,
) -> Result<KRelation<E>, RaError> {
    let mut schema = r.schema.clone();
    for (old, new) in pairs {
        schema[r.attr_index(old)?] = new.clone();
    }
    let mut check = Vec::with_capacity(schema.len());
    for a in &schema {
        push_unique(&mut check, a)?;
    }
    Ok(KRelation { schema, rows: r.rows.clone() })
}

/// Natural join on the shared attributes; annotations multiply. The output
/// schema is the left schema followed by the right-only attributes.
pub fn ra_join<S: MSemiring>(
    s: &S,
    a: &KRelation<S::Elem>,
    b: &KRelation<S::Elem>,
) -> Result<KRelation<S::Elem>, RaError> {
    let mut shared_left = Vec::new();
    let mut shared_right = Vec::new();
    let mut right_only = Vec::new();
    let mut schema = a.schema.clone();
    for (j, attr) in b.schema.iter().enumerate() {
        match a.schema.iter().position(|x| x == attr) {
            Some(i) => {
                shared_left.push(i);
                shared_right.push(j);
            }
            None => {
                right_only.push(j);
                schema.push(attr.clone());
            }
        }
    }
    let mut index: HashMap<Vec<&Value>, Vec<(&Tuple, &S::Elem)>> = HashMap::new();
    for (t, y) in &b.rows {
        index.entry(shared_right.iter().map(|&j| &t[j]).collect()).or_default().push((t, y));
    }
    let mut out = KRelation::empty(schema);
    for (t, x) in &a.rows {
        let key: Vec<&Value> = shared_left.iter().map(|&i| &t[i]).collect();
        let Some(matches) = index.get(&key) else { continue };
        for (u, y) in matches {
            let mut joined = t.clone();
            joined.extend(right_only.iter().map(|&j| u[j].clone()));
            let z = s.mul(x, y);
            if !s.is_zero(&z) {
                out.rows.insert(joined, z);
            }
        }
    }
    Ok(out)
}

/// Constant annotation: every support tuple gets the semiring's δ₁ value.
pub fn ra_dupelim<S: MSemiring>(s: &S, r: &KRelation<S::Elem>) -> KRelation<S::Elem> {
    let rows = r.rows.iter().map(|(t, x)| (t.clone(), s.delta_one(x))).filter(|(_, y)| !s.is_zero(y)).collect();
    KRelation { schema: r.schema.clone(), rows }
}

/// Annotations of the base relations, indexed like `BaseDb::graphs` and
/// `BaseDb::quads`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseAnnotations<E> {
    pub graphs: Vec<E>,
    pub quads: Vec<E>,
}

impl<E: Clone> BaseAnnotations<E> {
    /// The same annotation on every base row.
    pub fn uniform(db: &BaseDb, value: E) -> Self {
        BaseAnnotations { graphs: vec![value.clone(); db.graphs.len()], quads: vec![value; db.quads.len()] }
    }
}

impl BaseAnnotations<ProvTerm> {
    /// Each base row annotated by its own identifier.
    pub fn identifiers(db: &BaseDb) -> Self {
        BaseAnnotations {
            graphs: db.graph_ids.iter().map(ProvTerm::id).collect(),
            quads: db.quad_ids.iter().map(ProvTerm::id).collect(),
        }
    }
}

/// The base relations as tuples, in `BaseDb` order.
pub fn graphs_tuples(db: &BaseDb) -> Vec<Tuple> {
    db.graphs.iter().map(|g| vec![Value::Gid(g.gid), Value::Term(g.iri_key.clone())]).collect()
}

pub fn quads_tuples(db: &BaseDb) -> Vec<Tuple> {
    db.quads
        .iter()
        .map(|q| {
            vec![Value::Gid(q.gid), Value::Term(q.sub.clone()), Value::Term(q.pred.clone()), Value::Term(q.obj.clone())]
        })
        .collect()
}

/// Bottom-up evaluation of `e` over the base relations of `db`.
pub fn eval_ra<S: MSemiring>(
    e: &RAExpr,
    db: &BaseDb,
    s: &S,
    base: &BaseAnnotations<S::Elem>,
) -> Result<KRelation<S::Elem>, RaError> {
    match e {
        RAExpr::BaseGraphs => {
            Ok(KRelation::from_rows(s, e.schema()?, graphs_tuples(db).into_iter().zip(base.graphs.iter().cloned())))
        }
        RAExpr::BaseQuads => {
            Ok(KRelation::from_rows(s, e.schema()?, quads_tuples(db).into_iter().zip(base.quads.iter().cloned())))
        }
        RAExpr::Select(p, inner) => ra_select(p, &eval_ra(inner, db, s, base)?),
        RAExpr::Project(cols, inner) => ra_project(s, cols, &eval_ra(inner, db, s, base)?),
        RAExpr::Rename(pairs, inner) => ra_rename(pairs, &eval_ra(inner, db, s, base)?),
        RAExpr::NatJoin(a, b) => ra_join(s, &eval_ra(a, db, s, base)?, &eval_ra(b, db, s, base)?),
        RAExpr::Union(a, b) => ra_union(s, &eval_ra(a, db, s, base)?, &eval_ra(b, db, s, base)?),
        RAExpr::Diff(a, b) => ra_diff(s, &eval_ra(a, db, s, base)?, &eval_ra(b, db, s, base)?),
        RAExpr::DupElim(inner) => Ok(ra_dupelim(s, &eval_ra(inner, db, s, base)?)),
    }
}

/// Evaluation in the free m-semiring with every base row annotated by its
/// identifier.
pub fn eval_provenance(e: &RAExpr, db: &BaseDb) -> Result<KRelation<ProvTerm>, RaError> {
    eval_ra(e, db, &Free, &BaseAnnotations::identifiers(db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{encode_dataset, parse_nquads};
    use crate::semiring::{nat_semiring, Natural};

    const FOAF_ACCOUNT: &str = "<http://xmlns.com/foaf/0.1/account>";
    const FOAF_HOMEPAGE: &str = "<http://xmlns.com/foaf/0.1/accountServiceHomepage>";
    const ACCOUNTS: &str = "\
<http://people/david> <http://xmlns.com/foaf/0.1/account> <http://bank> .
<http://people/felix> <http://xmlns.com/foaf/0.1/account> <http://games> .
<http://bank> <http://xmlns.com/foaf/0.1/accountServiceHomepage> <http://bank/yourmoney> .
";

    fn term(s: &str) -> Value {
        Value::Term(s.to_string())
    }

    fn nat(schema: &[&str], rows: &[(&[&str], u64)]) -> KRelation<u64> {
        KRelation::from_rows(
            &Natural,
            schema.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|(t, n)| (t.iter().map(|v| term(v)).collect(), *n)),
        )
    }

    fn id(n: &str) -> ProvTerm {
        ProvTerm::id(n)
    }

    fn example_db() -> BaseDb {
        encode_dataset(&parse_nquads(ACCOUNTS).unwrap())
    }

    fn quads_with_pred(pred: &str) -> RAExpr {
        RAExpr::select(SelPredicate::attr_is("pred", term(pred)), RAExpr::BaseQuads)
    }

    #[test]
    fn union_cases() {
        let f = Free;
        let a = KRelation::from_rows(&f, vec!["x".into()], [(vec![term("1")], id("a"))]);
        let b = KRelation::from_rows(&f, vec!["x".into()], [(vec![term("1")], id("b"))]);
        assert_eq!(ra_union(&f, &a, &b).unwrap().get(&[term("1")]), Some(&ProvTerm::add(id("a"), id("b"))));
        assert_eq!(ra_union(&f, &a, &KRelation::empty(vec!["x".into()])).unwrap(), a);
        let n = ra_union(&Natural, &nat(&["x"], &[(&["1"], 2)]), &nat(&["x"], &[(&["1"], 3)])).unwrap();
        assert_eq!(n, nat(&["x"], &[(&["1"], 5)]));
        assert!(matches!(ra_union(&f, &a, &KRelation::empty(vec!["y".into()])), Err(RaError::SchemaMismatch { .. })));
    }

    #[test]
    fn project_cases() {
        let r = nat(&["a", "b"], &[(&["1", "x"], 2), (&["1", "y"], 3), (&["2", "y"], 1)]);
        let p = ra_project(&Natural, &[ProjCol::keep("a")], &r).unwrap();
        assert_eq!(p, nat(&["a"], &[(&["1"], 5), (&["2"], 1)]));
        let ident = ra_project(&Natural, &[ProjCol::keep("a"), ProjCol::keep("b")], &r).unwrap();
        assert_eq!(ident, r);
        let padded = ra_project(&Natural, &[ProjCol::keep("a"), ProjCol::computed("c", ProjFn::ConstUnb)], &r).unwrap();
        assert!(padded.rows.keys().all(|t| t[1] == Value::Unb));
        let first = KRelation::from_rows(
            &Natural,
            vec!["p".into(), "q".into()],
            [(vec![Value::Unb, term("z")], 1), (vec![term("w"), term("z")], 1)],
        );
        let f = ra_project(&Natural, &[ProjCol::computed("v", ProjFn::First("p".into(), "q".into()))], &first).unwrap();
        assert_eq!(f, nat(&["v"], &[(&["z"], 1), (&["w"], 1)]));
        assert_eq!(ra_project(&Natural, &[ProjCol::keep("nope")], &r), Err(RaError::UnknownAttribute("nope".into())));
    }

    #[test]
    fn select_cases() {
        let r = nat(&["a"], &[(&["1"], 1), (&["2"], 4)]);
        assert_eq!(ra_select(&SelPredicate::True, &r).unwrap(), r);
        assert!(ra_select(&SelPredicate::False, &r).unwrap().is_empty());
        let db = example_db();
        let sel = eval_provenance(&quads_with_pred(FOAF_ACCOUNT), &db).unwrap();
        let anns: Vec<_> = sel.rows.values().map(ProvTerm::render).collect();
        assert_eq!(anns, ["t1", "t2"]);
        let g = RAExpr::select(SelPredicate::GidGreater("gid".into(), 0), RAExpr::BaseGraphs);
        assert!(eval_provenance(&g, &db).unwrap().is_empty());
    }

    #[test]
    fn join_cases() {
        let db = example_db();
        // Q1 ⋈ Q2 joined on the account object / homepage subject
        let q1 = RAExpr::rename(
            vec![("sub".into(), "who".into()), ("obj".into(), "acc".into()), ("pred".into(), "p1".into())],
            quads_with_pred(FOAF_ACCOUNT),
        );
        let q2 = RAExpr::rename(
            vec![("sub".into(), "acc".into()), ("obj".into(), "home".into()), ("pred".into(), "p2".into())],
            quads_with_pred(FOAF_HOMEPAGE),
        );
        let j = eval_provenance(&RAExpr::join(q1, q2), &db).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!(j.rows.values().next().unwrap().render(), "t1*t3");
        let a = nat(&["x"], &[(&["1"], 2)]);
        assert_eq!(ra_join(&Natural, &a, &nat(&["x"], &[(&["1"], 3)])).unwrap(), nat(&["x"], &[(&["1"], 6)]));
        assert!(ra_join(&Natural, &a, &nat(&["x"], &[(&["2"], 3)])).unwrap().is_empty());
        let cross = ra_join(&Natural, &a, &nat(&["y"], &[(&["u"], 1), (&["v"], 1)])).unwrap();
        assert_eq!(cross.schema, ["x", "y"]);
        assert_eq!(cross.len(), 2);
    }

    #[test]
    fn unb_joins_only_with_unb() {
        let l = KRelation::from_rows(&Natural, vec!["x".into()], [(vec![Value::Unb], 1)]);
        let r = KRelation::from_rows(&Natural, vec!["x".into()], [(vec![Value::Unb], 1), (vec![term("a")], 1)]);
        assert_eq!(ra_join(&Natural, &l, &r).unwrap().len(), 1);
    }

    #[test]
    fn rename_cases() {
        let r = nat(&["a", "b"], &[(&["1", "x"], 2)]);
        assert_eq!(ra_rename(&[], &r).unwrap(), r);
        let there = ra_rename(&[("a".into(), "c".into())], &r).unwrap();
        assert_eq!(there.schema, ["c", "b"]);
        assert_eq!(ra_rename(&[("c".into(), "a".into())], &there).unwrap(), r);
        assert_eq!(ra_rename(&[("a".into(), "b".into())], &r), Err(RaError::DuplicateAttribute("b".into())));
        let q = eval_provenance(&RAExpr::rename(vec![("gid".into(), "G".into())], RAExpr::BaseQuads), &example_db());
        assert_eq!(q.unwrap().schema, ["G", "sub", "pred", "obj"]);
    }

    #[test]
    fn diff_cases() {
        let f = Free;
        let r = KRelation::from_rows(&f, vec!["x".into()], [(vec![term("1")], id("t1"))]);
        let empty = KRelation::empty(vec!["x".into()]);
        assert_eq!(ra_diff(&f, &r, &empty).unwrap(), r);
        assert!(ra_diff(&f, &r, &r).unwrap().is_empty());
        let one = KRelation::from_rows(&f, vec!["x".into()], [(vec![term("1")], ProvTerm::One)]);
        let sub = KRelation::from_rows(&f, vec!["x".into()], [(vec![term("1")], ProvTerm::mul(id("t1"), id("t3")))]);
        let d = ra_diff(&f, &one, &sub).unwrap();
        let j = ra_join(&f, &r, &d).unwrap();
        assert_eq!(j.get(&[term("1")]).unwrap().render(), "t1*(1-t1*t3)");
        let n = ra_diff(&Natural, &nat(&["x"], &[(&["1"], 2)]), &nat(&["x"], &[(&["1"], 5)])).unwrap();
        assert!(n.is_empty());
    }

    #[test]
    fn dupelim_cases() {
        let db = example_db();
        let d = eval_provenance(&RAExpr::dup_elim(quads_with_pred(FOAF_ACCOUNT)), &db).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.rows.values().all(|a| *a == ProvTerm::One));
        assert!(ra_dupelim(&Free, &KRelation::empty(vec![])).is_empty());
        assert_eq!(ra_dupelim(&Natural, &nat(&["x"], &[(&["1"], 7)])), nat(&["x"], &[(&["1"], 1)]));
    }

    #[test]
    fn empty_quads_give_empty_results() {
        let db = encode_dataset(&parse_nquads("").unwrap());
        let e = RAExpr::join(RAExpr::BaseGraphs, quads_with_pred(FOAF_ACCOUNT));
        let r = eval_ra(&e, &db, &nat_semiring(), &BaseAnnotations::uniform(&db, 1)).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.schema, e.schema().unwrap());
    }

    #[test]
    fn schema_errors() {
        let e = RAExpr::union(RAExpr::BaseGraphs, RAExpr::BaseQuads);
        assert!(matches!(e.schema(), Err(RaError::SchemaMismatch { op: "union", .. })));
        let e = RAExpr::select(SelPredicate::attr_eq("gid", "nope"), RAExpr::BaseGraphs);
        assert_eq!(e.schema(), Err(RaError::UnknownAttribute("nope".into())));
    }

    #[test]
    fn tree_printing() {
        let e = RAExpr::project(
            vec![ProjCol::keep("G"), ProjCol::computed("?x", ProjFn::ConstUnb)],
            RAExpr::rename(
                vec![("gid".into(), "G".into())],
                RAExpr::select(SelPredicate::not(SelPredicate::attr_eq("gid", "iri")), RAExpr::BaseGraphs),
            ),
        );
        assert_eq!(
            e.to_tree_string(),
            "Project [G, ?x <- unb]\n  Rename [gid -> G]\n    Select gid != iri\n      Graphs\n"
        );
        assert_eq!(e.count_nodes(&|n| matches!(n, RAExpr::BaseGraphs)), 1);
    }
}
