//! m-semirings: the abstract interface, the counting and trust instances,
//! and the free instance whose elements are provenance terms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::HomError;

/// A commutative semiring with a monus: `monus(x, y)` is the least `z`
/// with `x ⪯ y ⊕ z` under the natural order.
pub trait MSemiring {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn monus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// The constant-one annotation δ₁ given to a tuple of annotation `a`;
    /// only called on support tuples.
    fn delta_one(&self, a: &Self::Elem) -> Self::Elem {
        let _ = a;
        self.one()
    }
}

/// (ℕ, +, ×, 0, 1) with truncated subtraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Natural;

impl MSemiring for Natural {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        a + b
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b
    }
    fn monus(&self, a: &u64, b: &u64) -> u64 {
        a.saturating_sub(*b)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

/// ({f, t}, ∨, ∧, f, t) with `x ⊖ y = x ∧ ¬y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Boolean;

impl MSemiring for Boolean {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn monus(&self, a: &bool, b: &bool) -> bool {
        *a && !*b
    }
    fn is_zero(&self, a: &bool) -> bool {
        !*a
    }
}

pub fn nat_semiring() -> Natural {
    Natural
}

pub fn bool_semiring() -> Boolean {
    Boolean
}

/// Terms of the free m-semiring over tuple and graph identifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProvTerm {
    Zero,
    One,
    Id(String),
    Add(Vec<ProvTerm>),
    Mul(Vec<ProvTerm>),
    Monus(Box<ProvTerm>, Box<ProvTerm>),
    /// δ₁ applied to a term.
    Delta(Box<ProvTerm>),
}

impl ProvTerm {
    pub fn id(name: impl Into<String>) -> Self {
        ProvTerm::Id(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: ProvTerm, b: ProvTerm) -> Self {
        ProvTerm::Add(vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: ProvTerm, b: ProvTerm) -> Self {
        ProvTerm::Mul(vec![a, b])
    }

    pub fn monus(a: ProvTerm, b: ProvTerm) -> Self {
        ProvTerm::Monus(Box::new(a), Box::new(b))
    }

    pub fn delta(a: ProvTerm) -> Self {
        ProvTerm::Delta(Box::new(a))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ProvTerm::Zero)
    }

    pub fn contains_monus(&self) -> bool {
        match self {
            ProvTerm::Zero | ProvTerm::One | ProvTerm::Id(_) => false,
            ProvTerm::Monus(..) => true,
            ProvTerm::Add(xs) | ProvTerm::Mul(xs) => xs.iter().any(ProvTerm::contains_monus),
            ProvTerm::Delta(x) => x.contains_monus(),
        }
    }

    /// Identifiers occurring in the term.
    pub fn ids(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids(&self, out: &mut BTreeSet<String>) {
        match self {
            ProvTerm::Zero | ProvTerm::One => {}
            ProvTerm::Id(n) => {
                out.insert(n.clone());
            }
            ProvTerm::Add(xs) | ProvTerm::Mul(xs) => xs.iter().for_each(|x| x.collect_ids(out)),
            ProvTerm::Monus(a, b) => {
                a.collect_ids(out);
                b.collect_ids(out);
            }
            ProvTerm::Delta(x) => x.collect_ids(out),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            ProvTerm::Zero | ProvTerm::One | ProvTerm::Id(_) => 1,
            ProvTerm::Add(xs) | ProvTerm::Mul(xs) => 1 + xs.iter().map(ProvTerm::size).sum::<usize>(),
            ProvTerm::Monus(a, b) => 1 + a.size() + b.size(),
            ProvTerm::Delta(x) => 1 + x.size(),
        }
    }

    /// Text form: `*` binds tighter than `+`, monus is always bracketed as
    /// `(L-R)`, δ₁ is written `d(...)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            ProvTerm::Zero => out.push('0'),
            ProvTerm::One => out.push('1'),
            ProvTerm::Id(n) => out.push_str(n),
            ProvTerm::Add(xs) => join_rendered(xs, '+', false, out),
            ProvTerm::Mul(xs) => join_rendered(xs, '*', true, out),
            ProvTerm::Monus(a, b) => {
                out.push('(');
                a.render_operand(true, out);
                out.push('-');
                b.render_operand(true, out);
                out.push(')');
            }
            ProvTerm::Delta(x) => {
                out.push_str("d(");
                x.render_into(out);
                out.push(')');
            }
        }
    }

    fn render_operand(&self, bracket_sums: bool, out: &mut String) {
        if bracket_sums && matches!(self, ProvTerm::Add(_)) {
            out.push('(');
            self.render_into(out);
            out.push(')');
        } else {
            self.render_into(out);
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            ProvTerm::Zero => 0,
            ProvTerm::One => 1,
            ProvTerm::Id(_) => 2,
            ProvTerm::Delta(_) => 3,
            ProvTerm::Mul(_) => 4,
            ProvTerm::Add(_) => 5,
            ProvTerm::Monus(..) => 6,
        }
    }

    /// Applies the rewrites valid in every m-semiring, bottom-up:
    /// `0⊕x→x`, `1⊗x→x`, `0⊗x→0`, `x⊖0→x`, `0⊖x→0`, `x⊖x→0`, `δ(0)→0`,
    /// `δ(1)→1`, `δδx→δx`, and flattens and sorts sums and products.
    /// A single pass reaches the fixpoint because every rebuilt node only
    /// has normal children.
    pub fn normalize(&self) -> ProvTerm {
        match self {
            ProvTerm::Zero | ProvTerm::One | ProvTerm::Id(_) => self.clone(),
            ProvTerm::Add(xs) => {
                let mut ops = Vec::with_capacity(xs.len());
                for x in xs {
                    match x.normalize() {
                        ProvTerm::Zero => {}
                        ProvTerm::Add(inner) => ops.extend(inner),
                        y => ops.push(y),
                    }
                }
                rebuild(ops, ProvTerm::Zero, ProvTerm::Add)
            }
            ProvTerm::Mul(xs) => {
                let mut ops = Vec::with_capacity(xs.len());
                for x in xs {
                    match x.normalize() {
                        ProvTerm::Zero => return ProvTerm::Zero,
                        ProvTerm::One => {}
                        ProvTerm::Mul(inner) => ops.extend(inner),
                        y => ops.push(y),
                    }
                }
                rebuild(ops, ProvTerm::One, ProvTerm::Mul)
            }
            ProvTerm::Monus(a, b) => {
                let (a, b) = (a.normalize(), b.normalize());
                if b.is_zero() {
                    a
                } else if a.is_zero() || a == b {
                    ProvTerm::Zero
                } else {
                    ProvTerm::monus(a, b)
                }
            }
            ProvTerm::Delta(x) => match x.normalize() {
                y @ (ProvTerm::Zero | ProvTerm::One | ProvTerm::Delta(_)) => y,
                y => ProvTerm::delta(y),
            },
        }
    }
}

fn join_rendered(xs: &[ProvTerm], sep: char, bracket_sums: bool, out: &mut String) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(sep);
        }
        x.render_operand(bracket_sums, out);
    }
}

fn rebuild(mut ops: Vec<ProvTerm>, unit: ProvTerm, node: fn(Vec<ProvTerm>) -> ProvTerm) -> ProvTerm {
    match ops.len() {
        0 => unit,
        1 => ops.pop().unwrap(),
        _ => {
            ops.sort_by(canonical_cmp);
            node(ops)
        }
    }
}

/// Splits `t12` into `("t", Some(12))` so that `t2` sorts before `t10`.
fn id_key(name: &str) -> (&str, Option<u64>) {
    let split = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (prefix, digits) = name.split_at(split);
    (prefix, digits.parse().ok())
}

/// Canonical operand order: constants, then identifiers in natural order,
/// then δ-terms, products, sums and differences, ties broken by rendering.
pub fn canonical_cmp(a: &ProvTerm, b: &ProvTerm) -> Ordering {
    a.kind_rank().cmp(&b.kind_rank()).then_with(|| match (a, b) {
        (ProvTerm::Id(x), ProvTerm::Id(y)) => id_key(x).cmp(&id_key(y)).then_with(|| x.cmp(y)),
        _ => a.render().cmp(&b.render()),
    })
}

impl fmt::Display for ProvTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The free m-semiring; results of every operation are normalized, and a
/// term is zero exactly when it normalizes to `0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Free;

impl MSemiring for Free {
    type Elem = ProvTerm;

    fn zero(&self) -> ProvTerm {
        ProvTerm::Zero
    }
    fn one(&self) -> ProvTerm {
        ProvTerm::One
    }
    fn add(&self, a: &ProvTerm, b: &ProvTerm) -> ProvTerm {
        ProvTerm::add(a.clone(), b.clone()).normalize()
    }
    fn mul(&self, a: &ProvTerm, b: &ProvTerm) -> ProvTerm {
        ProvTerm::mul(a.clone(), b.clone()).normalize()
    }
    fn monus(&self, a: &ProvTerm, b: &ProvTerm) -> ProvTerm {
        ProvTerm::monus(a.clone(), b.clone()).normalize()
    }
    fn is_zero(&self, a: &ProvTerm) -> bool {
        a.is_zero()
    }
    /// Stays symbolic when the annotation involves a difference, since
    /// the support of such a tuple is only known after evaluation.
    fn delta_one(&self, a: &ProvTerm) -> ProvTerm {
        if a.contains_monus() {
            ProvTerm::delta(a.clone()).normalize()
        } else {
            ProvTerm::One
        }
    }
}

/// Maps identifiers into a target m-semiring. Identifiers without an entry
/// take `default`, or are an error when there is none.
#[derive(Clone, Debug)]
pub struct Homomorphism<S: MSemiring> {
    pub target: S,
    pub assignment: BTreeMap<String, S::Elem>,
    pub default: Option<S::Elem>,
}

impl<S: MSemiring> Homomorphism<S> {
    pub fn new(target: S) -> Self {
        Homomorphism { target, assignment: BTreeMap::new(), default: None }
    }

    pub fn with_default(mut self, value: S::Elem) -> Self {
        self.default = Some(value);
        self
    }

    pub fn set(&mut self, id: impl Into<String>, value: S::Elem) -> &mut Self {
        self.assignment.insert(id.into(), value);
        self
    }

    fn lookup(&self, id: &str) -> Result<S::Elem, HomError> {
        self.assignment
            .get(id)
            .or(self.default.as_ref())
            .cloned()
            .ok_or_else(|| HomError::UnboundIdentifier(id.to_string()))
    }
}

/// Structural evaluation of `t` under `h`; `d(x)` is one when `x` is
/// nonzero and zero otherwise.
pub fn hom_eval<S: MSemiring>(t: &ProvTerm, h: &Homomorphism<S>) -> Result<S::Elem, HomError> {
    let s = &h.target;
    Ok(match t {
        ProvTerm::Zero => s.zero(),
        ProvTerm::One => s.one(),
        ProvTerm::Id(n) => h.lookup(n)?,
        ProvTerm::Add(xs) => {
            let mut acc = s.zero();
            for x in xs {
                acc = s.add(&acc, &hom_eval(x, h)?);
            }
            acc
        }
        ProvTerm::Mul(xs) => {
            let mut acc = s.one();
            for x in xs {
                acc = s.mul(&acc, &hom_eval(x, h)?);
            }
            acc
        }
        ProvTerm::Monus(a, b) => s.monus(&hom_eval(a, h)?, &hom_eval(b, h)?),
        ProvTerm::Delta(x) => {
            if s.is_zero(&hom_eval(x, h)?) {
                s.zero()
            } else {
                s.one()
            }
        }
    })
}
