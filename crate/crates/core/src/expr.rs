//! Map predicates and map updates.
//!
//! Expressions are limited to addition, subtraction, multiplication, integer
//! division, modulo, the five comparisons and the Boolean connectives. There
//! is no exponentiation and no recursion, so every expression is a finite tree
//! evaluated bottom-up.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::model::{Identifier, Value, ValueMap};

/// Which matched interval a field reference reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// The first operand (`a` in rule text).
    Left,
    /// The second operand (`b` in rule text).
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 12] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::And => "&",
            BinOp::Or => "|",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Nat(BigUint),
    Bool(bool),
    Field(Side, Identifier),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn nat(n: impl Into<BigUint>) -> Self {
        Expr::Nat(n.into())
    }

    pub fn left(key: Identifier) -> Self {
        Expr::Field(Side::Left, key)
    }

    pub fn right(key: Identifier) -> Self {
        Expr::Field(Side::Right, key)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Expr) -> Self {
        Expr::Not(Box::new(inner))
    }

    /// Number of arithmetic and logical operator nodes.
    pub fn operator_count(&self) -> u64 {
        match self {
            Expr::Nat(_) | Expr::Bool(_) | Expr::Field(..) => 0,
            Expr::Binary(_, l, r) => 1 + l.operator_count() + r.operator_count(),
            Expr::Not(e) => 1 + e.operator_count(),
        }
    }

    /// Number of arithmetic operator nodes (`+ - * / %`).
    pub fn arithmetic_count(&self) -> u64 {
        match self {
            Expr::Nat(_) | Expr::Bool(_) | Expr::Field(..) => 0,
            Expr::Binary(op, l, r) => {
                u64::from(op.is_arithmetic()) + l.arithmetic_count() + r.arithmetic_count()
            }
            Expr::Not(e) => e.arithmetic_count(),
        }
    }

    /// Sum of the binary lengths of the numeric literals.
    pub fn literal_bits(&self) -> u64 {
        match self {
            Expr::Nat(n) => bit_length(n),
            Expr::Bool(_) | Expr::Field(..) => 0,
            Expr::Binary(_, l, r) => l.literal_bits() + r.literal_bits(),
            Expr::Not(e) => e.literal_bits(),
        }
    }

    /// Calls `f` on every field reference in the tree.
    pub fn visit_fields(&self, f: &mut impl FnMut(Side, &Identifier)) {
        match self {
            Expr::Nat(_) | Expr::Bool(_) => {}
            Expr::Field(side, key) => f(*side, key),
            Expr::Binary(_, l, r) => {
                l.visit_fields(f);
                r.visit_fields(f);
            }
            Expr::Not(e) => e.visit_fields(f),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nat(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Field(Side::Left, k) => write!(f, "a.{k}"),
            Expr::Field(Side::Right, k) => write!(f, "b.{k}"),
            Expr::Binary(op, l, r) => write!(f, "({l:?} {} {r:?})", op.symbol()),
            Expr::Not(e) => write!(f, "!{e:?}"),
        }
    }
}

/// Binary length of `n`, counting zero and one as a single bit.
pub fn bit_length(n: &BigUint) -> u64 {
    n.bits().max(1)
}

/// Arithmetic regime for expression evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum ArithMode {
    /// Unbounded naturals; subtraction truncates at zero.
    #[default]
    Infinite,
    /// Every arithmetic result is reduced into `[0, k)`.
    Modulo(BigUint),
}

impl ArithMode {
    /// Finite-data mode with bound `k`; `None` when `k` is zero.
    pub fn modulo(k: impl Into<BigUint>) -> Option<Self> {
        let k = k.into();
        (!k.is_zero()).then_some(ArithMode::Modulo(k))
    }

    pub fn bound(&self) -> Option<&BigUint> {
        match self {
            ArithMode::Infinite => None,
            ArithMode::Modulo(k) => Some(k),
        }
    }

    pub(crate) fn reduce(&self, n: BigUint) -> BigUint {
        match self {
            ArithMode::Infinite => n,
            ArithMode::Modulo(k) => n % k,
        }
    }

    /// Reduces every natural in `map` into range; returns true if anything
    /// changed.
    pub fn reduce_map(&self, map: &mut ValueMap) -> bool {
        let ArithMode::Modulo(k) = self else {
            return false;
        };
        let mut changed = false;
        for value in map.values_mut() {
            if let Value::Nat(n) = value {
                if &*n >= k {
                    *n = &*n % k;
                    changed = true;
                }
            }
        }
        changed
    }
}

/// Why an expression could not be evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SoftFailure {
    MissingKey(Side, Identifier),
    TypeMismatch(BinOp),
    NotOnNat,
    DivisionByZero,
}

/// Big-step evaluation of `expr` against the two operand maps.
///
/// Abnormal cases (absent keys, ill-typed operands, zero divisors) are
/// reported as a [`SoftFailure`] rather than a panic.
pub fn evaluate(expr: &Expr, m1: &ValueMap, m2: &ValueMap, mode: &ArithMode) -> Result<Value, SoftFailure> {
    match expr {
        Expr::Nat(n) => Ok(Value::Nat(mode.reduce(n.clone()))),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Field(side, key) => {
            let map = match side {
                Side::Left => m1,
                Side::Right => m2,
            };
            match map.get(key) {
                Some(Value::Nat(n)) => Ok(Value::Nat(mode.reduce(n.clone()))),
                Some(v) => Ok(v.clone()),
                None => Err(SoftFailure::MissingKey(*side, key.clone())),
            }
        }
        Expr::Not(inner) => match evaluate(inner, m1, m2, mode)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            Value::Nat(_) => Err(SoftFailure::NotOnNat),
        },
        Expr::Binary(op, lhs, rhs) => {
            let l = evaluate(lhs, m1, m2, mode)?;
            let r = evaluate(rhs, m1, m2, mode)?;
            apply_binary(*op, l, r, mode)
        }
    }
}

fn apply_binary(op: BinOp, l: Value, r: Value, mode: &ArithMode) -> Result<Value, SoftFailure> {
    use BinOp::*;
    match (op, l, r) {
        (And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a && b)),
        (Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a || b)),
        (Eq, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a == b)),
        (Eq, Value::Nat(a), Value::Nat(b)) => Ok(Value::Bool(a == b)),
        (Lt, Value::Nat(a), Value::Nat(b)) => Ok(Value::Bool(a < b)),
        (Le, Value::Nat(a), Value::Nat(b)) => Ok(Value::Bool(a <= b)),
        (Gt, Value::Nat(a), Value::Nat(b)) => Ok(Value::Bool(a > b)),
        (Ge, Value::Nat(a), Value::Nat(b)) => Ok(Value::Bool(a >= b)),
        (Add, Value::Nat(a), Value::Nat(b)) => Ok(Value::Nat(mode.reduce(a + b))),
        (Mul, Value::Nat(a), Value::Nat(b)) => Ok(Value::Nat(mode.reduce(a * b))),
        (Sub, Value::Nat(a), Value::Nat(b)) => Ok(Value::Nat(match mode {
            ArithMode::Infinite if b > a => BigUint::zero(),
            ArithMode::Infinite => a - b,
            ArithMode::Modulo(k) => (a + k - (b % k)) % k,
        })),
        (Div, Value::Nat(a), Value::Nat(b)) => {
            if b.is_zero() {
                return Err(SoftFailure::DivisionByZero);
            }
            Ok(Value::Nat(mode.reduce(a / b)))
        }
        (Rem, Value::Nat(a), Value::Nat(b)) => {
            if b.is_zero() {
                return Err(SoftFailure::DivisionByZero);
            }
            Ok(Value::Nat(mode.reduce(a.mod_floor(&b))))
        }
        (op, _, _) => Err(SoftFailure::TypeMismatch(op)),
    }
}

/// A Boolean constraint over the two operand maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapPredicate {
    pub body: Expr,
}

impl MapPredicate {
    pub fn new(body: Expr) -> Self {
        MapPredicate { body }
    }

    /// The constraint that always holds.
    pub fn always() -> Self {
        MapPredicate { body: Expr::Bool(true) }
    }

    pub fn is_trivial(&self) -> bool {
        self.body == Expr::Bool(true)
    }
}

impl Default for MapPredicate {
    fn default() -> Self {
        MapPredicate::always()
    }
}

/// True iff the predicate evaluates to `true`. Failures and non-Boolean
/// results count as unsatisfied.
pub fn apply_predicate(phi: &MapPredicate, m1: &ValueMap, m2: &ValueMap, mode: &ArithMode) -> bool {
    matches!(evaluate(&phi.body, m1, m2, mode), Ok(Value::Bool(true)))
}

/// Builds the produced interval's map from the operand maps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MapUpdate {
    pub assignments: Vec<(Identifier, Expr)>,
}

impl MapUpdate {
    pub fn new(assignments: Vec<(Identifier, Expr)>) -> Self {
        MapUpdate { assignments }
    }

    pub fn empty() -> Self {
        MapUpdate::default()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// The first key assigned more than once, if any.
    pub fn duplicate_key(&self) -> Option<&Identifier> {
        let mut seen = HashSet::new();
        self.assignments.iter().map(|(k, _)| k).find(|k| !seen.insert(*k))
    }
}

/// Evaluates every assignment. The result holds exactly the assigned keys;
/// if any right-hand side fails, the whole update fails.
pub fn apply_update(psi: &MapUpdate, m1: &ValueMap, m2: &ValueMap, mode: &ArithMode) -> Result<ValueMap, SoftFailure> {
    let mut out = ValueMap::new();
    for (key, rhs) in &psi.assignments {
        let value = evaluate(rhs, m1, m2, mode)?;
        out.insert(key.clone(), value);
    }
    Ok(out)
}
