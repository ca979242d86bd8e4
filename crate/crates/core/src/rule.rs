//! Clock predicates, single-rule semantics and the minimality selection.

use std::fmt;

use crate::expr::{ArithMode, MapPredicate, MapUpdate};
use crate::index::{self, Store};
use crate::model::{Identifier, Interval, Pool, Time};

/// Temporal relation of an inclusive rule. Each relation also fixes the
/// endpoints of the produced interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InclusiveOp {
    Before,
    Meet,
    During,
    Coincide,
    Start,
    Finish,
    Overlap,
    Slice,
}

impl InclusiveOp {
    pub const ALL: [InclusiveOp; 8] = [
        InclusiveOp::Before,
        InclusiveOp::Meet,
        InclusiveOp::During,
        InclusiveOp::Coincide,
        InclusiveOp::Start,
        InclusiveOp::Finish,
        InclusiveOp::Overlap,
        InclusiveOp::Slice,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            InclusiveOp::Before => "before",
            InclusiveOp::Meet => "meet",
            InclusiveOp::During => "during",
            InclusiveOp::Coincide => "coincide",
            InclusiveOp::Start => "start",
            InclusiveOp::Finish => "finish",
            InclusiveOp::Overlap => "overlap",
            InclusiveOp::Slice => "slice",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        InclusiveOp::ALL.into_iter().find(|op| op.keyword() == word)
    }
}

/// Temporal relation of an exclusive rule between the included and the
/// excluded interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExclusiveOp {
    After,
    Follow,
    Contain,
}

impl ExclusiveOp {
    pub const ALL: [ExclusiveOp; 3] = [ExclusiveOp::After, ExclusiveOp::Follow, ExclusiveOp::Contain];

    pub fn keyword(self) -> &'static str {
        match self {
            ExclusiveOp::After => "after",
            ExclusiveOp::Follow => "follow",
            ExclusiveOp::Contain => "contain",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        ExclusiveOp::ALL.into_iter().find(|op| op.keyword() == word)
    }
}

/// `lhs <- left op right where phi map psi`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InclusiveRule {
    pub lhs: Identifier,
    pub left: Identifier,
    pub op: InclusiveOp,
    pub right: Identifier,
    pub phi: MapPredicate,
    pub psi: MapUpdate,
}

/// `lhs <- included unless op excluded where phi map psi`
///
/// The update sees the included interval's map on the left and an empty map
/// on the right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExclusiveRule {
    pub lhs: Identifier,
    pub included: Identifier,
    pub op: ExclusiveOp,
    pub excluded: Identifier,
    pub phi: MapPredicate,
    pub psi: MapUpdate,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Inclusive(InclusiveRule),
    Exclusive(ExclusiveRule),
}

impl Rule {
    pub fn inclusive(lhs: Identifier, left: Identifier, op: InclusiveOp, right: Identifier) -> Self {
        Rule::Inclusive(InclusiveRule {
            lhs,
            left,
            op,
            right,
            phi: MapPredicate::always(),
            psi: MapUpdate::empty(),
        })
    }

    pub fn exclusive(lhs: Identifier, included: Identifier, op: ExclusiveOp, excluded: Identifier) -> Self {
        Rule::Exclusive(ExclusiveRule {
            lhs,
            included,
            op,
            excluded,
            phi: MapPredicate::always(),
            psi: MapUpdate::empty(),
        })
    }

    pub fn with_phi(mut self, phi: MapPredicate) -> Self {
        match &mut self {
            Rule::Inclusive(r) => r.phi = phi,
            Rule::Exclusive(r) => r.phi = phi,
        }
        self
    }

    pub fn with_psi(mut self, psi: MapUpdate) -> Self {
        match &mut self {
            Rule::Inclusive(r) => r.psi = psi,
            Rule::Exclusive(r) => r.psi = psi,
        }
        self
    }

    pub fn lhs(&self) -> &Identifier {
        match self {
            Rule::Inclusive(r) => &r.lhs,
            Rule::Exclusive(r) => &r.lhs,
        }
    }

    /// Identifiers on the right-hand side. For exclusive rules this includes
    /// the excluded identifier.
    pub fn rhs(&self) -> [&Identifier; 2] {
        match self {
            Rule::Inclusive(r) => [&r.left, &r.right],
            Rule::Exclusive(r) => [&r.included, &r.excluded],
        }
    }

    pub fn phi(&self) -> &MapPredicate {
        match self {
            Rule::Inclusive(r) => &r.phi,
            Rule::Exclusive(r) => &r.phi,
        }
    }

    pub fn psi(&self) -> &MapUpdate {
        match self {
            Rule::Inclusive(r) => &r.psi,
            Rule::Exclusive(r) => &r.psi,
        }
    }

    pub fn is_exclusive(&self) -> bool {
        matches!(self, Rule::Exclusive(_))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_rule(self))
    }
}

/// Endpoints of an interval produced by an inclusive match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatchWindow {
    pub start: Time,
    pub end: Time,
}

/// Tests `op` on `(i1, i2)` and, when it holds, returns the endpoints of the
/// produced interval.
pub fn inclusive_match(op: InclusiveOp, i1: &Interval, i2: &Interval) -> Option<MatchWindow> {
    let (s1, e1, s2, e2) = (i1.start(), i1.end(), i2.start(), i2.end());
    let window = |start, end| Some(MatchWindow { start, end });
    match op {
        InclusiveOp::Before if e1 < s2 => window(s1, e2),
        InclusiveOp::Meet if e1 == s2 => window(s1, e2),
        InclusiveOp::During if s2 <= s1 && e1 <= e2 => window(s2, e2),
        InclusiveOp::Coincide if s1 == s2 && e1 == e2 => window(s1, e1),
        InclusiveOp::Start if s1 == s2 => window(s1, e1.max(e2)),
        InclusiveOp::Finish if e1 == e2 => window(s1.min(s2), e1),
        InclusiveOp::Overlap if s1 < e2 && s2 < e1 => window(s1.min(s2), e1.max(e2)),
        InclusiveOp::Slice if s1 < e2 && s2 < e1 => window(s1.max(s2), e1.min(e2)),
        _ => None,
    }
}

/// Tests `op` between the included interval `i1` and a candidate excluder
/// `i2`.
pub fn exclusive_match(op: ExclusiveOp, i1: &Interval, i2: &Interval) -> bool {
    let (s1, e1, s2, e2) = (i1.start(), i1.end(), i2.start(), i2.end());
    match op {
        ExclusiveOp::After => s1 > e2,
        ExclusiveOp::Follow => e2 == s1,
        ExclusiveOp::Contain => s1 <= s2 && e2 <= e1,
    }
}

/// Every interval `rule` can produce from pairs in `pool`. The result is not
/// unioned with `pool`.
pub fn apply_inclusive(rule: &InclusiveRule, pool: &Pool, mode: &ArithMode) -> Pool {
    let store = Store::from_pool(pool);
    index::inclusive_candidates(&store, rule, mode, store.len(), 0)
        .into_iter()
        .map(|c| c.interval)
        .collect()
}

/// Every interval `rule` can produce from `pool`: an included interval for
/// which no excluder satisfying the clock and map predicates exists.
pub fn apply_exclusive(rule: &ExclusiveRule, pool: &Pool, mode: &ArithMode) -> Pool {
    let store = Store::from_pool(pool);
    index::exclusive_candidates(&store, rule, mode, store.len())
        .into_iter()
        .map(|c| c.interval)
        .collect()
}

/// Applies either kind of rule.
pub fn apply_rule(rule: &Rule, pool: &Pool, mode: &ArithMode) -> Pool {
    match rule {
        Rule::Inclusive(r) => apply_inclusive(r, pool, mode),
        Rule::Exclusive(r) => apply_exclusive(r, pool, mode),
    }
}

/// Keeps the intervals of `new_pool` that are minimal in their timestamps.
///
/// An interval `(id, s, e, m)` survives iff
/// 1. no interval of `pool` with the same label lies within `[s, e]`,
/// 2. no other interval of `new_pool` with the same label lies strictly
///    within `[s, e]`, and
/// 3. no interval of `new_pool` with the same label and timestamps carries a
///    smaller map.
pub fn minimality(new_pool: &Pool, pool: &Pool) -> Pool {
    let existing = Store::from_pool(pool);
    let candidates: Vec<&Interval> = new_pool.iter().collect();
    let keep = index::minimal_mask(&candidates, |iv| existing.has_within(iv.id(), iv.start(), iv.end(), existing.len()));
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(iv, k)| k.then(|| iv.clone()))
        .collect()
}
