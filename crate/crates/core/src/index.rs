//! Arena-backed interval store with per-label timestamp indexes, and the join
//! loops shared by the single-rule functions and the engine.
//!
//! Arena positions double as insertion time. A rule application only sees
//! positions below its `limit`; positions at or above `seen` are the ones
//! added since the rule last ran.

use std::collections::{BTreeMap, HashMap};

use crate::expr::{apply_predicate, apply_update, ArithMode};
use crate::model::{Identifier, Interval, Pool, Time, ValueMap};
use crate::rule::{exclusive_match, inclusive_match, ExclusiveOp, ExclusiveRule, InclusiveOp, InclusiveRule};

type Key = (Time, Time);

#[derive(Default, Debug, Clone)]
pub(crate) struct Slot {
    /// Positions in insertion order.
    members: Vec<usize>,
    by_start: BTreeMap<Key, Vec<usize>>,
    /// Keyed by `(end, start)`.
    by_end: BTreeMap<Key, Vec<usize>>,
}

impl Slot {
    fn insert(&mut self, pos: usize, iv: &Interval) {
        self.members.push(pos);
        self.by_start.entry((iv.start(), iv.end())).or_default().push(pos);
        self.by_end.entry((iv.end(), iv.start())).or_default().push(pos);
    }

    /// Members at positions in `[from, to)`.
    fn members_between(&self, from: usize, to: usize) -> &[usize] {
        let lo = self.members.partition_point(|&p| p < from);
        let hi = self.members.partition_point(|&p| p < to);
        &self.members[lo..hi]
    }

    fn starts_in(&self, lo: Time, hi: Time) -> impl Iterator<Item = (Key, usize)> + '_ {
        let range = if lo > hi { None } else { Some(self.by_start.range((lo, 0)..=(hi, Time::MAX))) };
        range.into_iter().flatten().flat_map(|(k, v)| v.iter().map(move |&p| (*k, p)))
    }

    /// Yields `((end, start), pos)`.
    fn ends_in(&self, lo: Time, hi: Time) -> impl Iterator<Item = (Key, usize)> + '_ {
        let range = if lo > hi { None } else { Some(self.by_end.range((lo, 0)..=(hi, Time::MAX))) };
        range.into_iter().flatten().flat_map(|(k, v)| v.iter().map(move |&p| (*k, p)))
    }
}

#[derive(Default, Debug, Clone)]
pub(crate) struct Store {
    arena: Vec<Interval>,
    lookup: HashMap<Interval, usize>,
    slots: HashMap<Identifier, Slot>,
}

impl Store {
    pub(crate) fn from_pool(pool: &Pool) -> Self {
        let mut store = Store::default();
        for iv in pool {
            store.insert(iv.clone());
        }
        store
    }

    pub(crate) fn len(&self) -> usize {
        self.arena.len()
    }

    pub(crate) fn get(&self, pos: usize) -> &Interval {
        &self.arena[pos]
    }

    pub(crate) fn position(&self, iv: &Interval) -> Option<usize> {
        self.lookup.get(iv).copied()
    }

    pub(crate) fn intervals(&self) -> &[Interval] {
        &self.arena
    }

    /// Adds an interval; returns its position, or `None` if already present.
    pub(crate) fn insert(&mut self, iv: Interval) -> Option<usize> {
        if self.lookup.contains_key(&iv) {
            return None;
        }
        let pos = self.arena.len();
        self.slots.entry(iv.id().clone()).or_default().insert(pos, &iv);
        self.lookup.insert(iv.clone(), pos);
        self.arena.push(iv);
        Some(pos)
    }

    pub(crate) fn has_label(&self, id: &Identifier) -> bool {
        self.slots.get(id).is_some_and(|s| !s.members.is_empty())
    }

    /// True if some interval labeled `id` at a position below `limit` lies
    /// within `[s, e]`.
    pub(crate) fn has_within(&self, id: &Identifier, s: Time, e: Time, limit: usize) -> bool {
        let Some(slot) = self.slots.get(id) else {
            return false;
        };
        slot.starts_in(s, e).any(|((_, e1), p)| e1 <= e && p < limit)
    }

    fn slot(&self, id: &Identifier) -> Option<&Slot> {
        self.slots.get(id)
    }
}

/// How a candidate was derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Parents {
    Pair(usize, usize),
    Single(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub(crate) interval: Interval,
    pub(crate) parents: Parents,
}

/// Candidate partners `i2` for a given left operand under `op`.
fn right_partners<'a>(op: InclusiveOp, i1: &Interval, slot: &'a Slot) -> Box<dyn Iterator<Item = usize> + 'a> {
    let (s1, e1) = (i1.start(), i1.end());
    match op {
        InclusiveOp::Before => match e1.checked_add(1) {
            Some(lo) => Box::new(slot.starts_in(lo, Time::MAX).map(|(_, p)| p)),
            None => Box::new(std::iter::empty()),
        },
        InclusiveOp::Meet => Box::new(slot.starts_in(e1, e1).map(|(_, p)| p)),
        InclusiveOp::During => Box::new(slot.ends_in(e1, Time::MAX).filter(move |&((_, s2), _)| s2 <= s1).map(|(_, p)| p)),
        InclusiveOp::Coincide => Box::new(slot.by_start.get(&(s1, e1)).into_iter().flatten().copied()),
        InclusiveOp::Start => Box::new(slot.starts_in(s1, s1).map(|(_, p)| p)),
        InclusiveOp::Finish => Box::new(slot.ends_in(e1, e1).map(|(_, p)| p)),
        InclusiveOp::Overlap | InclusiveOp::Slice => match e1.checked_sub(1) {
            Some(hi) => Box::new(slot.starts_in(0, hi).filter(move |&((_, e2), _)| e2 > s1).map(|(_, p)| p)),
            None => Box::new(std::iter::empty()),
        },
    }
}

/// Candidate partners `i1` for a given right operand under `op`.
fn left_partners<'a>(op: InclusiveOp, i2: &Interval, slot: &'a Slot) -> Box<dyn Iterator<Item = usize> + 'a> {
    let (s2, e2) = (i2.start(), i2.end());
    match op {
        InclusiveOp::Before => match s2.checked_sub(1) {
            Some(hi) => Box::new(slot.ends_in(0, hi).map(|(_, p)| p)),
            None => Box::new(std::iter::empty()),
        },
        InclusiveOp::Meet => Box::new(slot.ends_in(s2, s2).map(|(_, p)| p)),
        InclusiveOp::During => Box::new(slot.starts_in(s2, e2).filter(move |&((_, e1), _)| e1 <= e2).map(|(_, p)| p)),
        InclusiveOp::Coincide => Box::new(slot.by_start.get(&(s2, e2)).into_iter().flatten().copied()),
        InclusiveOp::Start => Box::new(slot.starts_in(s2, s2).map(|(_, p)| p)),
        InclusiveOp::Finish => Box::new(slot.ends_in(e2, e2).map(|(_, p)| p)),
        InclusiveOp::Overlap | InclusiveOp::Slice => match e2.checked_sub(1) {
            Some(hi) => Box::new(slot.starts_in(0, hi).filter(move |&((_, e1), _)| e1 > s2).map(|(_, p)| p)),
            None => Box::new(std::iter::empty()),
        },
    }
}

/// Candidate excluders for an included interval under `op`.
fn excluders<'a>(op: ExclusiveOp, i1: &Interval, slot: &'a Slot) -> Box<dyn Iterator<Item = usize> + 'a> {
    let (s1, e1) = (i1.start(), i1.end());
    match op {
        ExclusiveOp::After => match s1.checked_sub(1) {
            Some(hi) => Box::new(slot.ends_in(0, hi).map(|(_, p)| p)),
            None => Box::new(std::iter::empty()),
        },
        ExclusiveOp::Follow => Box::new(slot.ends_in(s1, s1).map(|(_, p)| p)),
        ExclusiveOp::Contain => Box::new(slot.starts_in(s1, e1).filter(move |&((_, e2), _)| e2 <= e1).map(|(_, p)| p)),
    }
}

fn try_pair(store: &Store, rule: &InclusiveRule, mode: &ArithMode, p1: usize, p2: usize, out: &mut Vec<Candidate>) {
    let (i1, i2) = (store.get(p1), store.get(p2));
    let Some(w) = inclusive_match(rule.op, i1, i2) else {
        return;
    };
    if !apply_predicate(&rule.phi, i1.map(), i2.map(), mode) {
        return;
    }
    let Ok(map) = apply_update(&rule.psi, i1.map(), i2.map(), mode) else {
        return;
    };
    let interval = Interval::new(rule.lhs.clone(), w.start, w.end, map).expect("clock predicates yield ordered windows");
    out.push(Candidate { interval, parents: Parents::Pair(p1, p2) });
}

/// All productions of an inclusive rule over positions `< limit` that use at
/// least one operand at a position `>= seen`. Duplicates are merged, keeping
/// the smallest parent pair; output is in canonical interval order.
pub(crate) fn inclusive_candidates(store: &Store, rule: &InclusiveRule, mode: &ArithMode, limit: usize, seen: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    let (Some(left), Some(right)) = (store.slot(&rule.left), store.slot(&rule.right)) else {
        return out;
    };
    // New left operands against every right operand.
    for &p1 in left.members_between(seen, limit) {
        for p2 in right_partners(rule.op, store.get(p1), right) {
            if p2 < limit {
                try_pair(store, rule, mode, p1, p2, &mut out);
            }
        }
    }
    // Old left operands against new right operands.
    if seen > 0 {
        for &p2 in right.members_between(seen, limit) {
            for p1 in left_partners(rule.op, store.get(p2), left) {
                if p1 < seen {
                    try_pair(store, rule, mode, p1, p2, &mut out);
                }
            }
        }
    }
    canonicalize(out)
}

/// All productions of an exclusive rule over positions `< limit`.
pub(crate) fn exclusive_candidates(store: &Store, rule: &ExclusiveRule, mode: &ArithMode, limit: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    let Some(included) = store.slot(&rule.included) else {
        return out;
    };
    let empty = ValueMap::new();
    let excluded = store.slot(&rule.excluded);
    for &p1 in included.members_between(0, limit) {
        let i1 = store.get(p1);
        let blocked = excluded.is_some_and(|slot| {
            excluders(rule.op, i1, slot).any(|p2| {
                let i2 = store.get(p2);
                p2 < limit && exclusive_match(rule.op, i1, i2) && apply_predicate(&rule.phi, i1.map(), i2.map(), mode)
            })
        });
        if blocked {
            continue;
        }
        let Ok(map) = apply_update(&rule.psi, i1.map(), &empty, mode) else {
            continue;
        };
        let interval = Interval::new(rule.lhs.clone(), i1.start(), i1.end(), map).expect("copied from a valid interval");
        out.push(Candidate { interval, parents: Parents::Single(p1) });
    }
    canonicalize(out)
}

fn canonicalize(mut out: Vec<Candidate>) -> Vec<Candidate> {
    out.sort_by(|a, b| a.interval.cmp(&b.interval).then_with(|| a.parents.cmp(&b.parents)));
    out.dedup_by(|later, earlier| later.interval == earlier.interval);
    out
}

/// Minimality selection over `candidates`. `subsumes_existing(iv)` must
/// report whether some already-present interval with the same label lies
/// within `iv`'s timestamps. Returns a keep-mask aligned with `candidates`,
/// which must be free of duplicates.
pub(crate) fn minimal_mask<I: std::borrow::Borrow<Interval>>(candidates: &[I], subsumes_existing: impl Fn(&Interval) -> bool) -> Vec<bool> {
    // Per label: timestamps -> indices of candidates with those timestamps.
    let mut groups: HashMap<&Identifier, BTreeMap<Key, Vec<usize>>> = HashMap::new();
    for (n, c) in candidates.iter().enumerate() {
        let iv = c.borrow();
        groups.entry(iv.id()).or_default().entry((iv.start(), iv.end())).or_default().push(n);
    }
    let mut keep = vec![false; candidates.len()];
    for spans in groups.values() {
        for (&(s, e), members) in spans {
            // Another candidate strictly inside [s, e].
            let nested = spans.range((s, 0)..=(e, Time::MAX)).any(|(&(s2, e2), _)| e2 <= e && (s2, e2) != (s, e));
            if nested {
                continue;
            }
            let least = members
                .iter()
                .copied()
                .min_by(|&a, &b| candidates[a].borrow().map().cmp(candidates[b].borrow().map()))
                .expect("groups are nonempty");
            if !subsumes_existing(candidates[least].borrow()) {
                keep[least] = true;
            }
        }
    }
    keep
}
