//! Base data: identifiers, values, maps, events, intervals, pools and traces.

use std::cmp::Ordering;
use std::collections::{btree_map, btree_set, BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::ModelError;

/// Timestamp in abstract ticks.
pub type Time = u64;

/// A name for events, intervals and map keys.
///
/// Identifiers compare and hash by name. The name is shared, so cloning is
/// cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identifier(Arc<str>);

impl Identifier {
    /// Creates an identifier. The name must be nonempty and contain no
    /// whitespace.
    pub fn new(name: impl AsRef<str>) -> Result<Self, ModelError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(ModelError::EmptyIdentifier);
        }
        if name.chars().any(char::is_whitespace) {
            return Err(ModelError::WhitespaceInIdentifier(name.to_string()));
        }
        Ok(Identifier(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Identifier {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identifier::new(s)
    }
}

/// A map datum: an arbitrary-precision natural number or a Boolean.
///
/// The derived order puts every `Bool` before every `Nat`, `false` before
/// `true`, and naturals by magnitude.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Nat(BigUint),
}

impl Value {
    pub fn nat(n: impl Into<BigUint>) -> Self {
        Value::Nat(n.into())
    }

    pub fn as_nat(&self) -> Option<&BigUint> {
        match self {
            Value::Nat(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Nat(_) => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nat(n) => write!(f, "{n}"),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Nat(BigUint::from(n))
    }
}

impl From<BigUint> for Value {
    fn from(n: BigUint) -> Self {
        Value::Nat(n)
    }
}

/// A finite partial map from identifiers to values, iterated in key order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ValueMap(BTreeMap<Identifier, Value>);

impl ValueMap {
    pub fn new() -> Self {
        ValueMap(BTreeMap::new())
    }

    pub fn get(&self, key: &Identifier) -> Option<&Value> {
        self.0.get(key)
    }

    /// Inserts or replaces a binding, returning the previous value.
    pub fn insert(&mut self, key: Identifier, value: Value) -> Option<Value> {
        self.0.insert(key, value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Identifier, Value> {
        self.0.iter()
    }

    pub fn values_mut(&mut self) -> btree_map::ValuesMut<'_, Identifier, Value> {
        self.0.values_mut()
    }
}

impl FromIterator<(Identifier, Value)> for ValueMap {
    fn from_iter<T: IntoIterator<Item = (Identifier, Value)>>(iter: T) -> Self {
        ValueMap(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ValueMap {
    type Item = (&'a Identifier, &'a Value);
    type IntoIter = btree_map::Iter<'a, Identifier, Value>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Ord for ValueMap {
    fn cmp(&self, other: &Self) -> Ordering {
        map_order(self, other)
    }
}

impl PartialOrd for ValueMap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ValueMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

/// Fixed total order on maps used to break ties between otherwise identical
/// intervals.
///
/// Entries are compared pairwise in key order: first the key names, then the
/// values (`Bool` before `Nat`, `false` before `true`, naturals by magnitude).
/// A map whose entries form a strict prefix of the other's is smaller.
pub fn map_order(a: &ValueMap, b: &ValueMap) -> Ordering {
    let mut left = a.0.iter();
    let mut right = b.0.iter();
    loop {
        match (left.next(), right.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ka, va)), Some((kb, vb))) => {
                let ord = ka.as_str().cmp(kb.as_str()).then_with(|| va.cmp(vb));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

/// A timestamped observation `(id, time, map)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub id: Identifier,
    pub time: Time,
    pub map: ValueMap,
}

impl Event {
    pub fn new(id: Identifier, time: Time, map: ValueMap) -> Self {
        Event { id, time, map }
    }
}

/// A named span `[start, end]` carrying a data map. `start <= end` always
/// holds.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    start: Time,
    end: Time,
    id: Identifier,
    map: ValueMap,
}

impl Interval {
    pub fn new(id: Identifier, start: Time, end: Time, map: ValueMap) -> Result<Self, ModelError> {
        if start > end {
            return Err(ModelError::InvertedInterval { start, end });
        }
        Ok(Interval { start, end, id, map })
    }

    /// Zero-duration interval for an event.
    pub fn from_event(event: &Event) -> Self {
        Interval {
            start: event.time,
            end: event.time,
            id: event.id.clone(),
            map: event.map.clone(),
        }
    }

    pub fn id(&self) -> &Identifier {
        &self.id
    }

    pub fn start(&self) -> Time {
        self.start
    }

    pub fn end(&self) -> Time {
        self.end
    }

    pub fn map(&self) -> &ValueMap {
        &self.map
    }

    pub(crate) fn map_mut(&mut self) -> &mut ValueMap {
        &mut self.map
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {:?})", self.id, self.start, self.end, self.map)
    }
}

// Canonical enumeration order: (start, end, id name, map order).
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.start
            .cmp(&other.start)
            .then_with(|| self.end.cmp(&other.end))
            .then_with(|| self.id.as_str().cmp(other.id.as_str()))
            .then_with(|| map_order(&self.map, &other.map))
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A set of intervals, enumerated in canonical order.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Pool(BTreeSet<Interval>);

impl Pool {
    pub fn new() -> Self {
        Pool(BTreeSet::new())
    }

    /// Adds an interval; returns false if it was already present.
    pub fn insert(&mut self, interval: Interval) -> bool {
        self.0.insert(interval)
    }

    pub fn contains(&self, interval: &Interval) -> bool {
        self.0.contains(interval)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Interval> {
        self.0.iter()
    }

    /// Intervals labeled `id`, in canonical order.
    pub fn labeled<'a>(&'a self, id: &'a Identifier) -> impl Iterator<Item = &'a Interval> + 'a {
        self.0.iter().filter(move |i| i.id() == id)
    }

    pub fn extend_from(&mut self, other: &Pool) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn is_subset(&self, other: &Pool) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<Interval> for Pool {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        Pool(iter.into_iter().collect())
    }
}

impl Extend<Interval> for Pool {
    fn extend<T: IntoIterator<Item = Interval>>(&mut self, iter: T) {
        self.0.extend(iter)
    }
}

impl IntoIterator for Pool {
    type Item = Interval;
    type IntoIter = btree_set::IntoIter<Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Pool {
    type Item = &'a Interval;
    type IntoIter = btree_set::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// An ordered sequence of events. Timestamps need not be monotone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn new(events: Vec<Event>) -> Self {
        Trace { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

impl FromIterator<Event> for Trace {
    fn from_iter<T: IntoIterator<Item = Event>>(iter: T) -> Self {
        Trace { events: iter.into_iter().collect() }
    }
}

/// Converts a trace into its pool of zero-duration intervals.
pub fn init(trace: &Trace) -> Pool {
    trace.events.iter().map(Interval::from_event).collect()
}

/// Shorthand for building identifiers in tests and examples.
///
/// # Panics
///
/// Panics if `name` is not a valid identifier.
pub fn ident(name: &str) -> Identifier {
    Identifier::new(name).expect("invalid identifier")
}

/// Builds a map from `(key, value)` pairs.
///
/// # Panics
///
/// Panics if a key is not a valid identifier.
pub fn map_of<V: Into<Value>>(entries: impl IntoIterator<Item = (&'static str, V)>) -> ValueMap {
    entries.into_iter().map(|(k, v)| (ident(k), v.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nat_map(pairs: &[(&'static str, u64)]) -> ValueMap {
        map_of(pairs.iter().copied())
    }

    #[test]
    fn identifier_rules() {
        assert!(Identifier::new("").is_err());
        assert!(Identifier::new("a b").is_err());
        assert_eq!(ident("x"), ident("x"));
        assert_ne!(ident("x"), ident("y"));
    }

    #[test]
    fn interval_requires_ordered_endpoints() {
        assert!(Interval::new(ident("A"), 3, 2, ValueMap::new()).is_err());
        assert!(Interval::new(ident("A"), 2, 2, ValueMap::new()).is_ok());
    }

    #[test]
    fn init_empty_trace() {
        assert!(init(&Trace::default()).is_empty());
    }

    #[test]
    fn init_single_event() {
        let trace = Trace::new(vec![Event::new(ident("e0"), 0, nat_map(&[("d", 2)]))]);
        let pool = init(&trace);
        let expected = Interval::new(ident("e0"), 0, 0, nat_map(&[("d", 2)])).unwrap();
        assert_eq!(pool.len(), 1);
        assert!(pool.contains(&expected));
    }

    #[test]
    fn init_deduplicates() {
        let e = Event::new(ident("a"), 3, ValueMap::new());
        let pool = init(&Trace::new(vec![e.clone(), e]));
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.iter().next().unwrap().start(), 3);
    }

    #[test]
    fn map_order_examples() {
        assert_eq!(map_order(&ValueMap::new(), &ValueMap::new()), Ordering::Equal);
        assert_eq!(map_order(&nat_map(&[("d", 2)]), &nat_map(&[("d", 4)])), Ordering::Less);
        assert_eq!(map_order(&ValueMap::new(), &nat_map(&[("d", 0)])), Ordering::Less);
        let b = map_of([("d", true)]);
        assert_eq!(map_order(&b, &nat_map(&[("d", 0)])), Ordering::Less);
        assert_eq!(map_order(&map_of([("d", false)]), &b), Ordering::Less);
    }

    #[test]
    fn canonical_pool_order() {
        let mk = |id: &str, s, e| Interval::new(ident(id), s, e, ValueMap::new()).unwrap();
        let pool: Pool = vec![mk("B", 1, 4), mk("A", 1, 4), mk("Z", 0, 9), mk("A", 1, 2)]
            .into_iter()
            .collect();
        let order: Vec<_> = pool.iter().map(|i| (i.id().to_string(), i.start(), i.end())).collect();
        assert_eq!(
            order,
            vec![
                ("Z".to_string(), 0, 9),
                ("A".to_string(), 1, 2),
                ("A".to_string(), 1, 4),
                ("B".to_string(), 1, 4)
            ]
        );
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![any::<bool>().prop_map(Value::Bool), (0u64..4).prop_map(Value::from)]
    }

    fn arb_map() -> impl Strategy<Value = ValueMap> {
        prop::collection::btree_map(prop::sample::select(vec!["a", "b", "c"]), arb_value(), 0..3)
            .prop_map(|m| m.into_iter().map(|(k, v)| (ident(k), v)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn map_order_is_antisymmetric(a in arb_map(), b in arb_map()) {
            let ab = map_order(&a, &b);
            prop_assert_eq!(ab, map_order(&b, &a).reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
        }

        #[test]
        fn map_order_is_transitive(a in arb_map(), b in arb_map(), c in arb_map()) {
            if map_order(&a, &b) != Ordering::Greater && map_order(&b, &c) != Ordering::Greater {
                prop_assert_ne!(map_order(&a, &c), Ordering::Greater);
            }
        }

        #[test]
        fn init_is_zero_duration_and_no_larger(
            events in prop::collection::vec((0u64..5, arb_map()), 0..8)
        ) {
            let trace: Trace = events
                .into_iter()
                .map(|(t, m)| Event::new(ident("e"), t, m))
                .collect();
            let pool = init(&trace);
            prop_assert!(pool.len() <= trace.len());
            prop_assert!(pool.iter().all(|i| i.start() == i.end()));
        }
    }
}
