//! Witness trees: derivations of a pool interval down to trace events.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::analysis::Spec;
use crate::expr::{apply_predicate, apply_update, ArithMode};
use crate::model::{Interval, Pool, ValueMap};
use crate::rule::{exclusive_match, inclusive_match, Rule};
use crate::trace_io::interval_json;

/// A derivation of `root`. Leaves carry no rule and must be initial
/// intervals. An inclusive node has two children (left and right operand);
/// an exclusive node has one (the included interval). Subtrees may be shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessTree {
    root: Interval,
    rule: Option<usize>,
    children: Vec<Arc<WitnessTree>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("leaf {0:?} is not an initial interval")]
    NotInitial(Interval),
    #[error("rule {rule} does not exist")]
    NoSuchRule { rule: usize },
    #[error("node {root:?} has {found} children, rule {rule} needs {expected}")]
    Arity { root: Interval, rule: usize, expected: usize, found: usize },
    #[error("rule {rule} applied to the children of {root:?} does not produce it")]
    ReplayMismatch { root: Interval, rule: usize },
    #[error("rule {rule} is blocked for {root:?} by {excluder:?}")]
    Excluded { root: Interval, rule: usize, excluder: Interval },
    #[error("{0:?} repeats along a path")]
    Repeated(Interval),
}

impl WitnessTree {
    pub fn leaf(root: Interval) -> Self {
        WitnessTree { root, rule: None, children: Vec::new() }
    }

    pub fn node(root: Interval, rule: usize, children: Vec<Arc<WitnessTree>>) -> Self {
        WitnessTree { root, rule: Some(rule), children }
    }

    pub fn root(&self) -> &Interval {
        &self.root
    }

    /// Index of the producing rule in the specification, or `None` for a leaf.
    pub fn rule(&self) -> Option<usize> {
        self.rule
    }

    pub fn children(&self) -> &[Arc<WitnessTree>] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.rule.is_none()
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        fn go(t: &WitnessTree, memo: &mut HashMap<*const WitnessTree, usize>) -> usize {
            let key = t as *const WitnessTree;
            if let Some(&h) = memo.get(&key) {
                return h;
            }
            let h = t.children.iter().map(|c| go(c, memo) + 1).max().unwrap_or(0);
            memo.insert(key, h);
            h
        }
        go(self, &mut HashMap::new())
    }

    /// Distinct intervals appearing anywhere in the tree.
    pub fn intervals(&self) -> HashSet<&Interval> {
        let mut out = HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if out.insert(&t.root) {
                stack.extend(t.children.iter().map(|c| &**c));
            }
        }
        out
    }

    /// Replays the derivation: every leaf is in `initial`, every internal
    /// node's rule reproduces its root from its children, no exclusive node
    /// has an excluder in `pool`, and no interval repeats along a path.
    pub fn verify(&self, spec: &Spec, mode: &ArithMode, initial: &Pool, pool: &Pool) -> Result<(), WitnessError> {
        let mut below: HashMap<*const WitnessTree, Arc<HashSet<Interval>>> = HashMap::new();
        self.check(spec, mode, initial, pool, &mut below).map(|_| ())
    }

    /// Returns the intervals strictly below this node.
    fn check(
        &self,
        spec: &Spec,
        mode: &ArithMode,
        initial: &Pool,
        pool: &Pool,
        below: &mut HashMap<*const WitnessTree, Arc<HashSet<Interval>>>,
    ) -> Result<Arc<HashSet<Interval>>, WitnessError> {
        let key = self as *const WitnessTree;
        if let Some(done) = below.get(&key) {
            return Ok(done.clone());
        }
        let mut under = HashSet::new();
        for child in &self.children {
            under.extend(child.check(spec, mode, initial, pool, below)?.iter().cloned());
            under.insert(child.root.clone());
        }
        if under.contains(&self.root) {
            return Err(WitnessError::Repeated(self.root.clone()));
        }
        self.replay(spec, mode, initial, pool)?;
        let under = Arc::new(under);
        below.insert(key, under.clone());
        Ok(under)
    }

    fn replay(&self, spec: &Spec, mode: &ArithMode, initial: &Pool, pool: &Pool) -> Result<(), WitnessError> {
        let Some(rule) = self.rule else {
            return if initial.contains(&self.root) { Ok(()) } else { Err(WitnessError::NotInitial(self.root.clone())) };
        };
        let mismatch = || WitnessError::ReplayMismatch { root: self.root.clone(), rule };
        let arity = |expected| WitnessError::Arity { root: self.root.clone(), rule, expected, found: self.children.len() };
        match spec.rules.get(rule).ok_or(WitnessError::NoSuchRule { rule })? {
            Rule::Inclusive(r) => {
                let [left, right] = &self.children[..] else {
                    return Err(arity(2));
                };
                let (i1, i2) = (&left.root, &right.root);
                if i1.id() != &r.left || i2.id() != &r.right {
                    return Err(mismatch());
                }
                let w = inclusive_match(r.op, i1, i2).ok_or_else(mismatch)?;
                if !apply_predicate(&r.phi, i1.map(), i2.map(), mode) {
                    return Err(mismatch());
                }
                let map = apply_update(&r.psi, i1.map(), i2.map(), mode).map_err(|_| mismatch())?;
                let produced = Interval::new(r.lhs.clone(), w.start, w.end, map).map_err(|_| mismatch())?;
                if produced != self.root {
                    return Err(mismatch());
                }
            }
            Rule::Exclusive(r) => {
                let [included] = &self.children[..] else {
                    return Err(arity(1));
                };
                let i1 = &included.root;
                if i1.id() != &r.included {
                    return Err(mismatch());
                }
                if let Some(excluder) = pool
                    .labeled(&r.excluded)
                    .find(|i2| exclusive_match(r.op, i1, i2) && apply_predicate(&r.phi, i1.map(), i2.map(), mode))
                {
                    return Err(WitnessError::Excluded { root: self.root.clone(), rule, excluder: excluder.clone() });
                }
                let map = apply_update(&r.psi, i1.map(), &ValueMap::new(), mode).map_err(|_| mismatch())?;
                let produced = Interval::new(r.lhs.clone(), i1.start(), i1.end(), map).map_err(|_| mismatch())?;
                if produced != self.root {
                    return Err(mismatch());
                }
            }
        }
        Ok(())
    }

    /// Nested JSON: each node has `interval`, `rule` (index or null), the rule
    /// text when present, and `children`.
    pub fn to_json(&self, spec: &Spec) -> Json {
        let mut node = serde_json::Map::new();
        node.insert("interval".into(), interval_json(&self.root));
        node.insert("rule".into(), self.rule.map_or(Json::Null, |r| json!(r)));
        if let Some(r) = self.rule.and_then(|r| spec.rules.get(r)) {
            node.insert("text".into(), json!(r.to_string()));
        }
        node.insert("children".into(), Json::Array(self.children.iter().map(|c| c.to_json(spec)).collect()));
        Json::Object(node)
    }
}
