//! Trace semantics: repeated rule application up to the fixed point.
//!
//! Cycle-free specifications are evaluated in a single pass over the rules
//! in topological order. Cyclic ones repeat full passes until a pass adds
//! nothing, the fuel runs out, or the requested target label appears.
//!
//! Each rule only joins pairs involving at least one interval added since it
//! last ran. With minimality on this still matches full recomputation: any
//! older candidate was either added or lost to a same-label interval that is
//! still in the pool, and that interval also lies within every candidate the
//! older one would have suppressed.

use std::collections::HashMap;
use std::sync::Arc;

use crate::analysis::{classify, validate, Spec};
use crate::error::EvalError;
use crate::expr::ArithMode;
use crate::index::{exclusive_candidates, inclusive_candidates, minimal_mask, Candidate, Parents, Store};
use crate::model::{init, Identifier, Interval, Pool, Trace};
use crate::rule::Rule;
use crate::witness::WitnessTree;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalConfig {
    pub mode: ArithMode,
    /// Filter each rule's additions through the minimality selection.
    pub minimal: bool,
    /// Maximum number of passes for cyclic specifications. Required when
    /// the run might not terminate: cyclic, unbounded data, no minimality.
    pub fuel: Option<u64>,
    /// Stop as soon as an interval with this label exists.
    pub early_exit_target: Option<Identifier>,
}

impl EvalConfig {
    pub fn with_mode(mut self, mode: ArithMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_minimal(mut self, minimal: bool) -> Self {
        self.minimal = minimal;
        self
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = Some(fuel);
        self
    }

    pub fn with_target(mut self, target: Identifier) -> Self {
        self.early_exit_target = Some(target);
        self
    }

    fn terminates(&self) -> bool {
        self.minimal || matches!(self.mode, ArithMode::Modulo(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// A pass added nothing, or the single topological pass completed.
    Saturated,
    FuelExhausted,
    /// Stopped early because the target label appeared.
    TargetFound,
}

/// How a pool interval was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Initial,
    Inclusive { rule: usize, left: Interval, right: Interval },
    /// `excluded` had no matching interval when the rule ran.
    Exclusive { rule: usize, included: Interval, excluded: Identifier },
}

#[derive(Clone, Copy, Debug)]
struct Origin {
    rule: usize,
    parents: Parents,
}

#[derive(Clone, Debug)]
pub struct EvalResult {
    pub pool: Pool,
    /// Number of passes over the rule list.
    pub iterations: u64,
    pub termination: Termination,
    /// Human-readable notes, such as trace values reduced into range.
    pub diagnostics: Vec<String>,
    spec: Spec,
    store: Store,
    origins: Vec<Option<Origin>>,
}

impl EvalResult {
    pub fn saturated(&self) -> bool {
        self.termination == Termination::Saturated
    }

    /// Intervals in the order they were added.
    pub fn insertion_order(&self) -> &[Interval] {
        self.store.intervals()
    }

    pub fn provenance(&self, interval: &Interval) -> Option<Provenance> {
        let pos = self.store.position(interval)?;
        Some(match self.origins[pos] {
            None => Provenance::Initial,
            Some(Origin { rule, parents: Parents::Pair(l, r) }) => Provenance::Inclusive {
                rule,
                left: self.store.get(l).clone(),
                right: self.store.get(r).clone(),
            },
            Some(Origin { rule, parents: Parents::Single(p) }) => {
                let Rule::Exclusive(r) = &self.spec.rules[rule] else {
                    unreachable!("single-parent origins come from exclusive rules")
                };
                Provenance::Exclusive { rule, included: self.store.get(p).clone(), excluded: r.excluded.clone() }
            }
        })
    }

    /// Unfolds the recorded provenance of `interval` into a witness tree.
    /// Parents always precede their children in insertion order, so paths
    /// never repeat an interval.
    pub fn extract_witness(&self, interval: &Interval) -> Result<WitnessTree, EvalError> {
        let pos = self.store.position(interval).ok_or_else(|| EvalError::NotInPool(format!("{interval:?}")))?;
        let mut memo = HashMap::new();
        Ok((*self.tree_at(pos, &mut memo)).clone())
    }

    /// Witness trees for every pool interval, sharing subtrees.
    pub fn all_witnesses(&self) -> Vec<Arc<WitnessTree>> {
        let mut memo = HashMap::new();
        (0..self.store.len()).map(|p| self.tree_at(p, &mut memo)).collect()
    }

    fn tree_at(&self, pos: usize, memo: &mut HashMap<usize, Arc<WitnessTree>>) -> Arc<WitnessTree> {
        // Iterative post-order so long chains do not exhaust the stack.
        let mut stack = vec![(pos, false)];
        while let Some((p, expanded)) = stack.pop() {
            if memo.contains_key(&p) {
                continue;
            }
            let parents: Vec<usize> = match self.origins[p] {
                None => Vec::new(),
                Some(Origin { parents: Parents::Pair(l, r), .. }) => vec![l, r],
                Some(Origin { parents: Parents::Single(i), .. }) => vec![i],
            };
            if !expanded {
                stack.push((p, true));
                stack.extend(parents.iter().filter(|q| !memo.contains_key(q)).map(|&q| (q, false)));
                continue;
            }
            let root = self.store.get(p).clone();
            let tree = match self.origins[p] {
                None => WitnessTree::leaf(root),
                Some(o) => WitnessTree::node(root, o.rule, parents.iter().map(|q| memo[q].clone()).collect()),
            };
            memo.insert(p, Arc::new(tree));
        }
        memo[&pos].clone()
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Found(WitnessTree),
    NotFound,
    Unknown,
}

impl Verdict {
    pub fn is_found(&self) -> bool {
        matches!(self, Verdict::Found(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Found(_) => "found",
            Verdict::NotFound => "not found",
            Verdict::Unknown => "unknown",
        }
    }
}

struct Run<'a> {
    spec: &'a Spec,
    config: &'a EvalConfig,
    store: Store,
    origins: Vec<Option<Origin>>,
    /// Store length when each rule last ran.
    seen: Vec<usize>,
}

impl<'a> Run<'a> {
    fn new(spec: &'a Spec, config: &'a EvalConfig, initial: Pool) -> Self {
        let store = Store::from_pool(&initial);
        let origins = vec![None; store.len()];
        Run { spec, config, store, origins, seen: vec![0; spec.len()] }
    }

    /// Applies rule `r` once; returns how many intervals it added.
    fn apply(&mut self, r: usize) -> usize {
        let limit = self.store.len();
        let candidates: Vec<Candidate> = match &self.spec.rules[r] {
            Rule::Inclusive(rule) => inclusive_candidates(&self.store, rule, &self.config.mode, limit, self.seen[r]),
            Rule::Exclusive(rule) => exclusive_candidates(&self.store, rule, &self.config.mode, limit),
        };
        self.seen[r] = limit;
        let keep = if self.config.minimal {
            let ivs: Vec<&Interval> = candidates.iter().map(|c| &c.interval).collect();
            minimal_mask(&ivs, |iv| self.store.has_within(iv.id(), iv.start(), iv.end(), limit))
        } else {
            vec![true; candidates.len()]
        };
        let mut added = 0;
        for (c, keep) in candidates.into_iter().zip(keep) {
            if keep && self.store.insert(c.interval).is_some() {
                self.origins.push(Some(Origin { rule: r, parents: c.parents }));
                added += 1;
            }
        }
        added
    }

    fn target_present(&self) -> bool {
        self.config.early_exit_target.as_ref().is_some_and(|t| self.store.has_label(t))
    }

    /// One pass over `order`; returns the number of additions, or `None` if
    /// it stopped early on the target.
    fn pass(&mut self, order: &[usize]) -> Option<usize> {
        let mut added = 0;
        for &r in order {
            added += self.apply(r);
            if self.target_present() {
                return None;
            }
        }
        Some(added)
    }

    fn finish(self, iterations: u64, termination: Termination, diagnostics: Vec<String>) -> EvalResult {
        EvalResult {
            pool: self.store.intervals().iter().cloned().collect(),
            iterations,
            termination,
            diagnostics,
            spec: self.spec.clone(),
            store: self.store,
            origins: self.origins,
        }
    }
}

/// One application of every rule in list order, each seeing the additions
/// of the rules before it. Assumes `spec` passes validation.
pub fn step(spec: &Spec, pool: &Pool, config: &EvalConfig) -> Pool {
    let mut run = Run::new(spec, config, pool.clone());
    for r in 0..spec.len() {
        run.apply(r);
    }
    run.store.intervals().iter().cloned().collect()
}

/// The initial pool for `trace` under `mode`, with a note when values had to
/// be reduced into range.
pub fn initial_pool(trace: &Trace, mode: &ArithMode) -> (Pool, Option<String>) {
    let mut changed = 0usize;
    let pool = init(trace)
        .into_iter()
        .map(|mut iv| {
            if mode.reduce_map(iv.map_mut()) {
                changed += 1;
            }
            iv
        })
        .collect();
    let note = (changed > 0).then(|| {
        let k = mode.bound().expect("only bounded modes reduce");
        format!("{changed} trace event(s) carried values of at least {k}; they were reduced modulo {k}")
    });
    (pool, note)
}

/// Evaluates `spec` on `trace` to its fixed point.
pub fn evaluate_trace(spec: &Spec, trace: &Trace, config: &EvalConfig) -> Result<EvalResult, EvalError> {
    validate(spec)?;
    let info = classify(spec);
    if info.topo_order.is_none() && config.fuel.is_none() && !config.terminates() {
        return Err(EvalError::FuelRequired);
    }
    let (initial, note) = initial_pool(trace, &config.mode);
    let diagnostics: Vec<String> = note.into_iter().collect();
    let mut run = Run::new(spec, config, initial);
    if run.target_present() {
        return Ok(run.finish(0, Termination::TargetFound, diagnostics));
    }
    if let Some(order) = &info.topo_order {
        let termination = match run.pass(order) {
            Some(_) => Termination::Saturated,
            None => Termination::TargetFound,
        };
        return Ok(run.finish(1, termination, diagnostics));
    }
    let order: Vec<usize> = (0..spec.len()).collect();
    let mut iterations = 0;
    loop {
        if config.fuel.is_some_and(|f| iterations >= f) {
            return Ok(run.finish(iterations, Termination::FuelExhausted, diagnostics));
        }
        iterations += 1;
        match run.pass(&order) {
            None => return Ok(run.finish(iterations, Termination::TargetFound, diagnostics)),
            Some(0) => return Ok(run.finish(iterations, Termination::Saturated, diagnostics)),
            Some(_) => {}
        }
    }
}

/// Is some interval labeled `target` in the fixed point?
pub fn decide(spec: &Spec, trace: &Trace, target: &Identifier, config: &EvalConfig) -> Result<Verdict, EvalError> {
    let config = config.clone().with_target(target.clone());
    let result = evaluate_trace(spec, trace, &config)?;
    let hit = result.insertion_order().iter().find(|iv| iv.id() == target);
    Ok(match (hit, result.termination) {
        (Some(iv), _) => Verdict::Found(result.extract_witness(iv)?),
        (None, Termination::FuelExhausted) => Verdict::Unknown,
        (None, _) => Verdict::NotFound,
    })
}
