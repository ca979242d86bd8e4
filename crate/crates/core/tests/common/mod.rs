//! Shared generators and an independent brute-force evaluator.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nfer::analysis::Spec;
use nfer::expr::{apply_predicate, apply_update, ArithMode, BinOp, Expr, MapPredicate, MapUpdate};
use nfer::model::{map_order, Event, Identifier, Interval, Trace, Value, ValueMap};
use nfer::reductions::{Counter, Instruction, MinskyProgram, Quantifier, Literal, Qbf, nth_primes};
use nfer::rule::{ExclusiveOp, InclusiveOp, Rule};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn id(name: &str) -> Identifier {
    Identifier::new(name).unwrap()
}

// ---------------------------------------------------------------------------
// Naive evaluator: direct transcription of the set definitions, no indexing,
// no incremental joins.

fn clock(op: InclusiveOp, i1: &Interval, i2: &Interval) -> Option<(u64, u64)> {
    let (s1, e1, s2, e2) = (i1.start(), i1.end(), i2.start(), i2.end());
    let holds = match op {
        InclusiveOp::Before => e1 < s2,
        InclusiveOp::Meet => e1 == s2,
        InclusiveOp::During => s2 <= s1 && e1 <= e2,
        InclusiveOp::Coincide => (s1, e1) == (s2, e2),
        InclusiveOp::Start => s1 == s2,
        InclusiveOp::Finish => e1 == e2,
        InclusiveOp::Overlap | InclusiveOp::Slice => s1 < e2 && s2 < e1,
    };
    let span = match op {
        InclusiveOp::Before | InclusiveOp::Meet => (s1, e2),
        InclusiveOp::During => (s2, e2),
        InclusiveOp::Coincide => (s1, e1),
        InclusiveOp::Start => (s1, std::cmp::max(e1, e2)),
        InclusiveOp::Finish => (std::cmp::min(s1, s2), e1),
        InclusiveOp::Overlap => (std::cmp::min(s1, s2), std::cmp::max(e1, e2)),
        InclusiveOp::Slice => (std::cmp::max(s1, s2), std::cmp::min(e1, e2)),
    };
    holds.then_some(span)
}

fn blocks(op: ExclusiveOp, i1: &Interval, i2: &Interval) -> bool {
    match op {
        ExclusiveOp::After => i2.end() < i1.start(),
        ExclusiveOp::Follow => i2.end() == i1.start(),
        ExclusiveOp::Contain => i1.start() <= i2.start() && i2.end() <= i1.end(),
    }
}

pub type NaivePool = BTreeSet<Interval>;

pub fn naive_init(trace: &Trace, mode: &ArithMode) -> NaivePool {
    trace
        .events
        .iter()
        .map(|ev| {
            let map: ValueMap = ev
                .map
                .iter()
                .map(|(k, v)| {
                    let v = match (v, mode) {
                        (Value::Nat(n), ArithMode::Modulo(m)) => Value::Nat(n % m),
                        _ => v.clone(),
                    };
                    (k.clone(), v)
                })
                .collect();
            Interval::new(ev.id.clone(), ev.time, ev.time, map).unwrap()
        })
        .collect()
}

pub fn naive_apply(rule: &Rule, pool: &NaivePool, mode: &ArithMode) -> NaivePool {
    let mut out = NaivePool::new();
    match rule {
        Rule::Inclusive(r) => {
            for i1 in pool.iter().filter(|i| i.id() == &r.left) {
                for i2 in pool.iter().filter(|i| i.id() == &r.right) {
                    let Some((s, e)) = clock(r.op, i1, i2) else { continue };
                    if !apply_predicate(&r.phi, i1.map(), i2.map(), mode) {
                        continue;
                    }
                    if let Ok(m) = apply_update(&r.psi, i1.map(), i2.map(), mode) {
                        out.insert(Interval::new(r.lhs.clone(), s, e, m).unwrap());
                    }
                }
            }
        }
        Rule::Exclusive(r) => {
            for i1 in pool.iter().filter(|i| i.id() == &r.included) {
                let blocked = pool
                    .iter()
                    .filter(|i| i.id() == &r.excluded)
                    .any(|i2| blocks(r.op, i1, i2) && apply_predicate(&r.phi, i1.map(), i2.map(), mode));
                if blocked {
                    continue;
                }
                if let Ok(m) = apply_update(&r.psi, i1.map(), &ValueMap::new(), mode) {
                    out.insert(Interval::new(r.lhs.clone(), i1.start(), i1.end(), m).unwrap());
                }
            }
        }
    }
    out
}

fn within(inner: &Interval, outer: &Interval) -> bool {
    inner.id() == outer.id() && outer.start() <= inner.start() && inner.end() <= outer.end()
}

pub fn naive_minimality(new: &NaivePool, pool: &NaivePool) -> NaivePool {
    new.iter()
        .filter(|i| {
            !pool.iter().any(|p| within(p, i))
                && !new.iter().any(|n| within(n, i) && (n.start(), n.end()) != (i.start(), i.end()))
                && !new.iter().any(|n| {
                    n.id() == i.id()
                        && (n.start(), n.end()) == (i.start(), i.end())
                        && map_order(n.map(), i.map()) == std::cmp::Ordering::Less
                })
        })
        .cloned()
        .collect()
}

pub fn naive_step(rules: &[Rule], pool: &NaivePool, mode: &ArithMode, minimal: bool) -> NaivePool {
    let mut pool = pool.clone();
    for rule in rules {
        let produced = naive_apply(rule, &pool, mode);
        let produced = if minimal { naive_minimality(&produced, &pool) } else { produced };
        pool.extend(produced);
    }
    pool
}

/// Smallest-index-first topological order by repeated scanning, or `None`
/// when the rules contain a cycle.
pub fn naive_topo_order(spec: &Spec) -> Option<Vec<usize>> {
    let n = spec.rules.len();
    let feeds = |i: usize, j: usize| spec.rules[j].rhs().contains(&spec.rules[i].lhs());
    let mut placed = vec![false; n];
    let mut order = Vec::new();
    while order.len() < n {
        let next = (0..n).find(|&j| !placed[j] && (0..n).all(|i| placed[i] || !feeds(i, j)))?;
        placed[next] = true;
        order.push(next);
    }
    Some(order)
}

pub fn naive_has_cycle(spec: &Spec) -> bool {
    naive_topo_order(spec).is_none()
}

/// The fixed point: one ordered pass when cycle-free, else iterate.
pub fn naive_eval(spec: &Spec, trace: &Trace, mode: &ArithMode, minimal: bool) -> NaivePool {
    let init = naive_init(trace, mode);
    if let Some(order) = naive_topo_order(spec) {
        let rules: Vec<Rule> = order.iter().map(|&i| spec.rules[i].clone()).collect();
        return naive_step(&rules, &init, mode, minimal);
    }
    let mut pool = init;
    loop {
        let next = naive_step(&spec.rules, &pool, mode, minimal);
        if next == pool {
            return pool;
        }
        pool = next;
    }
}

// ---------------------------------------------------------------------------
// Random instances.

const NAMES: [&str; 3] = ["A", "B", "C"];

fn leaf(rng: &mut StdRng, keys: &[&str], k: u64, right: bool) -> Expr {
    match rng.gen_range(0..6) {
        0 => Expr::nat(rng.gen_range(0..=k)),
        1 => Expr::Bool(rng.gen()),
        2 | 3 => Expr::left(id(keys.choose(rng).unwrap())),
        _ if right => Expr::right(id(keys.choose(rng).unwrap())),
        _ => Expr::left(id(keys.choose(rng).unwrap())),
    }
}

pub fn random_expr(rng: &mut StdRng, depth: u32, keys: &[&str], k: u64, right: bool) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, keys, k, right);
    }
    if rng.gen_bool(0.1) {
        return Expr::not(random_expr(rng, depth - 1, keys, k, right));
    }
    let op = *BinOp::ALL.choose(rng).unwrap();
    Expr::binary(op, random_expr(rng, depth - 1, keys, k, right), random_expr(rng, depth - 1, keys, k, right))
}

fn random_phi(rng: &mut StdRng, keys: &[&str], k: u64) -> MapPredicate {
    match rng.gen_range(0..4) {
        0 => MapPredicate::always(),
        1 => {
            let cmp = *[BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Gt].choose(rng).unwrap();
            MapPredicate::new(Expr::binary(cmp, random_expr(rng, 1, keys, k, true), random_expr(rng, 1, keys, k, true)))
        }
        _ => MapPredicate::new(random_expr(rng, 2, keys, k, true)),
    }
}

fn random_psi(rng: &mut StdRng, keys: &[&str], k: u64, right: bool) -> MapUpdate {
    let n = rng.gen_range(0..=keys.len());
    let mut chosen: Vec<&str> = keys.to_vec();
    chosen.shuffle(rng);
    MapUpdate::new(chosen[..n].iter().map(|key| (id(key), random_expr(rng, 2, keys, k, right))).collect())
}

pub fn random_rule(rng: &mut StdRng, names: &[&str], keys: &[&str], k: u64, exclusive: bool) -> Rule {
    let pick = |rng: &mut StdRng| id(names.choose(rng).unwrap());
    let (lhs, a, b) = (pick(rng), pick(rng), pick(rng));
    if exclusive {
        Rule::exclusive(lhs, a, *ExclusiveOp::ALL.choose(rng).unwrap(), b)
            .with_phi(random_phi(rng, keys, k))
            .with_psi(random_psi(rng, keys, k, false))
    } else {
        Rule::inclusive(lhs, a, *InclusiveOp::ALL.choose(rng).unwrap(), b)
            .with_phi(random_phi(rng, keys, k))
            .with_psi(random_psi(rng, keys, k, true))
    }
}

pub fn random_trace(rng: &mut StdRng, names: &[&str], keys: &[&str], len: usize, max_time: u64, max_value: u64) -> Trace {
    let events = (0..len)
        .map(|_| {
            let mut map = ValueMap::new();
            for key in keys {
                if rng.gen_bool(0.8) {
                    let v = if rng.gen_bool(0.15) { Value::Bool(rng.gen()) } else { Value::from(rng.gen_range(0..=max_value)) };
                    map.insert(id(key), v);
                }
            }
            Event::new(id(names.choose(rng).unwrap()), rng.gen_range(0..=max_time), map)
        })
        .collect();
    Trace { events }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: Spec,
    pub trace: Trace,
    pub mode: ArithMode,
    pub minimal: bool,
}

/// |τ| ≤ 3, |D| ≤ 3, endpoints ≤ 3, k ≤ 4, exclusive rules allowed, always
/// valid (specs with an exclusive rule on a cycle are resampled).
pub fn tiny_instance(rng: &mut StdRng) -> Instance {
    let k = rng.gen_range(1..=4u64);
    let keys = ["x", "y"];
    let spec = loop {
        let n = rng.gen_range(1..=3);
        let rules: Vec<Rule> = (0..n)
            .map(|_| {
                let exclusive = rng.gen_bool(0.3);
                random_rule(rng, &NAMES, &keys, k, exclusive)
            })
            .collect();
        let spec = Spec::new(rules);
        if !(spec.rules.iter().any(Rule::is_exclusive) && naive_has_cycle(&spec)) {
            break spec;
        }
    };
    let len = rng.gen_range(0..=3);
    let trace = random_trace(rng, &NAMES, &keys, len, 3, 6);
    Instance { spec, trace, mode: ArithMode::modulo(k).unwrap(), minimal: rng.gen_bool(0.5) }
}

/// Inclusive only, possibly cyclic: |τ| ≤ 50, |D| ≤ 10, k ≤ 16.
pub fn finite_instance(rng: &mut StdRng) -> Instance {
    let k = rng.gen_range(1..=16u64);
    let names = ["A", "B", "C", "D", "E"];
    let keys = ["x", "y"];
    let n = rng.gen_range(1..=10);
    let rules = (0..n).map(|_| random_rule(rng, &names, &keys, k, false)).collect();
    let len = rng.gen_range(0..=50);
    let trace = random_trace(rng, &names, &keys, len, 30, 40);
    Instance { spec: Spec::new(rules), trace, mode: ArithMode::modulo(k).unwrap(), minimal: true }
}

/// A random spec over four labels, inclusive and exclusive mixed, without
/// any validity filtering.
pub fn any_spec(rng: &mut StdRng) -> Spec {
    let names = ["A", "B", "C", "D"];
    let n = rng.gen_range(1..=5);
    Spec::new(
        (0..n)
            .map(|_| {
                let exclusive = rng.gen_bool(0.35);
                random_rule(rng, &names, &["x"], 3, exclusive)
            })
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Reduction inputs.

pub fn random_program(rng: &mut StdRng, max_lines: usize) -> MinskyProgram {
    let len = rng.gen_range(2..=max_lines);
    let counter = |rng: &mut StdRng| if rng.gen() { Counter::C0 } else { Counter::C1 };
    let mut lines: Vec<Instruction> = (0..len - 1)
        .map(|_| match rng.gen_range(0..3) {
            0 => Instruction::Inc(counter(rng)),
            1 => Instruction::Dec(counter(rng)),
            _ => Instruction::IfZero(counter(rng), rng.gen_range(0..len)),
        })
        .collect();
    lines.push(Instruction::Stop);
    MinskyProgram::new(lines).unwrap()
}

pub fn random_qbf(rng: &mut StdRng, max_vars: usize, max_clauses: usize) -> Qbf {
    let n = rng.gen_range(1..=max_vars);
    let primes = nth_primes(n);
    let quantifiers = (0..n).map(|_| if rng.gen() { Quantifier::Exists } else { Quantifier::Forall }).collect();
    let m = rng.gen_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| std::array::from_fn(|_| Literal { var: *primes.choose(rng).unwrap(), positive: rng.gen() }))
        .collect();
    Qbf::new(quantifiers, clauses).unwrap()
}

// ---------------------------------------------------------------------------
// Scaling workload: sessions bracketed by open/close events, alerts from pings
// inside a session, and bursts of alerts chained through a self-loop. The
// escalation rules feed back into sessions, so the spec is cyclic.

pub const SCALING_SPEC: &str = "\
Session <- open before close where a.id = b.id map { id := a.id }
Alert <- ping during Session where a.id = b.id & a.v > 500 map { id := a.id, v := a.v }
Burst <- Alert before Alert where a.id = b.id map { id := a.id, v := a.v + b.v }
Burst <- Burst before Alert where a.id = b.id map { id := a.id, v := a.v + b.v }
Clash <- Session overlap Session where a.id < b.id map { lo := a.id, hi := b.id }
Window <- Session slice Burst where a.id = b.id map { id := a.id, v := b.v }
Escalate <- Window start Session where a.id = b.id & a.v > 300 map { id := a.id }
Session <- Escalate coincide Escalate where a.id = b.id map { id := a.id }
";

pub fn scaling_trace(rng: &mut StdRng, events: usize) -> Trace {
    let names = ["open", "close", "ping"];
    let events = (0..events)
        .map(|t| {
            let name = names[rng.gen_range(0..3)];
            let mut map = ValueMap::new();
            map.insert(id("id"), Value::from(rng.gen_range(0..40u64)));
            if name == "ping" {
                map.insert(id("v"), Value::from(rng.gen_range(0..1000u64)));
            }
            Event::new(id(name), t as u64, map)
        })
        .collect();
    Trace { events }
}
