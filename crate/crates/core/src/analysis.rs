//! Specifications, the rule dependency graph, fragment classification and
//! validation.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use num_bigint::BigUint;

use crate::error::ValidationError;
use crate::expr::bit_length;
use crate::model::{Identifier, Trace, Value};
use crate::rule::Rule;

/// An ordered list of rules.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Spec {
    pub rules: Vec<Rule>,
}

impl Spec {
    pub fn new(rules: Vec<Rule>) -> Self {
        Spec { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The same rules in the given order.
    pub fn reordered(&self, order: &[usize]) -> Spec {
        Spec { rules: order.iter().map(|&i| self.rules[i].clone()).collect() }
    }

    /// Every identifier used on either side of some rule, deduplicated.
    pub fn identifiers(&self) -> Vec<Identifier> {
        let mut ids: Vec<Identifier> = self
            .rules
            .iter()
            .flat_map(|r| std::iter::once(r.lhs().clone()).chain(r.rhs().into_iter().cloned()))
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_spec(self))
    }
}

/// `edges` holds `(i, j)` whenever the identifier produced by rule `i` is
/// consumed by rule `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RuleGraph {
    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.nodes];
        for &(i, j) in &self.edges {
            succ[i].push(j);
        }
        succ
    }
}

pub fn build_graph(spec: &Spec) -> RuleGraph {
    let mut consumers: HashMap<&Identifier, Vec<usize>> = HashMap::new();
    for (j, rule) in spec.rules.iter().enumerate() {
        let [a, b] = rule.rhs();
        consumers.entry(a).or_default().push(j);
        if b != a {
            consumers.entry(b).or_default().push(j);
        }
    }
    let mut edges = Vec::new();
    for (i, rule) in spec.rules.iter().enumerate() {
        if let Some(js) = consumers.get(rule.lhs()) {
            edges.extend(js.iter().map(|&j| (i, j)));
        }
    }
    edges.sort_unstable();
    RuleGraph { nodes: spec.rules.len(), edges }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentInfo {
    pub cycle_free: bool,
    pub has_exclusive: bool,
    /// Present iff the spec is cycle-free.
    pub topo_order: Option<Vec<usize>>,
}

/// Cycle detection and, for cycle-free specs, the lexicographically smallest
/// topological order of the rules. Keeping the original order wherever the
/// dependencies allow makes evaluation deterministic.
pub fn classify(spec: &Spec) -> FragmentInfo {
    let graph = build_graph(spec);
    let topo_order = topological_order(&graph);
    FragmentInfo {
        cycle_free: topo_order.is_some(),
        has_exclusive: spec.rules.iter().any(Rule::is_exclusive),
        topo_order,
    }
}

fn topological_order(graph: &RuleGraph) -> Option<Vec<usize>> {
    let succ = graph.successors();
    let mut indegree = vec![0usize; graph.nodes];
    for &(_, j) in &graph.edges {
        indegree[j] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..graph.nodes).filter(|&n| indegree[n] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(graph.nodes);
    while let Some(Reverse(n)) = ready.pop() {
        order.push(n);
        for &m in &succ[n] {
            indegree[m] -= 1;
            if indegree[m] == 0 {
                ready.push(Reverse(m));
            }
        }
    }
    (order.len() == graph.nodes).then_some(order)
}

/// Some cycle of the graph as a sequence of rule indices, each with an edge
/// to the next and the last back to the first.
pub fn find_cycle(graph: &RuleGraph) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let succ = graph.successors();
    let mut mark = vec![Mark::New; graph.nodes];
    for root in 0..graph.nodes {
        if mark[root] != Mark::New {
            continue;
        }
        // Iterative depth-first search; `path` mirrors the open nodes.
        let mut path = vec![root];
        let mut cursor = vec![0usize];
        mark[root] = Mark::Open;
        while let Some(&node) = path.last() {
            let k = cursor.last_mut().expect("cursor tracks path");
            if let Some(&next) = succ[node].get(*k) {
                *k += 1;
                match mark[next] {
                    Mark::Open => {
                        let from = path.iter().position(|&n| n == next).expect("open nodes are on the path");
                        return Some(path[from..].to_vec());
                    }
                    Mark::New => {
                        mark[next] = Mark::Open;
                        path.push(next);
                        cursor.push(0);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                path.pop();
                cursor.pop();
            }
        }
    }
    None
}

/// Rejects exclusive rules in cyclic specs and updates that assign a key
/// twice.
pub fn validate(spec: &Spec) -> Result<(), ValidationError> {
    for (rule, r) in spec.rules.iter().enumerate() {
        if let Some(key) = r.psi().duplicate_key() {
            return Err(ValidationError::DuplicateAssignment { rule, key: key.clone() });
        }
    }
    let exclusive_rules: Vec<usize> = spec.rules.iter().enumerate().filter(|(_, r)| r.is_exclusive()).map(|(i, _)| i).collect();
    if exclusive_rules.is_empty() {
        return Ok(());
    }
    match find_cycle(&build_graph(spec)) {
        Some(cycle) => Err(ValidationError::ExclusiveInCycle { exclusive_rules, cycle }),
        None => Ok(()),
    }
}

/// Size of a specification and a trace: operator counts plus binary lengths
/// of numbers. Identifiers and map keys are not counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeMeasure {
    pub spec_size: u64,
    pub trace_size: u64,
}

pub fn size_measure(spec: &Spec, trace: &Trace) -> SizeMeasure {
    let spec_size = spec
        .rules
        .iter()
        .map(|r| {
            let phi = &r.phi().body;
            let psi: u64 = r.psi().assignments.iter().map(|(_, e)| e.operator_count() + e.literal_bits()).sum();
            phi.operator_count() + phi.literal_bits() + psi
        })
        .sum();
    let trace_size = trace
        .events
        .iter()
        .map(|ev| {
            let values: u64 = ev
                .map
                .iter()
                .map(|(_, v)| match v {
                    Value::Bool(_) => 1,
                    Value::Nat(n) => bit_length(n),
                })
                .sum();
            bit_length(&BigUint::from(ev.time)) + values
        })
        .sum();
    SizeMeasure { spec_size, trace_size }
}

/// Complexity of the evaluation problem for a fragment.
pub fn complexity_class(info: &FragmentInfo, finite_data: bool, minimal: bool) -> &'static str {
    if info.has_exclusive && !info.cycle_free {
        return "rejected: exclusive rules require a cycle-free specification";
    }
    match (minimal, finite_data, info.cycle_free, info.has_exclusive) {
        (true, true, _, _) => "in PTime",
        (true, false, _, _) => "in ExpTime",
        (false, true, true, _) => "PSpace-complete",
        (false, false, true, false) => "NExpTime-complete",
        (false, false, true, true) => "NExpTime-hard, in AExpTime(poly)",
        (false, true, false, _) => "ExpTime-complete",
        (false, false, false, _) => "undecidable",
    }
}
