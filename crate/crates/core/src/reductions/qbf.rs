//! Quantified 3-CNF formulas. Variable `x_p` is named by the `j`-th prime
//! `p`, and a valuation is the product of the primes of its true variables.

use std::fmt;

use num_bigint::BigUint;

use crate::analysis::Spec;
use crate::error::{ParseError, ReductionError};
use crate::expr::{ArithMode, BinOp, Expr};
use crate::model::{ident, Event, Identifier, Trace, Value};

use super::unary;

/// Largest variable count the enumeration oracle accepts.
const ORACLE_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// The prime naming the variable.
    pub var: u64,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "-{}", self.var)
        }
    }
}

/// `Q_2 x_2 Q_3 x_3 ... Q_p x_p . (l ∨ l ∨ l) ∧ ...` over the first primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qbf {
    prefix: Vec<(Quantifier, u64)>,
    clauses: Vec<[Literal; 3]>,
}

/// The first `n` primes.
pub fn nth_primes(n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    // p_n < n (ln n + ln ln n) for n >= 6.
    let x = n.max(6) as f64;
    let limit = (x * (x.ln() + x.ln().ln())).ceil() as usize + 1;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::with_capacity(n);
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        if primes.len() == n {
            break;
        }
        for m in (i * i..=limit).step_by(i) {
            composite[m] = true;
        }
    }
    primes
}

impl Qbf {
    pub fn new(quantifiers: Vec<Quantifier>, clauses: Vec<[Literal; 3]>) -> Result<Self, ReductionError> {
        if quantifiers.is_empty() {
            return Err(ReductionError::NoVariables);
        }
        let primes = nth_primes(quantifiers.len());
        for (i, clause) in clauses.iter().enumerate() {
            if let Some(l) = clause.iter().find(|l| !primes.contains(&l.var)) {
                return Err(ReductionError::UnboundVariable { clause: i, var: l.var });
            }
        }
        Ok(Qbf { prefix: quantifiers.into_iter().zip(primes).collect(), clauses })
    }

    /// A prefix line such as `E 2 A 3 E 5`, then one clause per line written
    /// as three signed primes, e.g. `2 -3 5`. Blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let Some((line, prefix)) = rows.next() else {
            return Err(ReductionError::NoVariables);
        };
        let words: Vec<&str> = prefix.split_whitespace().collect();
        if words.len() % 2 != 0 {
            return Err(ParseError::new(line, 1, "prefix must be quantifier/prime pairs").into());
        }
        let mut quantifiers = Vec::new();
        let expected = nth_primes(words.len() / 2);
        for (pos, pair) in words.chunks(2).enumerate() {
            let q = match pair[0] {
                "E" => Quantifier::Exists,
                "A" => Quantifier::Forall,
                other => return Err(ParseError::new(line, 1, format!("expected `E` or `A`, found `{other}`")).into()),
            };
            let p: u64 = pair[1].parse().map_err(|_| ParseError::new(line, 1, format!("expected a prime, found `{}`", pair[1])))?;
            if p != expected[pos] {
                return Err(ReductionError::UnexpectedPrime { position: pos, expected: expected[pos], found: p });
            }
            quantifiers.push(q);
        }
        let mut clauses = Vec::new();
        for (line, row) in rows {
            let mut lits = Vec::new();
            for w in row.split_whitespace() {
                let n: i64 = w.parse().map_err(|_| ParseError::new(line, 1, format!("expected a signed prime, found `{w}`")))?;
                lits.push(Literal { var: n.unsigned_abs(), positive: n > 0 });
            }
            let clause: [Literal; 3] =
                lits.try_into().map_err(|l: Vec<Literal>| ReductionError::ClauseWidth { clause: clauses.len(), found: l.len() })?;
            clauses.push(clause);
        }
        Qbf::new(quantifiers, clauses)
    }

    pub fn prefix(&self) -> &[(Quantifier, u64)] {
        &self.prefix
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn variables(&self) -> usize {
        self.prefix.len()
    }

    /// `1 + ∏ p` over the variables' primes.
    pub fn bound(&self) -> BigUint {
        self.prefix.iter().fold(BigUint::from(1u32), |acc, &(_, p)| acc * p) + 1u32
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix: Vec<String> = self
            .prefix
            .iter()
            .map(|(q, p)| format!("{} {p}", if *q == Quantifier::Exists { "E" } else { "A" }))
            .collect();
        writeln!(f, "{}", prefix.join(" "))?;
        for [a, b, c] in &self.clauses {
            writeln!(f, "{a} {b} {c}")?;
        }
        Ok(())
    }
}

/// Evaluates the formula by trying both values of every variable.
pub fn qbf_oracle(formula: &Qbf) -> Result<bool, ReductionError> {
    if formula.variables() > ORACLE_LIMIT {
        return Err(ReductionError::TooLarge(formula.variables()));
    }
    fn go(f: &Qbf, depth: usize, truth: &mut Vec<(u64, bool)>) -> bool {
        let Some(&(q, p)) = f.prefix.get(depth) else {
            let value = |l: &Literal| truth.iter().find(|(v, _)| *v == l.var).map(|&(_, b)| b) == Some(l.positive);
            return f.clauses.iter().all(|c| c.iter().any(value));
        };
        let mut branch = |b: bool| {
            truth.push((p, b));
            let r = go(f, depth + 1, truth);
            truth.pop();
            r
        };
        match q {
            Quantifier::Exists => branch(false) || branch(true),
            Quantifier::Forall => branch(false) && branch(true),
        }
    }
    Ok(go(formula, 0, &mut Vec::new()))
}

#[derive(Clone, Debug)]
pub struct TqbfInstance {
    pub spec: Spec,
    pub trace: Trace,
    pub target: Identifier,
    pub bound: BigUint,
}

impl TqbfInstance {
    pub fn mode(&self) -> ArithMode {
        ArithMode::modulo(self.bound.clone()).expect("the bound is at least 2")
    }
}

/// Generation rules `G_j` build every valuation, `C_n` keeps those that
/// satisfy the clauses, and `C_{j-1}` folds away variable `j` according to
/// its quantifier. The formula is true iff `C_0` gets an interval.
pub fn compile_tqbf(formula: &Qbf) -> TqbfInstance {
    let s = ident("s");
    let g = |j: usize| ident(&format!("G{j}"));
    let c = |j: usize| ident(&format!("C{j}"));
    let keep = || vec![(s.clone(), Expr::left(s.clone()))];
    let rem = |p: u64| Expr::binary(BinOp::Rem, Expr::left(s.clone()), Expr::nat(p));
    let divisible = |p: u64| Expr::binary(BinOp::Eq, rem(p), Expr::nat(0u32));
    let indivisible = |p: u64| Expr::binary(BinOp::Gt, rem(p), Expr::nat(0u32));
    let n = formula.variables();
    let mut rules = Vec::new();
    for (j, &(_, p)) in formula.prefix.iter().enumerate().map(|(i, x)| (i + 1, x)) {
        let times = Expr::binary(BinOp::Mul, Expr::left(s.clone()), Expr::nat(p));
        rules.push(unary(g(j), g(j - 1), &[s.clone()], None, vec![(s.clone(), times)]));
        rules.push(unary(g(j), g(j - 1), &[s.clone()], None, keep()));
    }
    let matrix = formula
        .clauses
        .iter()
        .map(|clause| {
            clause
                .iter()
                .map(|l| if l.positive { divisible(l.var) } else { indivisible(l.var) })
                .reduce(|a, b| Expr::binary(BinOp::Or, a, b))
                .expect("three literals")
        })
        .reduce(|a, b| Expr::binary(BinOp::And, a, b));
    rules.push(unary(c(n), g(n), &[s.clone()], matrix, keep()));
    for (j, &(q, p)) in formula.prefix.iter().enumerate().rev().map(|(i, x)| (i + 1, x)) {
        match q {
            Quantifier::Exists => {
                let quotient = Expr::binary(BinOp::Div, Expr::left(s.clone()), Expr::nat(p));
                rules.push(unary(c(j - 1), c(j), &[s.clone()], Some(indivisible(p)), keep()));
                rules.push(unary(c(j - 1), c(j), &[s.clone()], Some(divisible(p)), vec![(s.clone(), quotient)]));
            }
            Quantifier::Forall => {
                // Pair (C_j, s) with (C_j, s * p) where x_p is false in s.
                let paired = Expr::binary(
                    BinOp::Eq,
                    Expr::binary(BinOp::Mul, Expr::left(s.clone()), Expr::nat(p)),
                    Expr::right(s.clone()),
                );
                let guard = Expr::binary(BinOp::And, paired, indivisible(p));
                rules.push(unary(c(j - 1), c(j), &[], Some(guard), keep()));
            }
        }
    }
    let trace = Trace { events: vec![Event::new(g(0), 0, [(s, Value::from(1u64))].into_iter().collect())] };
    TqbfInstance { spec: Spec::new(rules), trace, target: c(0), bound: formula.bound() }
}
