//! Generators that compile other problems into rule evaluation, with
//! direct oracles to check them against.

mod minsky;
mod qbf;
mod squares;

pub use minsky::{compile_minsky, minsky_oracle, Counter, Halting, Instruction, MinskyProgram};
pub use qbf::{compile_tqbf, nth_primes, qbf_oracle, Literal, Quantifier, Qbf, TqbfInstance};
pub use squares::compile_squares;

use crate::expr::{BinOp, Expr, MapPredicate, MapUpdate};
use crate::model::Identifier;
use crate::rule::{InclusiveOp, Rule};

/// A rule reading one interval: `lhs <- src coincide src` where the two
/// operands must agree on every key in `keys`, plus `guard`.
fn unary(lhs: Identifier, src: Identifier, keys: &[Identifier], guard: Option<Expr>, psi: Vec<(Identifier, Expr)>) -> Rule {
    let same = keys
        .iter()
        .map(|k| Expr::binary(BinOp::Eq, Expr::left(k.clone()), Expr::right(k.clone())))
        .chain(guard)
        .reduce(|a, b| Expr::binary(BinOp::And, a, b))
        .unwrap_or(Expr::Bool(true));
    Rule::inclusive(lhs, src.clone(), InclusiveOp::Coincide, src)
        .with_phi(MapPredicate::new(same))
        .with_psi(MapUpdate::new(psi))
}
