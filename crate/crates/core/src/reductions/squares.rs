use crate::analysis::Spec;
use crate::expr::{BinOp, Expr};
use crate::model::{ident, Event, Trace, Value};

use super::unary;

/// The chain `e{j} <- e{j-1} coincide e{j-1} where a.d = b.d map { d := a.d * a.d }`
/// for `j = 1..=n`, with a single event `e0` at time 0 carrying `d = 2`.
/// Evaluation gives `e{j}` the value `2^(2^j)`.
pub fn compile_squares(n: usize) -> (Spec, Trace) {
    let d = ident("d");
    let rules = (1..=n)
        .map(|j| {
            let square = Expr::binary(BinOp::Mul, Expr::left(d.clone()), Expr::left(d.clone()));
            unary(ident(&format!("e{j}")), ident(&format!("e{}", j - 1)), &[d.clone()], None, vec![(d.clone(), square)])
        })
        .collect();
    let trace = Trace { events: vec![Event::new(ident("e0"), 0, [(d, Value::from(2u64))].into_iter().collect())] };
    (Spec::new(rules), trace)
}
