//! Interval abstraction of event traces.
//!
//! A trace of timestamped events is lifted into a pool of intervals, and a
//! specification of rules derives new intervals from pairs of existing ones
//! until nothing more can be added.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod expr;
mod index;
pub mod model;
pub mod reductions;
pub mod rule;
pub mod syntax;
pub mod trace_io;
pub mod witness;

pub use analysis::Spec;
pub use engine::{decide, evaluate_trace, EvalConfig, EvalResult, Verdict};
pub use error::Error;
pub use expr::ArithMode;
pub use model::{Event, Identifier, Interval, Pool, Trace, Value, ValueMap};
pub use syntax::parse_spec;
pub use trace_io::{parse_trace, Format};
pub use witness::WitnessTree;
