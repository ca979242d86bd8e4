//! Two-counter machines. A configuration `(line, c0, c1)` becomes an
//! interval labeled by the line number with map `{c0, c1}`; every interval
//! sits at time 0.

use std::fmt;

use crate::analysis::Spec;
use crate::error::{ParseError, ReductionError};
use crate::expr::{BinOp, Expr};
use crate::model::{ident, Event, Identifier, Trace, Value};
use crate::rule::Rule;

use super::unary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Counter {
    C0,
    C1,
}

impl Counter {
    fn index(self) -> usize {
        match self {
            Counter::C0 => 0,
            Counter::C1 => 1,
        }
    }

    fn key(self) -> Identifier {
        ident(["c0", "c1"][self.index()])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Inc(Counter),
    /// Decrementing a zero counter leaves it at zero.
    Dec(Counter),
    IfZero(Counter, usize),
    Stop,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc(c) => write!(f, "inc {}", c.index()),
            Instruction::Dec(c) => write!(f, "dec {}", c.index()),
            Instruction::IfZero(c, target) => write!(f, "ifzero {} goto {target}", c.index()),
            Instruction::Stop => write!(f, "stop"),
        }
    }
}

/// A program whose last line, and only that line, is `stop`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyProgram {
    lines: Vec<Instruction>,
}

impl MinskyProgram {
    pub fn new(lines: Vec<Instruction>) -> Result<Self, ReductionError> {
        if lines.is_empty() {
            return Err(ReductionError::EmptyProgram);
        }
        let last = lines.len() - 1;
        for (n, ins) in lines.iter().enumerate() {
            match ins {
                Instruction::Stop if n != last => return Err(ReductionError::MisplacedStop { line: n }),
                Instruction::IfZero(_, target) if *target > last => {
                    return Err(ReductionError::GotoOutOfRange { line: n, target: *target })
                }
                _ if n == last && *ins != Instruction::Stop => return Err(ReductionError::MisplacedStop { line: n }),
                _ => {}
            }
        }
        Ok(MinskyProgram { lines })
    }

    /// One instruction per line: `inc 0`, `dec 1`, `ifzero 0 goto 3`, `stop`.
    /// Blank lines and `#` comments are skipped; instructions are numbered
    /// from 0 in order.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut lines = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = content.split_whitespace().collect();
            if words.is_empty() {
                continue;
            }
            let err = |message: String| ParseError::new(n + 1, 1, message);
            let counter = |w: &str| -> Result<Counter, ReductionError> {
                match w {
                    "0" => Ok(Counter::C0),
                    "1" => Ok(Counter::C1),
                    _ => match w.parse::<usize>() {
                        Ok(c) => Err(ReductionError::BadCounter { line: lines.len(), counter: c }),
                        Err(_) => Err(err(format!("expected a counter, found `{w}`")).into()),
                    },
                }
            };
            let ins = match words.as_slice() {
                ["inc", c] => Instruction::Inc(counter(c)?),
                ["dec", c] => Instruction::Dec(counter(c)?),
                ["ifzero", c, "goto", t] => {
                    let target = t.parse().map_err(|_| err(format!("expected a line number, found `{t}`")))?;
                    Instruction::IfZero(counter(c)?, target)
                }
                ["stop"] => Instruction::Stop,
                _ => return Err(err(format!("unrecognized instruction `{}`", content.trim())).into()),
            };
            lines.push(ins);
        }
        MinskyProgram::new(lines)
    }

    pub fn lines(&self) -> &[Instruction] {
        &self.lines
    }

    pub fn stop_line(&self) -> usize {
        self.lines.len() - 1
    }
}

impl fmt::Display for MinskyProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.lines {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

fn line_id(n: usize) -> Identifier {
    ident(&n.to_string())
}

/// Rules simulating `program`, the trace holding the initial configuration
/// `(0, 0, 0)`, and the label of the stop line.
pub fn compile_minsky(program: &MinskyProgram) -> (Spec, Trace, Identifier) {
    let keys = [Counter::C0.key(), Counter::C1.key()];
    let copy = |c: Counter| (c.key(), Expr::left(c.key()));
    let both = || vec![copy(Counter::C0), copy(Counter::C1)];
    let with = |c: Counter, e: Expr| {
        let mut psi = both();
        psi[c.index()] = (c.key(), e);
        psi
    };
    let zero = |c: Counter| Expr::binary(BinOp::Eq, Expr::left(c.key()), Expr::nat(0u32));
    let positive = |c: Counter| Expr::binary(BinOp::Gt, Expr::left(c.key()), Expr::nat(0u32));
    let mut rules: Vec<Rule> = Vec::new();
    for (n, ins) in program.lines.iter().enumerate() {
        let (here, next) = (line_id(n), line_id(n + 1));
        match *ins {
            Instruction::Inc(c) => {
                let plus = Expr::binary(BinOp::Add, Expr::left(c.key()), Expr::nat(1u32));
                rules.push(unary(next, here, &keys, None, with(c, plus)));
            }
            Instruction::Dec(c) => {
                let minus = Expr::binary(BinOp::Sub, Expr::left(c.key()), Expr::nat(1u32));
                rules.push(unary(next.clone(), here.clone(), &keys, Some(positive(c)), with(c, minus)));
                rules.push(unary(next, here, &keys, Some(zero(c)), both()));
            }
            Instruction::IfZero(c, target) => {
                rules.push(unary(line_id(target), here.clone(), &keys, Some(zero(c)), both()));
                rules.push(unary(next, here, &keys, Some(positive(c)), both()));
            }
            Instruction::Stop => {}
        }
    }
    let start = [(Counter::C0.key(), Value::from(0u64)), (Counter::C1.key(), Value::from(0u64))];
    let trace = Trace { events: vec![Event::new(line_id(0), 0, start.into_iter().collect())] };
    (Spec::new(rules), trace, line_id(program.stop_line()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halting {
    /// Reached the stop line after `steps` instructions.
    Halts { steps: u64, counters: (u64, u64) },
    RunsPastLimit,
}

/// Runs `program` from `(0, 0, 0)` for at most `step_limit` instructions.
pub fn minsky_oracle(program: &MinskyProgram, step_limit: u64) -> Halting {
    let (mut line, mut c) = (0usize, [0u64; 2]);
    for steps in 0..=step_limit {
        match program.lines[line] {
            Instruction::Stop => return Halting::Halts { steps, counters: (c[0], c[1]) },
            _ if steps == step_limit => break,
            Instruction::Inc(k) => {
                c[k.index()] += 1;
                line += 1;
            }
            Instruction::Dec(k) => {
                c[k.index()] = c[k.index()].saturating_sub(1);
                line += 1;
            }
            Instruction::IfZero(k, target) => line = if c[k.index()] == 0 { target } else { line + 1 },
        }
    }
    Halting::RunsPastLimit
}
