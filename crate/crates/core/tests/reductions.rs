mod common;

use common::*;
use nfer::analysis::classify;
use nfer::engine::{decide, evaluate_trace, EvalConfig, Verdict};
use nfer::model::init;
use nfer::reductions::{compile_minsky, compile_squares, compile_tqbf, minsky_oracle, qbf_oracle, Halting, MinskyProgram, Qbf};

// Counts c0 up to three, then drains it through a loop that jumps back on
// the always-zero c1.
const DRAIN: &str = "\
inc 0
inc 0
inc 0
ifzero 0 goto 6
dec 0
ifzero 1 goto 3
stop
";

#[test]
fn draining_loop_has_one_witness_level_per_step() {
    let program = MinskyProgram::parse(DRAIN).unwrap();
    let Halting::Halts { steps, counters } = minsky_oracle(&program, 100) else { panic!("loops") };
    assert_eq!((steps, counters), (13, (0, 0)));
    let (spec, trace, target) = compile_minsky(&program);
    assert!(!classify(&spec).cycle_free);
    let config = EvalConfig::default().with_fuel(50);
    let Verdict::Found(w) = decide(&spec, &trace, &target, &config).unwrap() else { panic!("not found") };
    assert_eq!(w.height() as u64, steps);
    let pool = evaluate_trace(&spec, &trace, &config.clone().with_target(target)).unwrap().pool;
    w.verify(&spec, &config.mode, &init(&trace), &pool).unwrap();
    // One pass runs straight-line code but not the loop.
    let short = EvalConfig::default().with_fuel(1);
    let (spec, trace, target) = compile_minsky(&program);
    assert_eq!(decide(&spec, &trace, &target, &short).unwrap().label(), "unknown");
}

#[test]
fn growing_loop_is_unknown_at_any_fuel() {
    let program = MinskyProgram::parse("inc 0\nifzero 1 goto 0\nstop\n").unwrap();
    assert_eq!(minsky_oracle(&program, 1000), Halting::RunsPastLimit);
    let (spec, trace, target) = compile_minsky(&program);
    for fuel in [10, 100, 1000] {
        assert_eq!(decide(&spec, &trace, &target, &EvalConfig::default().with_fuel(fuel)).unwrap().label(), "unknown");
    }
}

#[test]
fn random_formulas_with_five_variables() {
    let mut rng = rng(11);
    for _ in 0..40 {
        let formula = random_qbf(&mut rng, 5, 6);
        let inst = compile_tqbf(&formula);
        let found = decide(&inst.spec, &inst.trace, &inst.target, &EvalConfig::default().with_mode(inst.mode())).unwrap();
        assert_eq!(found.is_found(), qbf_oracle(&formula).unwrap(), "{formula}");
    }
}

#[test]
fn formula_text_round_trips() {
    let mut rng = rng(12);
    for _ in 0..50 {
        let formula = random_qbf(&mut rng, 4, 4);
        assert_eq!(Qbf::parse(&formula.to_string()).unwrap(), formula);
    }
}

#[test]
fn squares_grow_doubly_exponentially() {
    let (spec, trace) = compile_squares(8);
    let pool = evaluate_trace(&spec, &trace, &EvalConfig::default()).unwrap().pool;
    let top = pool.iter().find(|iv| iv.id().as_str() == "e8").unwrap();
    let d = top.map().iter().next().unwrap().1.as_nat().unwrap().clone();
    assert_eq!(d, num_bigint::BigUint::from(2u32).pow(256));
}
