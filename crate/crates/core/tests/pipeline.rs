//! Cross-module flows: formula → machine → file → constraint → rational constraint.

use uhatforge::compiler::compile_acceptor;
use uhatforge::examples::{build_sqrt2_example, formula_library, scalar_rows, sqrt2_input};
use uhatforge::lowering::{cpr_to_pc, eval_pc, flatten_input, lower_to_cpr, pc_size, uhat_to_pc, PcDocument, PcRef};
use uhatforge::ltl::{lang_member, parse};
use uhatforge::predicate::Registry;
use uhatforge::rational::{enumerate_q, rationalize_pc};
use uhatforge::sampling::{random_sequence, seeded, small_rat};
use uhatforge::vm::{AnyUhat, Uhat};
use uhatforge::{Caps, QuadRat, Rat, Scalar};

use rand::Rng;

#[test]
fn compiled_acceptors_survive_serialization() {
    let reg = Registry::with_builtins();
    for named in formula_library() {
        let u = compile_acceptor(&named.formula, &reg).unwrap();
        let text = u.to_json();
        let back = Uhat::<Rat>::from_json(&text).unwrap();
        assert_eq!(back, u, "{}", named.name);
        assert_eq!(back.to_json(), text);
        let mut rng = seeded(11);
        for _ in 0..20 {
            let len = rng.gen_range(1..=8);
            let seq = random_sequence(&mut rng, len, named.dim, 8);
            assert_eq!(
                back.accepts(&seq).unwrap(),
                lang_member(&named.formula, &seq, &reg).unwrap(),
                "{}",
                named.name
            );
        }
    }
}

#[test]
fn compiled_atom_through_constraint_file() {
    let reg = Registry::with_builtins();
    // a disjunction multiplies the lowered assignments, so stay at n = 1
    let u = compile_acceptor(&parse("x[1][1] > 2*x[2][1] | !X true", 1).unwrap(), &reg).unwrap();
    let n = 1;
    let cpr = lower_to_cpr(&u, n).unwrap();
    let pc = cpr_to_pc(&cpr, u.accept_vector().unwrap()).unwrap();
    let nvars = cpr.nvars();
    let doc: PcDocument = serde_json::from_str(&serde_json::to_string(&PcDocument::new(&pc, nvars)).unwrap()).unwrap();
    let reread: PcRef<Rat> = doc.constraint().unwrap();
    let mut rng = seeded(5);
    for _ in 0..200 {
        let values: Vec<Rat> = (0..n).map(|_| small_rat(&mut rng, 6)).collect();
        let data = scalar_rows(&values);
        let flat = flatten_input(&u, &data).unwrap();
        assert_eq!(
            eval_pc(&reread, &flat).unwrap(),
            u.accepts(&data).unwrap(),
            "{values:?}"
        );
    }
    assert!(pc_size(&reread) > 0);
}

#[test]
fn quadratic_machine_file_keeps_its_field() {
    let u = build_sqrt2_example(QuadRat::sqrt2(), QuadRat::sqrt2()).unwrap();
    let any = AnyUhat::from_json(&u.to_json()).unwrap();
    match &any {
        AnyUhat::Quadratic(back) => assert!(back.accepts(&sqrt2_input()).unwrap()),
        AnyUhat::Rational(_) => panic!("field lost"),
    }
    assert!(Uhat::<Rat>::from_json(&u.to_json()).is_err());
}

#[test]
fn sqrt2_machine_rationalized_on_small_inputs() {
    // the first layer alone: accept iff √2 · c0 at position 1 is positive
    let caps = Caps::default();
    let u = build_sqrt2_example(QuadRat::sqrt2(), QuadRat::one()).unwrap();
    let mut t = vec![QuadRat::zero(); 5];
    t[0] = QuadRat::one();
    let fragment = u.prefix(1, Some(t)).unwrap();
    let pc = uhat_to_pc(&fragment, 1, &caps).unwrap();
    let m = 3;
    let (rat, report) = rationalize_pc(&pc, m, &caps).unwrap();
    assert!(report.atoms >= 1);
    let q = enumerate_q(m, &caps).unwrap();
    let nvars = flatten_input(&fragment, &[vec![QuadRat::zero(); 5]]).unwrap().len();
    assert_eq!(nvars, 10);
    // position 1 occupies the first five variables
    for c0 in &q {
        for c1 in &q {
            let mut x = vec![Rat::zero(); nvars];
            x[0] = c0.clone();
            x[1] = c1.clone();
            let xq: Vec<QuadRat> = x.iter().cloned().map(QuadRat::from).collect();
            assert_eq!(eval_pc(&pc, &xq).unwrap(), eval_pc(&rat, &x).unwrap());
        }
    }
}
