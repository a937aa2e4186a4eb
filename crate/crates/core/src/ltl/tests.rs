use super::surface::{Lin, Rel, Surface};
use super::*;
use crate::predicate::Registry;
use proptest::prelude::*;

fn ints(v: &[i64]) -> Vec<Vec<Rat>> {
    v.iter().map(|&x| vec![Rat::from(x)]).collect()
}

fn builtins() -> Registry {
    Registry::with_builtins()
}

#[test]
fn parses_simple_atom() {
    let f = parse("x[1][1] > 0", 1).unwrap();
    assert_eq!(
        f,
        Formula::Atom(Atom::new(1, 0, vec![Rat::one()], Rat::zero()).unwrap())
    );
}

#[test]
fn parses_last() {
    let f = parse("!X true", 1).unwrap();
    assert_eq!(f, Formula::not(Formula::next(Formula::truth(1))));
    assert_eq!(f, Formula::last(1));
}

#[test]
fn parses_uptrend() {
    let text = "G (X^7 true -> 7*x[7][1] > x[1][1]+x[2][1]+x[3][1]+x[4][1]+x[5][1]+x[6][1]+x[7][1])";
    let f = parse(text, 1).unwrap();
    let mut a = vec![-Rat::one(); 7];
    a[6] = Rat::from(6);
    let atom = Formula::Atom(Atom::new(1, 6, a, Rat::zero()).unwrap());
    let guard = Formula::next_n(Formula::truth(1), 7);
    assert_eq!(f, Formula::globally(1, Formula::implies(guard, atom)));
    let doubling = ints(&[1, 2, 4, 8, 16, 32, 64, 128]);
    assert!(lang_member(&f, &doubling, &builtins()).unwrap());
    assert!(lang_member(&f, &ints(&[5, 4, 3]), &builtins()).unwrap());
    assert!(!lang_member(&f, &ints(&[9, 1, 1, 1, 1, 1, 1, 1]), &builtins()).unwrap());
}

#[test]
fn precedence() {
    let s = parse_surface("true U x[1][1] > 0 | false", 1, &builtins()).unwrap();
    assert!(matches!(s, Surface::Until(_, ref r) if matches!(**r, Surface::Or(..))));
    let s = parse_surface("!true & false -> true -> false", 1, &builtins()).unwrap();
    let Surface::Implies(l, r) = s else {
        panic!("expected implication")
    };
    assert!(matches!(*l, Surface::And(ref a, _) if matches!(**a, Surface::Not(_))));
    assert!(matches!(*r, Surface::Implies(..)));
    let s = parse_surface("G true & F false", 1, &builtins()).unwrap();
    assert!(matches!(s, Surface::And(..)));
}

#[test]
fn linear_expressions() {
    let s = parse_surface("-x[1][2] + 3/2x[2][1] - 2 * x[1][2] + 1 >= 2 - x[1][1]", 2, &builtins()).unwrap();
    let Surface::Cmp(l, Rel::Ge, r) = s else {
        panic!("expected comparison")
    };
    assert_eq!(l.terms[&(0, 1)], Rat::from(-3));
    assert_eq!(l.terms[&(1, 0)], Rat::new(3, 2).unwrap());
    assert_eq!(l.constant, Rat::one());
    assert_eq!(r.terms[&(0, 0)], -Rat::one());
}

#[test]
fn parse_errors() {
    let cases = [
        ("x[1][1] >", 1),
        ("x[1][2] > 0", 1),
        ("x[0][1] > 0", 1),
        ("pred nosuch", 1),
        ("(true", 1),
        ("true true", 1),
        ("x[1][1] > 1/0", 1),
        ("3 * > 0", 1),
        ("x[1][1] ? 0", 1),
        ("", 1),
    ];
    for (text, d) in cases {
        assert!(matches!(parse(text, d), Err(Error::Parse { .. })), "{text}");
    }
    let Err(Error::Parse { pos, .. }) = parse("true &\n  x[1][3] > 0", 2) else {
        panic!()
    };
    assert_eq!((pos.line, pos.col), (2, 3));
}

#[test]
fn custom_predicates() {
    let reg = Registry::from_json(r#"{"odd3": {"table": {"3": [1, 0, 1]}}}"#).unwrap();
    let f = parse_with("pred odd3", 1, &reg).unwrap();
    assert_eq!(eval_all(&f, &ints(&[0, 0, 0]), &reg).unwrap(), vec![true, false, true]);
    assert!(eval_at(&f, &ints(&[0]), 0, &reg).is_err());
    assert!(parse("pred odd3", 1).is_err());
}

#[test]
fn boundary_semantics() {
    let reg = builtins();
    let f = parse("x[2][1] > 0", 1).unwrap();
    let data = ints(&[1, 1, 1]);
    assert!(!eval_at(&f, &data, 2, &reg).unwrap());
    assert!(eval_at(&f, &data, 1, &reg).unwrap());
    let nx = parse("X x[1][1] > -100", 1).unwrap();
    assert!(!eval_at(&nx, &data, 2, &reg).unwrap());
    assert!(eval_at(&f, &data, 3, &reg).is_err());
}

#[test]
fn until_example() {
    let f = parse("true U x[1][1] > 0", 1).unwrap();
    assert!(eval_at(&f, &ints(&[-1, -1, 5]), 0, &builtins()).unwrap());
    assert!(!eval_at(&f, &ints(&[-1, -1, -1]), 0, &builtins()).unwrap());
}

#[test]
fn equality_guarded_by_window() {
    let f = parse("x[2][1] = 0", 1).unwrap();
    let reg = builtins();
    assert_eq!(eval_all(&f, &ints(&[3, 0, 0]), &reg).unwrap(), vec![true, true, false]);
    let g = parse("x[2][1] != 0", 1).unwrap();
    assert_eq!(eval_all(&g, &ints(&[3, 0, 0]), &reg).unwrap(), vec![false, false, true]);
}

#[test]
fn evenpos() {
    let f = parse("pred evenpos", 1).unwrap();
    assert_eq!(
        eval_all(&f, &ints(&[0, 0, 0, 0]), &builtins()).unwrap(),
        vec![false, true, false, true]
    );
}

#[test]
fn display_reparses() {
    for text in [
        "x[1][1] > 0",
        "x[3][1] = 0",
        "!(x[1][1] - 2*x[2][1] + 1/2 > 0) U pred evenpos",
        "G (X^2 true -> x[3][1] > x[1][1])",
        "F (x[1][1] <= 0 & X false)",
    ] {
        let f = parse(text, 1).unwrap();
        assert_eq!(parse(&f.to_string(), 1).unwrap(), f, "{text} / {f}");
    }
}

#[test]
fn sizes() {
    let f = parse("x[1][1] > 0 | X x[3][1] > 0", 1).unwrap();
    assert_eq!(f.size(), 4);
    assert_eq!(f.lookahead_sum(), 2);
    assert_eq!(f.dim().unwrap(), Some(1));
    let mixed = Formula::or(Formula::truth(1), Formula::truth(2));
    assert!(mixed.dim().is_err());
}

fn lin_strategy(dim: usize) -> impl Strategy<Value = Lin> {
    (
        proptest::collection::vec(((0usize..3, 0..dim), -3i64..4), 0..3),
        -3i64..4,
    )
        .prop_map(|(terms, c)| {
            let mut l = Lin::constant(Rat::from(c));
            for ((t, k), v) in terms {
                l = l.add(&Lin::var(t, k, Rat::from(v)), &Rat::one());
            }
            l
        })
}

fn surface_strategy(dim: usize) -> impl Strategy<Value = Surface> {
    let rel = prop_oneof![
        Just(Rel::Gt),
        Just(Rel::Ge),
        Just(Rel::Lt),
        Just(Rel::Le),
        Just(Rel::Eq),
        Just(Rel::Ne)
    ];
    let leaf = prop_oneof![
        Just(Surface::True),
        Just(Surface::False),
        Just(Surface::Pred("evenpos".into())),
        Just(Surface::Pred("firsthalf".into())),
        (lin_strategy(dim), rel, lin_strategy(dim)).prop_map(|(l, r, rr)| Surface::Cmp(l, r, rr)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| Surface::Not(Box::new(x))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Surface::And(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Surface::Or(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Surface::Implies(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Surface::Until(Box::new(x), Box::new(y))),
            (0usize..3, inner.clone()).prop_map(|(k, x)| Surface::Next(k, Box::new(x))),
            inner.clone().prop_map(|x| Surface::Globally(Box::new(x))),
            inner.prop_map(|x| Surface::Eventually(Box::new(x))),
        ]
    })
}

fn data_strategy(dim: usize) -> impl Strategy<Value = Vec<Vec<Rat>>> {
    proptest::collection::vec(proptest::collection::vec((-3i64..4).prop_map(Rat::from), dim), 1..6)
}

proptest! {
    #[test]
    fn desugaring_preserves_semantics(s in surface_strategy(2), data in data_strategy(2)) {
        let reg = builtins();
        let f = s.desugar(2).unwrap();
        for i in 0..data.len() {
            prop_assert_eq!(s.eval_at(&data, i, &reg).unwrap(), eval_at(&f, &data, i, &reg).unwrap());
        }
    }

    #[test]
    fn surface_display_reparses(s in surface_strategy(1), data in data_strategy(1)) {
        let reg = builtins();
        let back = parse_surface(&s.to_string(), 1, &reg).unwrap();
        for i in 0..data.len() {
            prop_assert_eq!(back.eval_at(&data, i, &reg).unwrap(), s.eval_at(&data, i, &reg).unwrap());
        }
    }

    #[test]
    fn core_display_roundtrips(s in surface_strategy(2)) {
        let f = s.desugar(2).unwrap();
        prop_assert_eq!(parse(&f.to_string(), 2).unwrap(), f);
    }

    #[test]
    fn until_unrolls(s in surface_strategy(1), t in surface_strategy(1), data in data_strategy(1)) {
        let reg = builtins();
        let (a, b) = (s.desugar(1).unwrap(), t.desugar(1).unwrap());
        let u = Formula::until(a.clone(), b.clone());
        let n = data.len();
        for i in 0..n {
            let unrolled = eval_at(&b, &data, i, &reg).unwrap()
                || (eval_at(&a, &data, i, &reg).unwrap() && i + 1 < n && eval_at(&u, &data, i + 1, &reg).unwrap());
            prop_assert_eq!(eval_at(&u, &data, i, &reg).unwrap(), unrolled);
        }
    }

    #[test]
    fn atoms_fail_past_the_end(k in 0usize..4, a in proptest::collection::vec(-5i64..6, 4), b in -5i64..6, data in data_strategy(1)) {
        let atom = Atom::new(1, k, a[..=k].iter().map(|&x| Rat::from(x)).collect(), Rat::from(b)).unwrap();
        for i in 0..data.len() {
            if i + k >= data.len() {
                prop_assert!(!atom.holds(&data, i).unwrap());
            }
        }
    }
}
