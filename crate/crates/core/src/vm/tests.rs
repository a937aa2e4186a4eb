use super::*;
use crate::examples::{build_double, build_greater_than, scalar_rows};
use crate::predicate::{Builtin, PredicateDef};
use crate::scalar::{QuadRat, Rat};
use proptest::prelude::*;

fn ints(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::from(x)).collect()
}

fn rows(v: &[&[i64]]) -> Vec<Vec<Rat>> {
    v.iter().map(|r| ints(r)).collect()
}

#[test]
fn argmax_is_leftmost() {
    assert_eq!(attention_argmax(&ints(&[0, 2, 2, 1]), 0..4).unwrap(), 1);
    assert_eq!(attention_argmax(&ints(&[5]), 0..1).unwrap(), 0);
    // Double layer 1 at position 1 on (1, 3, 7): window is positions 2..4
    assert_eq!(attention_argmax(&ints(&[0, -1, -5, 0]), 1..4).unwrap(), 3);
}

#[test]
fn argmax_rejects_bad_windows() {
    assert!(matches!(
        attention_argmax(&ints(&[1, 2]), 1..1),
        Err(Error::BadWindow { .. })
    ));
    assert!(matches!(
        attention_argmax(&ints(&[1, 2]), 0..3),
        Err(Error::BadWindow { .. })
    ));
}

#[test]
fn argmax_exhaustive_over_three_values() {
    fn all_tuples(len: usize) -> Vec<Vec<i64>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for t in all_tuples(len - 1) {
            for v in -1..=1 {
                let mut t = t.clone();
                t.push(v);
                out.push(t);
            }
        }
        out
    }
    for len in 1..=5 {
        for t in all_tuples(len) {
            let scores = ints(&t);
            for start in 0..len {
                for end in start + 1..=len {
                    let max = t[start..end].iter().max().unwrap();
                    let expected = (start..end).find(|&j| t[j] == *max).unwrap();
                    assert_eq!(attention_argmax(&scores, start..end).unwrap(), expected);
                }
            }
        }
    }
}

#[test]
fn masked_windows() {
    assert_eq!(attention_window(Masking::None, 2, 4), 0..4);
    assert_eq!(attention_window(Masking::Past, 0, 4), 1..4);
    assert_eq!(attention_window(Masking::Past, 3, 4), 3..4);
}

#[test]
fn relu_layer() {
    let out = run_layer(&Layer::Relu { coord: 0 }, &rows(&[&[-3], &[2]]), &[vec![], vec![]]).unwrap();
    assert_eq!(out, rows(&[&[0], &[2]]));
}

#[test]
fn double_first_layer() {
    let d = build_double();
    let first = &d.layers()[0];
    let empty = vec![Vec::new(); 4];
    let out = run_layer(first, &rows(&[&[1, 1], &[1, 3], &[1, 7], &[0, 0]]), &empty).unwrap();
    assert_eq!(out, rows(&[&[0], &[0], &[0], &[0]]));
    let out = run_layer(first, &rows(&[&[1, 1], &[1, 2], &[0, 0]]), &empty[..3]).unwrap();
    assert_eq!(out[0], ints(&[1]));
}

#[test]
fn zero_layer_machine_returns_padded_input() {
    let g = build_greater_than();
    assert_eq!(g.run(&rows(&[&[2, 1]])).unwrap(), rows(&[&[1, 2, 1], &[0, 0, 0]]));
    let u = Uhat::<Rat>::new(2, PosEncoding::standard(), vec![], None).unwrap();
    assert_eq!(
        u.run(&rows(&[&[2, 1], &[3, 4]])).unwrap(),
        rows(&[&[2, 1], &[3, 4], &[0, 0]])
    );
}

#[test]
fn double_final_column() {
    let d = build_double();
    let out = d.run(&scalar_rows(&ints(&[1, 3, 7]))).unwrap();
    assert_eq!(out[0], ints(&[1]));
    assert!(d.accepts(&scalar_rows(&ints(&[1, 3, 7]))).unwrap());
    assert!(!d.accepts(&scalar_rows(&ints(&[1, 2]))).unwrap());
}

#[test]
fn greater_than_acceptance() {
    let g = build_greater_than();
    assert!(g.accepts(&rows(&[&[2, 1]])).unwrap());
    assert!(!g.accepts(&rows(&[&[1, 2]])).unwrap());
    assert!(!g.accepts(&rows(&[&[1, 1]])).unwrap());
}

#[test]
fn errors() {
    let g = build_greater_than();
    assert!(matches!(g.run(&[]), Err(Error::EmptyInput)));
    assert!(matches!(g.run(&rows(&[&[1]])), Err(Error::DimensionMismatch { .. })));
    let bare = g.clone().without_accept();
    assert!(matches!(
        bare.accepts(&rows(&[&[1, 0]])),
        Err(Error::MissingAcceptVector)
    ));
    assert!(Uhat::<Rat>::new(1, PosEncoding::none(), vec![Layer::Relu { coord: 2 }], None).is_err());
    assert!(Uhat::<Rat>::new(1, PosEncoding::none(), vec![], Some(ints(&[1]))).is_err());
}

#[test]
fn standard_positional_rows() {
    let pe = PosEncoding {
        standard: true,
        predicates: vec![PredicateDef::builtin("evenpos", Builtin::EvenPos)],
    };
    let r: Vec<Vec<Rat>> = pe.rows(2).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(
        r[1][..4],
        [Rat::from(2), Rat::from(3), Rat::new(1, 2).unwrap(), Rat::one()]
    );
    assert_eq!(r[1][4], Rat::one());
    assert_eq!(r[2][4], Rat::zero());
}

#[test]
fn trace_keeps_positional_block() {
    let d = build_double();
    let pe_only = PosEncoding::standard();
    let u = Uhat::<Rat>::new(
        1,
        pe_only.clone(),
        vec![Layer::Affine {
            map: AffineMap::identity(5),
        }],
        None,
    )
    .unwrap();
    let tr = u.trace(&scalar_rows(&ints(&[4, 5]))).unwrap();
    let pe_rows: Vec<Vec<Rat>> = pe_only.rows(2).unwrap();
    for stage in &tr {
        for (row, p) in stage.iter().zip(&pe_rows) {
            assert_eq!(&row[..4], &p[..]);
        }
    }
    assert_eq!(d.trace(&scalar_rows(&ints(&[1]))).unwrap().len(), 3);
}

#[test]
fn compose_with_identity() {
    let d = build_double();
    let id = Uhat::<Rat>::new(1, PosEncoding::none(), vec![], None).unwrap();
    let composed = id.compose(&d).unwrap();
    for v in [[1, 3, 7], [1, 2, 9], [-1, 0, 5]] {
        let data = scalar_rows(&ints(&v));
        assert_eq!(composed.run(&data).unwrap(), d.run(&data).unwrap());
        assert_eq!(composed.accepts(&data).unwrap(), d.accepts(&data).unwrap());
    }
    let wide = Uhat::<Rat>::new(2, PosEncoding::none(), vec![], None).unwrap();
    assert!(id.compose(&wide).is_err());
}

#[test]
fn compose_merges_standard_blocks() {
    let a = Uhat::<Rat>::new(1, PosEncoding::standard(), vec![], None).unwrap();
    let b = Uhat::<Rat>::new(1, PosEncoding::standard(), vec![], None).unwrap();
    let c = a.compose(&b).unwrap();
    assert_eq!(c.pe().width(), 4);
    let n = Uhat::<Rat>::new(1, PosEncoding::none(), vec![], None).unwrap();
    assert!(n
        .compose(&Uhat::new(2, PosEncoding::standard(), vec![], None).unwrap())
        .is_err());
}

#[test]
fn json_roundtrip() {
    for u in [build_double(), build_greater_than()] {
        let text = u.to_json();
        let back = Uhat::<Rat>::from_json(&text).unwrap();
        assert_eq!(back, u);
        assert_eq!(back.to_json(), text);
        assert!(matches!(AnyUhat::from_json(&text).unwrap(), AnyUhat::Rational(_)));
    }
    let q = lift_uhat::<QuadRat>(&build_double());
    let text = q.to_json();
    assert!(text.contains("\"Qsqrt2\""));
    assert!(Uhat::<Rat>::from_json(&text).is_err());
    assert_eq!(Uhat::<QuadRat>::from_json(&text).unwrap(), q);
}

#[test]
fn json_rejects_bad_widths() {
    let text = build_double().to_json().replacen("\"0\",\n", "", 1);
    assert!(Uhat::<Rat>::from_json(&text).is_err());
}

proptest! {
    #[test]
    fn double_decides_all_pairs(v in proptest::collection::vec((-6i64..7, 1i64..4), 1..5)) {
        let r: Vec<Rat> = v.iter().map(|&(p, q)| Rat::new(p, q).unwrap()).collect();
        let d = build_double();
        prop_assert_eq!(d.accepts(&scalar_rows(&r)).unwrap(), crate::examples::double_all_pairs(&r));
    }

    #[test]
    fn runs_are_deterministic(v in proptest::collection::vec(-5i64..6, 1..6)) {
        let d = build_double();
        let data = scalar_rows(&ints(&v));
        prop_assert_eq!(d.run(&data).unwrap(), d.run(&data).unwrap());
    }
}
