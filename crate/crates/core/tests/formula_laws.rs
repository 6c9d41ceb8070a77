//! Algebraic laws of the syntax layer: printing, normal form, safety.

use proptest::prelude::*;
use qmon_core::formula::Formula;
use qmon_core::monitor::Lasso;
use qmon_core::semantics::{evaluate_all, Trace};
use qmon_core::{parse, synth};

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::atom("p")),
        Just(Formula::atom("q_1")),
    ];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::always),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x.and(y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x.or(y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x.until(y)),
            (inner.clone(), inner).prop_map(|(x, y)| x.release(y)),
        ]
    })
}

fn arb_trace() -> impl Strategy<Value = Trace<f64>> {
    prop::collection::vec((0u32..=10, 0u32..=10), 1..6).prop_map(|rows| {
        let mut t = Trace::empty(["p", "q_1"]);
        for (x, y) in rows {
            t.push_row(vec![x as f64 / 10.0, y as f64 / 10.0]).unwrap();
        }
        t
    })
}

#[test]
fn unicode_and_ascii_agree() {
    assert_eq!(parse("¬p ∧ (q_1 ∨ p) → p").unwrap(), parse("!p & (q_1 | p) -> p").unwrap());
}

#[test]
fn structural_lasso_of_figure() {
    let f = parse("!a U (a & F b)").unwrap();
    assert_eq!(Lasso::structural(&f).successors(), vec![1, 2, 1]);
    let m = synth::<f64>(&f).unwrap();
    assert_eq!((0..3).map(|q| m.successor(q)).collect::<Vec<_>>(), vec![1, 2, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_parse_round_trip(f in arb_formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn nnf_is_idempotent_and_preserves_safety(f in arb_formula()) {
        let n = f.to_nnf();
        prop_assert_eq!(n.to_nnf(), n.clone());
        prop_assert_eq!(f.is_safe(), n.is_safe());
    }

    #[test]
    fn nnf_preserves_values(f in arb_formula(), t in arb_trace()) {
        let a = evaluate_all(&f, &t).unwrap();
        let b = evaluate_all(&f.to_nnf(), &t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn negation_is_complement(f in arb_formula(), t in arb_trace()) {
        let a = evaluate_all(&f, &t).unwrap();
        let b = evaluate_all(&f.clone().not(), &t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn temporal_dualities(f in arb_formula(), g in arb_formula(), t in arb_trace()) {
        let close = |x: &Formula, y: &Formula| {
            let (a, b) = (evaluate_all(x, &t).unwrap(), evaluate_all(y, &t).unwrap());
            a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12)
        };
        prop_assert!(close(&f.clone().eventually(), &Formula::True.until(f.clone())));
        prop_assert!(close(&f.clone().always(), &Formula::False.release(f.clone())));
        prop_assert!(close(
            &f.clone().release(g.clone()),
            &f.clone().not().until(g.clone().not()).not()
        ));
    }

    #[test]
    fn size_counts_nodes(f in arb_formula()) {
        let nodes = f.to_string().matches(|c: char| "!&|XURFG".contains(c)).count();
        let leaves = f.to_string().split(|c: char| !c.is_ascii_lowercase() && c != '_' && !c.is_ascii_digit())
            .filter(|w| !w.is_empty())
            .count();
        prop_assert_eq!(f.size(), nodes + leaves);
    }

    #[test]
    fn monitors_are_lassos(f in arb_formula()) {
        let m = synth::<f64>(&f).unwrap();
        let l = m.lasso();
        prop_assert_eq!(l.states(), m.num_states());
        prop_assert!(m.successor(m.num_states() - 1) == l.stem);
    }
}
