//! Monitors and the reference evaluator checked against a separately written
//! recursive evaluator and against hand-computed values.

use std::collections::BTreeMap;

use proptest::prelude::*;
use qmon_core::formula::Formula;
use qmon_core::monitor::{synth, BooleanMonitor};
use qmon_core::semantics::{evaluate, evaluate_prefixes, Trace};
use qmon_core::{parse, Rational};

type Rows = Vec<BTreeMap<String, f64>>;

/// Straight recursion on the one-step unfoldings; exponential but
/// independent of the library's max/min formulation.
fn naive(f: &Formula, t: &Rows, i: usize) -> f64 {
    use Formula::*;
    let n = t.len();
    let later = |g: &Formula, end: f64| if i < n { naive(g, t, i + 1) } else { end };
    match f {
        True => 1.0,
        False => 0.0,
        Atom(p) => t[i - 1][p],
        Not(a) => 1.0 - naive(a, t, i),
        And(a, b) => naive(a, t, i).min(naive(b, t, i)),
        Or(a, b) => naive(a, t, i).max(naive(b, t, i)),
        Next(a) => later(a, 0.0),
        Until(a, b) => naive(b, t, i).max(naive(a, t, i).min(later(f, 0.0))),
        Release(a, b) => naive(b, t, i).min(naive(a, t, i).max(later(f, 1.0))),
        Eventually(a) => naive(a, t, i).max(later(f, 0.0)),
        Always(a) => naive(a, t, i).min(later(f, 1.0)),
    }
}

fn rows(spec: &[&[(&str, f64)]]) -> Rows {
    spec.iter()
        .map(|r| r.iter().map(|(a, v)| (a.to_string(), *v)).collect())
        .collect()
}

fn figure_rows() -> Rows {
    rows(&[
        &[("a", 0.0), ("b", 0.0)],
        &[("a", 0.8), ("b", 0.2)],
        &[("a", 0.8), ("b", 0.9)],
    ])
}

#[test]
fn figure_value_at_first_position() {
    let f = parse("!a U (a & F b)").unwrap();
    let t = Trace::from_steps(&figure_rows()).unwrap();
    assert_eq!(evaluate(&f, &t, 1).unwrap(), 0.8);
    assert_eq!(naive(&f, &figure_rows(), 1), 0.8);
}

#[test]
fn figure_monitor_prefix_values() {
    // Prefix of length 2: only the witness j = 2 contributes,
    // min(1 - a1, a2, max(b2)) = min(1, 0.8, 0.2) = 0.2.
    let f = parse("!a U (a & F b)").unwrap();
    let t = Trace::from_steps(&figure_rows()).unwrap();
    let m = synth::<f64>(&f).unwrap();
    assert_eq!(m.run(&t).unwrap(), vec![0.0, 0.2, 0.8]);
    let by_naive: Vec<f64> = (1..=3)
        .map(|k| naive(&f, &figure_rows()[..k].to_vec(), 1))
        .collect();
    assert_eq!(by_naive, vec![0.0, 0.2, 0.8]);
}

#[test]
fn figure_monitor_in_single_precision_and_exact() {
    let f = parse("!a U (a & F b)").unwrap();
    let mut t32 = Trace::<f32>::empty(["a", "b"]);
    for r in [[0.0, 0.0], [0.8, 0.2], [0.8, 0.9]] {
        t32.push_row(r.to_vec()).unwrap();
    }
    assert_eq!(synth::<f32>(&f).unwrap().run(&t32).unwrap(), vec![0.0, 0.2, 0.8]);

    let q = |n, d| Rational::new(n, d);
    let mut tq = Trace::<Rational>::empty(["a", "b"]);
    for r in [[q(0, 1), q(0, 1)], [q(4, 5), q(1, 5)], [q(4, 5), q(9, 10)]] {
        tq.push_row(r.to_vec()).unwrap();
    }
    let got = synth::<Rational>(&f).unwrap().run(&tq).unwrap();
    assert_eq!(got, vec![q(0, 1), q(1, 5), q(4, 5)]);
}

#[test]
fn always_tracks_the_running_minimum() {
    let f = parse("G balanced").unwrap();
    let t = Trace::from_steps(&rows(&[
        &[("balanced", 1.0)],
        &[("balanced", 0.6)],
        &[("balanced", 0.8)],
    ]))
    .unwrap();
    assert_eq!(synth::<f64>(&f).unwrap().run(&t).unwrap(), vec![1.0, 0.6, 0.6]);
}

#[test]
fn eventually_tracks_the_running_maximum() {
    let f = parse("F b").unwrap();
    let t = Trace::from_steps(&rows(&[&[("b", 0.0)], &[("b", 0.3)], &[("b", 0.1)]])).unwrap();
    let m = synth::<f64>(&f).unwrap();
    assert_eq!(m.registers().len(), 1);
    assert_eq!(m.run(&t).unwrap(), vec![0.0, 0.3, 0.3]);
}

#[test]
fn until_with_immediate_witness() {
    // The right operand holds at the first letter.
    let f = parse("a U b").unwrap();
    let t = Trace::from_steps(&rows(&[&[("a", 0.0), ("b", 1.0)]])).unwrap();
    assert_eq!(synth::<f64>(&f).unwrap().run(&t).unwrap(), vec![1.0]);
}

#[test]
fn eventually_of_next() {
    let f = parse("F X p").unwrap();
    let t = Trace::from_steps(&rows(&[&[("p", 0.4)], &[("p", 0.7)], &[("p", 0.2)]])).unwrap();
    let want: Vec<f64> = (1..=3).map(|k| naive(&f, &t_rows(&t, k), 1)).collect();
    assert_eq!(want, vec![0.0, 0.7, 0.7]);
    assert_eq!(synth::<f64>(&f).unwrap().run(&t).unwrap(), want);
}

fn t_rows(t: &Trace<f64>, k: usize) -> Rows {
    (1..=k)
        .map(|i| {
            t.atoms()
                .iter()
                .map(|a| (a.clone(), t.value(i, a).unwrap()))
                .collect()
        })
        .collect()
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::atom("a")),
        Just(Formula::atom("b")),
        Just(Formula::atom("c")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
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

fn arb_rows(crisp: bool) -> impl Strategy<Value = Rows> {
    let val = if crisp {
        prop_oneof![Just(0.0), Just(1.0)].boxed()
    } else {
        (0u32..=20).prop_map(|k| k as f64 / 20.0).boxed()
    };
    prop::collection::vec((val.clone(), val.clone(), val), 1..7).prop_map(|v| {
        v.into_iter()
            .map(|(a, b, c)| {
                [("a", a), ("b", b), ("c", c)]
                    .into_iter()
                    .map(|(k, x)| (k.to_string(), x))
                    .collect()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn evaluator_matches_recursion(f in arb_formula(), r in arb_rows(false)) {
        let t = Trace::from_steps(&r).unwrap();
        for i in 1..=t.len() {
            let got = evaluate(&f, &t, i).unwrap();
            prop_assert!((got - naive(&f, &r, i)).abs() < 1e-12);
        }
    }

    #[test]
    fn monitor_matches_every_prefix(f in arb_formula(), r in arb_rows(false)) {
        let t = Trace::from_steps(&r).unwrap();
        let got = synth::<f64>(&f).unwrap().run(&t).unwrap();
        for k in 1..=t.len() {
            prop_assert!((got[k - 1] - naive(&f, &r[..k].to_vec(), 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_monitor_matches_exact_semantics(f in arb_formula(), r in arb_rows(false)) {
        let mut t = Trace::<Rational>::empty(["a", "b", "c"]);
        for row in &r {
            t.push_row(row.values().map(|v| Rational::new((v * 20.0).round() as i64, 20)).collect()).unwrap();
        }
        let got = synth::<Rational>(&f).unwrap().run(&t).unwrap();
        prop_assert_eq!(got, evaluate_prefixes(&f, &t).unwrap());
    }

    #[test]
    fn boolean_monitor_agrees_on_crisp_traces(f in arb_formula(), r in arb_rows(true)) {
        let t = Trace::from_steps(&r).unwrap();
        let q = synth::<f64>(&f).unwrap().run(&t).unwrap();
        let mut b = BooleanMonitor::new(&f).unwrap();
        let atoms: Vec<String> = b.atoms().to_vec();
        let mut st = None;
        for (k, row) in r.iter().enumerate() {
            let labels: Vec<f64> = atoms.iter().map(|a| row[a]).collect();
            match st.as_mut() {
                None => st = Some(b.init_slice(&labels).unwrap()),
                Some(s) => b.step_slice(s, &labels).unwrap(),
            }
            let out = if b.output(st.as_ref().unwrap()) { 1.0 } else { 0.0 };
            prop_assert_eq!(q[k], out);
        }
    }

    #[test]
    fn values_stay_in_unit_interval(f in arb_formula(), r in arb_rows(false)) {
        let t = Trace::from_steps(&r).unwrap();
        for v in synth::<f64>(&f).unwrap().run(&t).unwrap() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
