//! Random formulas and traces for property checks.

use rand::Rng;

use crate::formula::Formula;
use crate::scalar::Scalar;
use crate::semantics::Trace;

/// Uniform choice among all constructors, leaves forced at `max_depth`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, atoms: &[&str], max_depth: usize) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..6) {
        0 => Formula::True,
        1 => Formula::False,
        _ => Formula::atom(atoms[rng.gen_range(0..atoms.len())]),
    };
    if max_depth <= 1 {
        return leaf(rng);
    }
    let d = max_depth - 1;
    match rng.gen_range(0..11) {
        0..=2 => leaf(rng),
        3 => random_formula(rng, atoms, d).not(),
        4 => random_formula(rng, atoms, d).and(random_formula(rng, atoms, d)),
        5 => random_formula(rng, atoms, d).or(random_formula(rng, atoms, d)),
        6 => random_formula(rng, atoms, d).next(),
        7 => random_formula(rng, atoms, d).until(random_formula(rng, atoms, d)),
        8 => random_formula(rng, atoms, d).release(random_formula(rng, atoms, d)),
        9 => random_formula(rng, atoms, d).eventually(),
        _ => random_formula(rng, atoms, d).always(),
    }
}

/// Trace of `len` letters with labels on the grid `k / 20`, or in `{0, 1}`
/// when `crisp`. The grid keeps rational traces exact.
pub fn random_trace<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    atoms: &[&str],
    len: usize,
    crisp: bool,
) -> Trace<S> {
    let mut t = Trace::empty(atoms.iter().copied());
    let den = S::from_u32(20).expect("small integer");
    for _ in 0..len {
        let row = (0..t.atoms().len())
            .map(|_| {
                if crisp {
                    if rng.gen_bool(0.5) {
                        S::one()
                    } else {
                        S::zero()
                    }
                } else {
                    S::from_u32(rng.gen_range(0..=20)).expect("small integer") / den
                }
            })
            .collect();
        t.push_row(row).expect("grid labels are in range");
    }
    t
}

/// Strictly smaller formulas to try when shrinking a counterexample.
pub fn shrink_formula(f: &Formula) -> Vec<Formula> {
    use Formula::*;
    let mut out: Vec<Formula> = Vec::new();
    if !matches!(f, True | False) {
        out.push(True);
        out.push(False);
    }
    out.extend(f.children().into_iter().cloned());
    let rebuild = |f: &Formula, i: usize, new: Formula| -> Formula {
        let b = Box::new(new);
        match (f, i) {
            (Not(_), _) => Not(b),
            (Next(_), _) => Next(b),
            (Eventually(_), _) => Eventually(b),
            (Always(_), _) => Always(b),
            (And(_, y), 0) => And(b, y.clone()),
            (And(x, _), _) => And(x.clone(), b),
            (Or(_, y), 0) => Or(b, y.clone()),
            (Or(x, _), _) => Or(x.clone(), b),
            (Until(_, y), 0) => Until(b, y.clone()),
            (Until(x, _), _) => Until(x.clone(), b),
            (Release(_, y), 0) => Release(b, y.clone()),
            (Release(x, _), _) => Release(x.clone(), b),
            _ => unreachable!("leaves have no children"),
        }
    };
    for (i, c) in f.children().into_iter().enumerate() {
        for s in shrink_formula(c) {
            out.push(rebuild(f, i, s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let f = random_formula(&mut rng, &["a", "b"], 5);
            assert!(f.depth() <= 5);
        }
    }

    #[test]
    fn traces_are_on_the_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t: Trace<f64> = random_trace(&mut rng, &["a", "b"], 10, false);
        assert_eq!(t.len(), 10);
        for l in t.letters() {
            for v in l.values() {
                assert!(((v * 20.0).round() - v * 20.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shrink_candidates_are_smaller() {
        let f = crate::formula::parse("a U (b & F a)").unwrap();
        for g in shrink_formula(&f) {
            assert!(g.size() <= f.size() && g != f, "{g}");
        }
    }
}
