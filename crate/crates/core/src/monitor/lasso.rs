//! Lasso-shaped control: a stem followed by a cycle.

use crate::formula::Formula;

/// States `0..stem` are visited once, then `stem..stem + period` repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub stem: usize,
    pub period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Lasso {
    pub const POINT: Lasso = Lasso { stem: 0, period: 1 };

    pub fn new(stem: usize, period: usize) -> Self {
        assert!(period >= 1, "lasso period must be positive");
        Lasso { stem, period }
    }

    pub fn states(&self) -> usize {
        self.stem + self.period
    }

    /// Index of the control state occupied after `k` moves from state 0.
    pub fn position(&self, k: usize) -> usize {
        if k < self.stem {
            k
        } else {
            self.stem + (k - self.stem) % self.period
        }
    }

    pub fn successors(&self) -> Vec<usize> {
        (0..self.states())
            .map(|q| if q + 1 < self.states() { q + 1 } else { self.stem })
            .collect()
    }

    /// Lasso of the synchronous product.
    pub fn product(self, other: Lasso) -> Lasso {
        let g = gcd(self.period, other.period);
        Lasso::new(self.stem.max(other.stem), self.period / g * other.period)
    }

    /// Make the final state loop back to the penultimate one.
    pub fn loop_back(self) -> Lasso {
        let last = self.states() - 1;
        if last == 0 {
            Lasso::POINT
        } else if self.period == 1 {
            Lasso::new(self.stem - 1, 2)
        } else {
            Lasso::new(self.stem + self.period - 2, 2)
        }
    }

    /// Shape of the walk from state 0 through a successor table.
    pub fn of_successors(next: &[usize]) -> Lasso {
        let mut seen = vec![usize::MAX; next.len()];
        let mut q = 0;
        let mut k = 0;
        while seen[q] == usize::MAX {
            seen[q] = k;
            q = next[q];
            k += 1;
        }
        Lasso::new(seen[q], k - seen[q])
    }

    /// Control structure prescribed by the formula's syntax: a two-state
    /// lasso per atom, products for binary operators, one delay state per
    /// `X`, and a loop from the final state to the penultimate one for the
    /// looping operators.
    pub fn structural(f: &Formula) -> Lasso {
        use Formula::*;
        match f {
            True | False => Lasso::POINT,
            Atom(_) => Lasso::new(1, 1),
            Not(a) => Lasso::structural(a),
            And(a, b) | Or(a, b) => Lasso::structural(a).product(Lasso::structural(b)),
            Next(a) => {
                let l = Lasso::structural(a);
                Lasso::new(l.stem + 1, l.period)
            }
            Until(a, b) | Release(a, b) => Lasso::structural(a)
                .product(Lasso::structural(b))
                .loop_back(),
            Eventually(a) | Always(a) => match (f, &**a) {
                (Eventually(_), Always(inner)) | (Always(_), Eventually(inner)) => {
                    Lasso::structural(inner).loop_back()
                }
                _ => Lasso::structural(a).loop_back(),
            },
        }
    }
}
