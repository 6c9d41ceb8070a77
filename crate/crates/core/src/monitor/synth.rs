//! Formula-to-monitor synthesis.

use std::collections::HashMap;

use super::lasso::Lasso;
use super::progression::{last_value, progress, Progressed};
use super::{MonitorError, Qrm};
use crate::formula::Formula;
use crate::scalar::Scalar;

/// Upper bound on distinct progression shapes per temporal subformula.
pub const DEFAULT_SHAPE_LIMIT: usize = 4096;
/// Upper bound on terms in the normal form of one progression step.
pub const DEFAULT_TERM_LIMIT: usize = 1024;

/// Builds monitors bottom-up and reuses the monitor of every subformula it
/// has already built.
///
/// Boolean connectives at the top of a formula become products (`&`, `|`)
/// and complements (`!`) of the operand monitors. Any other subformula gets
/// a progression monitor of its own.
#[derive(Debug)]
pub struct Synthesizer<S> {
    cache: HashMap<Formula, Qrm<S>>,
    constructed: HashMap<Formula, usize>,
    tag: usize,
    shape_limit: usize,
    term_limit: usize,
}

impl<S: Scalar> Default for Synthesizer<S> {
    fn default() -> Self {
        Synthesizer {
            cache: HashMap::new(),
            constructed: HashMap::new(),
            tag: 0,
            shape_limit: DEFAULT_SHAPE_LIMIT,
            term_limit: DEFAULT_TERM_LIMIT,
        }
    }
}

impl<S: Scalar> Synthesizer<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_shape_limit(mut self, limit: usize) -> Self {
        self.shape_limit = limit;
        self
    }

    pub fn with_term_limit(mut self, limit: usize) -> Self {
        self.term_limit = limit;
        self
    }

    /// How many times a monitor for exactly `f` has been constructed.
    pub fn constructions(&self, f: &Formula) -> usize {
        self.constructed.get(f).copied().unwrap_or(0)
    }

    pub fn synth(&mut self, f: &Formula) -> Result<Qrm<S>, MonitorError> {
        if let Some(m) = self.cache.get(f) {
            return Ok(m.clone());
        }
        let mut m = self.construct(f)?;
        m.set_formula(f.clone());
        *self.constructed.entry(f.clone()).or_insert(0) += 1;
        self.cache.insert(f.clone(), m.clone());
        Ok(m)
    }

    fn fresh(&mut self) -> usize {
        self.tag += 1;
        self.tag
    }

    fn construct(&mut self, f: &Formula) -> Result<Qrm<S>, MonitorError> {
        use Formula::*;
        let tag = self.fresh();
        Ok(match f {
            True => Qrm::constant(S::one(), format!("true#{tag}")),
            False => Qrm::constant(S::zero(), format!("false#{tag}")),
            Not(a) => self.synth(a)?.complemented(format!("{f}#{tag}")),
            And(a, b) | Or(a, b) => {
                let (ma, mb) = (self.synth(a)?, self.synth(b)?);
                let rename = self.fresh();
                Qrm::product(&ma, &mb, matches!(f, And(..)), format!("{f}#{tag}"), rename)
            }
            Eventually(a) | Always(a) => match (f, &**a) {
                (Eventually(_), Always(psi)) | (Always(_), Eventually(psi)) => {
                    let p = last_value(psi, f.to_string(), tag, self.term_limit)?;
                    assemble(p, Lasso::structural(f))
                }
                _ => assemble(progress(f, tag, self.shape_limit, self.term_limit)?, Lasso::structural(f)),
            },
            Atom(_) | Next(_) | Until(..) | Release(..) => {
                assemble(progress(f, tag, self.shape_limit, self.term_limit)?, Lasso::structural(f))
            }
        })
    }
}

/// Unroll the progression programs over the product of their own lasso and
/// the structural one.
fn assemble<S: Scalar>(p: Progressed<S>, structural: Lasso) -> Qrm<S> {
    let control = structural.product(p.lasso);
    let programs = (0..control.states())
        .map(|k| p.programs[p.lasso.position(k)].clone())
        .collect();
    Qrm::from_parts(p.atoms, p.registers, control.successors(), programs, p.reward)
        .expect("progression monitor is well formed")
}

/// Build a monitor for `f` with a fresh [`Synthesizer`].
pub fn synth<S: Scalar>(f: &Formula) -> Result<Qrm<S>, MonitorError> {
    Synthesizer::new().synth(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn figure_monitor_shape() {
        let m = synth::<f64>(&parse("!a U (a & F b)").unwrap()).unwrap();
        assert_eq!(m.num_states(), 3);
        assert_eq!(m.successor(0), 1);
        assert_eq!(m.successor(1), 2);
        assert_eq!(m.successor(2), 1);
    }

    #[test]
    fn constants() {
        let m = synth::<f64>(&Formula::True).unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.registers().len(), 1);
        assert_eq!(m.registers()[0].init, 1.0);
        assert_eq!(m.successor(0), 0);
        let st = m.init_slice(&[]).unwrap();
        assert_eq!(m.value(&st), 1.0);
    }

    #[test]
    fn atom_monitor_matches_two_state_lasso() {
        let m = synth::<f64>(&parse("p").unwrap()).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.registers().len(), 1);
        assert_eq!(m.program(0).len(), 1);
        assert!(m.program(1).is_empty());
        assert_eq!(m.successor(1), 1);
    }

    #[test]
    fn shared_subformula_is_built_once() {
        let mut s = Synthesizer::<f64>::new();
        let fb = parse("F b").unwrap();
        let m = s.synth(&parse("F b & F b").unwrap()).unwrap();
        assert_eq!(s.constructions(&fb), 1);
        let names: std::collections::BTreeSet<_> =
            m.registers().iter().map(|r| r.name.clone()).collect();
        assert_eq!(names.len(), m.registers().len());
    }

    #[test]
    fn term_budget_stops_blowup() {
        let f = parse("G ((a U b) R (c U (d R a)))").unwrap();
        assert!(Synthesizer::<f64>::new().synth(&f).is_ok());
        let err = Synthesizer::<f64>::new().with_term_limit(2).synth(&f).unwrap_err();
        assert!(matches!(err, MonitorError::TooManyTerms { limit: 2, .. }), "{err}");
    }
}
