//! Boolean reward monitors: the crisp special case, built as a DFA over
//! progression residuals.
//!
//! States are discovered lazily: a residual is a set of obligation sets
//! (a positive DNF over "holds from the next position" obligations), and each
//! (state, letter) transition is computed on first use and cached.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use super::nnf::{Node, NodeId, Nnf};
use super::MonitorError;
use crate::formula::Formula;
use crate::scalar::Scalar;

/// Atom limit for [`BooleanMonitor::explore`].
pub const EXPLORE_ATOMS: usize = 16;

type Obl = u32;
type Mono = Vec<Obl>;
type Residual = BTreeSet<Mono>;

fn obl(node: NodeId, weak: bool) -> Obl {
    node << 1 | weak as u32
}

fn implied_by(sub: &Mono, sup: &Mono) -> bool {
    sub.iter()
        .all(|&o| sup.contains(&o) || (o & 1 == 1 && sup.contains(&(o & !1))))
}

fn minimize(r: Residual) -> Residual {
    let all: Vec<Mono> = r.into_iter().collect();
    all.iter()
        .enumerate()
        .filter(|(i, m)| {
            !all.iter().enumerate().any(|(j, k)| {
                j != *i && implied_by(k, m) && (!implied_by(m, k) || j < *i)
            })
        })
        .map(|(_, m)| m.clone())
        .collect()
}

fn merge(a: &Mono, b: &Mono) -> Mono {
    let mut m: Mono = a.iter().chain(b).copied().collect();
    m.sort_unstable();
    m.dedup();
    m.dedup_by(|later, earlier| *later >> 1 == *earlier >> 1);
    m
}

fn and(a: &Residual, b: &Residual) -> Residual {
    let mut out = Residual::new();
    for x in a {
        for y in b {
            out.insert(merge(x, y));
        }
    }
    minimize(out)
}

fn or(mut a: Residual, b: Residual) -> Residual {
    a.extend(b);
    minimize(a)
}

fn top() -> Residual {
    Residual::from([Vec::new()])
}

/// Runtime state of a [`BooleanMonitor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BrmState {
    pub state: u32,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct BooleanMonitor {
    formula: Formula,
    nnf: Nnf,
    residuals: Vec<Residual>,
    index: FxHashMap<Residual, u32>,
    accepting: Vec<bool>,
    transitions: FxHashMap<(u32, u64), u32>,
}

impl BooleanMonitor {
    pub fn new(f: &Formula) -> Result<Self, MonitorError> {
        let atoms: Vec<String> = f.atoms().into_iter().map(String::from).collect();
        if atoms.len() > 64 {
            return Err(MonitorError::Invalid(format!(
                "{} atoms; Boolean monitors support at most 64",
                atoms.len()
            )));
        }
        let mut nnf = Nnf::new(atoms);
        let root = nnf.build(f, false);
        let mut m = BooleanMonitor {
            formula: f.clone(),
            nnf,
            residuals: Vec::new(),
            index: FxHashMap::default(),
            accepting: Vec::new(),
            transitions: FxHashMap::default(),
        };
        m.intern(Residual::from([vec![obl(root, false)]]));
        Ok(m)
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn atoms(&self) -> &[String] {
        &self.nnf.atoms
    }

    /// Number of states discovered so far.
    pub fn num_states(&self) -> usize {
        self.residuals.len()
    }

    fn intern(&mut self, r: Residual) -> u32 {
        if let Some(&q) = self.index.get(&r) {
            return q;
        }
        let q = self.residuals.len() as u32;
        self.accepting
            .push(r.iter().any(|m| m.iter().all(|&o| o & 1 == 1)));
        self.residuals.push(r.clone());
        self.index.insert(r, q);
        q
    }

    fn unfold(&self, node: NodeId, letter: u64) -> Residual {
        let single = |n: NodeId, weak: bool| match (self.nnf.node(n), weak) {
            (Node::True, true) => top(),
            (Node::False, false) => Residual::new(),
            _ => Residual::from([vec![obl(n, weak)]]),
        };
        match self.nnf.node(node) {
            Node::True => top(),
            Node::False => Residual::new(),
            Node::Lit(a, pos) => {
                if (letter >> a & 1 == 1) == pos {
                    top()
                } else {
                    Residual::new()
                }
            }
            Node::And(a, b) => and(&self.unfold(a, letter), &self.unfold(b, letter)),
            Node::Or(a, b) => or(self.unfold(a, letter), self.unfold(b, letter)),
            Node::Next { weak, body } => single(body, weak),
            Node::Until(a, b) => or(
                self.unfold(b, letter),
                and(&self.unfold(a, letter), &single(node, false)),
            ),
            Node::Release(a, b) => and(
                &self.unfold(b, letter),
                &or(self.unfold(a, letter), single(node, true)),
            ),
            Node::Eventually(a) => or(self.unfold(a, letter), single(node, false)),
            Node::Always(a) => and(&self.unfold(a, letter), &single(node, true)),
        }
    }

    fn letter<S: Scalar>(&self, labels: &[S]) -> Result<u64, MonitorError> {
        if labels.len() != self.nnf.atoms.len() {
            return Err(MonitorError::LabelCount {
                expected: self.nnf.atoms.len(),
                got: labels.len(),
            });
        }
        let mut bits = 0u64;
        for (i, v) in labels.iter().enumerate() {
            if !v.is_crisp() {
                return Err(MonitorError::NonCrispLabel {
                    atom: self.nnf.atoms[i].clone(),
                    value: v.to_string(),
                });
            }
            if *v == S::one() {
                bits |= 1 << i;
            }
        }
        Ok(bits)
    }

    fn advance(&mut self, q: u32, letter: u64) -> u32 {
        if let Some(&t) = self.transitions.get(&(q, letter)) {
            return t;
        }
        let mut next = Residual::new();
        for m in self.residuals[q as usize].clone() {
            let mut prod = top();
            for o in m {
                prod = and(&prod, &self.unfold(o >> 1, letter));
            }
            next = or(next, prod);
        }
        let t = self.intern(next);
        self.transitions.insert((q, letter), t);
        t
    }

    /// Consume the first letter. Labels follow [`BooleanMonitor::atoms`].
    pub fn init_slice<S: Scalar>(&mut self, labels: &[S]) -> Result<BrmState, MonitorError> {
        let mut st = BrmState { state: 0, steps: 0 };
        self.step_slice(&mut st, labels)?;
        Ok(st)
    }

    pub fn step_slice<S: Scalar>(
        &mut self,
        st: &mut BrmState,
        labels: &[S],
    ) -> Result<(), MonitorError> {
        let letter = self.letter(labels)?;
        st.state = self.advance(st.state, letter);
        st.steps += 1;
        Ok(())
    }

    /// Whether the prefix read so far satisfies the formula.
    pub fn output(&self, st: &BrmState) -> bool {
        self.accepting[st.state as usize]
    }

    /// No continuation can satisfy the formula any more.
    pub fn is_violated(&self, st: &BrmState) -> bool {
        self.residuals[st.state as usize].is_empty()
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    /// Discover every reachable state by trying all `2^|atoms|` letters.
    pub fn explore(&mut self) -> Result<(), MonitorError> {
        let n = self.nnf.atoms.len();
        if n > EXPLORE_ATOMS {
            return Err(MonitorError::Invalid(format!(
                "{n} atoms; full exploration supports at most {EXPLORE_ATOMS}"
            )));
        }
        let mut q = 0;
        while q < self.residuals.len() as u32 {
            for letter in 0..1u64 << n {
                self.advance(q, letter);
            }
            q += 1;
        }
        Ok(())
    }

    /// Transitions found so far, grouped as `(from, to, letters)` and sorted.
    fn edges(&self) -> Vec<(u32, u32, Vec<u64>)> {
        let mut grouped: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
        for (&(from, letter), &to) in &self.transitions {
            grouped.entry((from, to)).or_default().push(letter);
        }
        grouped
            .into_iter()
            .map(|((f, t), mut ls)| {
                ls.sort_unstable();
                (f, t, ls)
            })
            .collect()
    }

    fn letter_name(&self, letter: u64) -> String {
        let lits: Vec<String> = self
            .nnf
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| if letter >> i & 1 == 1 { a.clone() } else { format!("!{a}") })
            .collect();
        format!("{{{}}}", lits.join(","))
    }

    /// States discovered so far with their acceptance flags and transitions.
    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges()
            .into_iter()
            .map(|(f, t, ls)| json!({ "from": f, "to": t, "letters": ls }))
            .collect();
        json!({
            "formula": self.formula.to_string(),
            "atoms": self.nnf.atoms,
            "initial_state": 0,
            "accepting": self.accepting,
            "transitions": edges,
        })
    }

    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph brm {\n  rankdir=LR;\n");
        out.push_str(&format!("  label=\"{}\";\n", esc(&self.formula.to_string())));
        out.push_str("  start [shape=point];\n  start -> q0;\n");
        for (q, &acc) in self.accepting.iter().enumerate() {
            let shape = if acc { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{q} [shape={shape}];\n"));
        }
        for (f, t, ls) in self.edges() {
            let names: Vec<String> = ls.iter().map(|&l| esc(&self.letter_name(l))).collect();
            out.push_str(&format!("  q{f} -> q{t} [label=\"{}\"];\n", names.join("\\n")));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explore_closes_the_transition_table() {
        let mut m = BooleanMonitor::new(&parse("a U b").unwrap()).unwrap();
        m.explore().unwrap();
        let n = m.num_states();
        let j = m.to_json();
        let letters: usize = j["transitions"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["letters"].as_array().unwrap().len())
            .sum();
        assert_eq!(letters, n * 4);
        // Waiting (also the initial state), satisfied, dead.
        assert_eq!(n, 3);
        assert_eq!(m.to_dot().matches("doublecircle").count(), 1);
    }
    use crate::formula::parse;

    fn outputs(f: &str, trace: &[&[f64]]) -> Vec<bool> {
        let mut m = BooleanMonitor::new(&parse(f).unwrap()).unwrap();
        let mut st = m.init_slice(trace[0]).unwrap();
        let mut out = vec![m.output(&st)];
        for l in &trace[1..] {
            m.step_slice(&mut st, l).unwrap();
            out.push(m.output(&st));
        }
        out
    }

    #[test]
    fn eventually_and_always() {
        assert_eq!(outputs("F a", &[&[0.0], &[1.0], &[0.0]]), vec![false, true, true]);
        assert_eq!(outputs("G a", &[&[1.0], &[1.0], &[0.0]]), vec![true, true, false]);
    }

    #[test]
    fn next_strong_and_weak() {
        assert_eq!(outputs("X a", &[&[0.0], &[1.0]]), vec![false, true]);
        assert_eq!(outputs("!X a", &[&[0.0], &[1.0]]), vec![true, false]);
    }

    #[test]
    fn violation_is_absorbing() {
        let mut m = BooleanMonitor::new(&parse("G !h").unwrap()).unwrap();
        let mut st = m.init_slice(&[0.0]).unwrap();
        assert!(!m.is_violated(&st));
        m.step_slice(&mut st, &[1.0]).unwrap();
        assert!(m.is_violated(&st));
        m.step_slice(&mut st, &[0.0]).unwrap();
        assert!(m.is_violated(&st));
        assert!(!m.output(&st));
    }

    #[test]
    fn rejects_fuzzy_labels() {
        let mut m = BooleanMonitor::new(&parse("F a").unwrap()).unwrap();
        assert!(matches!(
            m.init_slice(&[0.5]),
            Err(MonitorError::NonCrispLabel { .. })
        ));
    }
}
