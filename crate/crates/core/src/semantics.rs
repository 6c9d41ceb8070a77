//! Quantitative semantics over finite traces of `[0, 1]` labels.
//!
//! This is the reference evaluator the monitors are checked against; it
//! follows the max/min definitions directly and favours clarity over speed
//! (`O(|f| · n²)` because of `U` and `R`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::formula::Formula;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("step {step}: label for '{atom}' is {value}, outside [0, 1]")]
    OutOfRange {
        step: usize,
        atom: String,
        value: String,
    },
    #[error("step {step}: missing label for '{atom}'")]
    MissingAtom { step: usize, atom: String },
    #[error("step {step}: label for '{atom}' not declared in the atom header")]
    UndeclaredAtom { step: usize, atom: String },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("trace file has no atoms header")]
    MissingHeader,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("index {index} outside trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("atom '{0}' does not occur in the trace")]
    UnknownAtom(String),
}

/// Anything that can answer "what is the label of this atom right now".
pub trait Labels<S> {
    fn label(&self, atom: &str) -> Option<S>;
}

impl<S: Copy> Labels<S> for BTreeMap<String, S> {
    fn label(&self, atom: &str) -> Option<S> {
        self.get(atom).copied()
    }
}

impl<S: Copy> Labels<S> for HashMap<String, S> {
    fn label(&self, atom: &str) -> Option<S> {
        self.get(atom).copied()
    }
}

impl<S: Copy> Labels<S> for [(&str, S)] {
    fn label(&self, atom: &str) -> Option<S> {
        self.iter().find(|(a, _)| *a == atom).map(|(_, v)| *v)
    }
}

impl<S: Copy, const N: usize> Labels<S> for [(&str, S); N] {
    fn label(&self, atom: &str) -> Option<S> {
        self.as_slice().label(atom)
    }
}

/// One position of a [`Trace`].
#[derive(Debug, Clone, Copy)]
pub struct Letter<'a, S> {
    atoms: &'a [String],
    values: &'a [S],
}

impl<'a, S: Copy> Letter<'a, S> {
    pub fn values(&self) -> &'a [S] {
        self.values
    }
}

impl<S: Copy> Labels<S> for Letter<'_, S> {
    fn label(&self, atom: &str) -> Option<S> {
        self.atoms
            .binary_search_by(|a| a.as_str().cmp(atom))
            .ok()
            .map(|i| self.values[i])
    }
}

/// A finite sequence of labellings over a fixed, sorted atom set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    atoms: Vec<String>,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Trace<S> {
    pub fn empty(atoms: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let set: BTreeSet<String> = atoms.into_iter().map(Into::into).collect();
        Trace {
            atoms: set.into_iter().collect(),
            rows: Vec::new(),
        }
    }

    /// Build from per-step maps. Every step must label exactly the atoms of
    /// the first step.
    pub fn from_steps(steps: &[BTreeMap<String, S>]) -> Result<Self, TraceError> {
        let atoms: Vec<String> = match steps.first() {
            Some(s) => s.keys().cloned().collect(),
            None => Vec::new(),
        };
        let mut t = Trace {
            atoms,
            rows: Vec::new(),
        };
        for s in steps {
            t.push_map(s)?;
        }
        Ok(t)
    }

    pub fn push_map(&mut self, step: &BTreeMap<String, S>) -> Result<(), TraceError> {
        let idx = self.rows.len() + 1;
        if let Some(extra) = step.keys().find(|k| self.atoms.binary_search(k).is_err()) {
            return Err(TraceError::UndeclaredAtom {
                step: idx,
                atom: extra.clone(),
            });
        }
        let mut row = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let v = *step.get(a).ok_or_else(|| TraceError::MissingAtom {
                step: idx,
                atom: a.clone(),
            })?;
            if !v.in_unit() {
                return Err(TraceError::OutOfRange {
                    step: idx,
                    atom: a.clone(),
                    value: v.to_string(),
                });
            }
            row.push(v);
        }
        self.rows.push(row);
        Ok(())
    }

    /// Append a row whose values are ordered like [`Trace::atoms`].
    pub fn push_row(&mut self, row: Vec<S>) -> Result<(), TraceError> {
        let step = self.rows.len() + 1;
        if row.len() != self.atoms.len() {
            let atom = self
                .atoms
                .get(row.len())
                .cloned()
                .unwrap_or_else(|| "<extra>".into());
            return Err(TraceError::MissingAtom { step, atom });
        }
        if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !v.in_unit()) {
            return Err(TraceError::OutOfRange {
                step,
                atom: self.atoms[i].clone(),
                value: v.to_string(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> Letter<'_, S> {
        Letter {
            atoms: &self.atoms,
            values: &self.rows[i - 1],
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter<'_, S>> {
        self.rows.iter().map(|r| Letter {
            atoms: &self.atoms,
            values: r,
        })
    }

    /// Label of `atom` at 1-based position `i`.
    pub fn value(&self, i: usize, atom: &str) -> Option<S> {
        let col = self.atoms.binary_search_by(|a| a.as_str().cmp(atom)).ok()?;
        self.rows.get(i.checked_sub(1)?).map(|r| r[col])
    }

    pub fn prefix(&self, len: usize) -> Trace<S> {
        Trace {
            atoms: self.atoms.clone(),
            rows: self.rows[..len].to_vec(),
        }
    }

    /// Parse the line-oriented JSON format: a header `{"atoms": [...]}`
    /// followed by one `{"atom": value, ...}` object per step. Blank lines
    /// are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut trace: Option<Trace<S>> = None;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let json_err = |message: String| TraceError::Json {
                line: line_no,
                message,
            };
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| json_err(e.to_string()))?;
            let obj = value
                .as_object()
                .ok_or_else(|| json_err("expected a JSON object".into()))?;
            match trace.as_mut() {
                None => {
                    let atoms = obj
                        .get("atoms")
                        .and_then(|a| a.as_array())
                        .ok_or(TraceError::MissingHeader)?;
                    let names = atoms
                        .iter()
                        .map(|a| a.as_str().map(str::to_string))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| json_err("atom names must be strings".into()))?;
                    trace = Some(Trace::empty(names));
                }
                Some(t) => {
                    let mut step = BTreeMap::new();
                    for (k, v) in obj {
                        let x = v
                            .as_f64()
                            .or_else(|| v.as_bool().map(|b| if b { 1.0 } else { 0.0 }))
                            .ok_or_else(|| json_err(format!("label for '{k}' is not a number")))?;
                        let s = S::from_f64_checked(x)
                            .ok_or_else(|| json_err(format!("label for '{k}' not representable")))?;
                        step.insert(k.clone(), s);
                    }
                    t.push_map(&step)?;
                }
            }
        }
        trace.ok_or(TraceError::MissingHeader)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::json!({ "atoms": self.atoms }).to_string();
        out.push('\n');
        for r in &self.rows {
            let obj: serde_json::Map<String, serde_json::Value> = self
                .atoms
                .iter()
                .zip(r)
                .map(|(a, v)| (a.clone(), serde_json::json!(v.to_f64_lossy())))
                .collect();
            out.push_str(&serde_json::Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }
}

/// Value of `f` at 1-based position `i` of `trace`.
pub fn evaluate<S: Scalar>(f: &Formula, trace: &Trace<S>, i: usize) -> Result<S, EvalError> {
    if i == 0 || i > trace.len() {
        return Err(EvalError::IndexOutOfRange {
            index: i,
            len: trace.len(),
        });
    }
    Ok(evaluate_all(f, trace)?[i - 1])
}

/// Values of `f` at every position of `trace` (index 0 is position 1).
pub fn evaluate_all<S: Scalar>(f: &Formula, trace: &Trace<S>) -> Result<Vec<S>, EvalError> {
    for a in f.atoms() {
        if trace.atoms.binary_search_by(|x| x.as_str().cmp(a)).is_err() {
            return Err(EvalError::UnknownAtom(a.to_string()));
        }
    }
    let mut memo = HashMap::new();
    Ok(values(f, trace, &mut memo))
}

/// `evaluate(f, λ[1..k], 1)` for `k = 1..=n`: the value a runtime monitor
/// must report after reading `k` letters.
pub fn evaluate_prefixes<S: Scalar>(f: &Formula, trace: &Trace<S>) -> Result<Vec<S>, EvalError> {
    (1..=trace.len())
        .map(|k| evaluate(f, &trace.prefix(k), 1))
        .collect()
}

type Memo<S> = HashMap<*const Formula, Vec<S>>;

fn values<S: Scalar>(f: &Formula, t: &Trace<S>, memo: &mut Memo<S>) -> Vec<S> {
    let key = f as *const Formula;
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let n = t.len();
    let (zero, one) = (S::zero(), S::one());
    use Formula::*;
    let out: Vec<S> = match f {
        True => vec![one; n],
        False => vec![zero; n],
        Atom(p) => (1..=n).map(|i| t.value(i, p).unwrap_or(zero)).collect(),
        Not(a) => values(a, t, memo).into_iter().map(S::complement).collect(),
        And(a, b) => zip(values(a, t, memo), values(b, t, memo), S::min_of),
        Or(a, b) => zip(values(a, t, memo), values(b, t, memo), S::max_of),
        Next(a) => {
            let va = values(a, t, memo);
            (0..n).map(|i| if i + 1 < n { va[i + 1] } else { zero }).collect()
        }
        Until(a, b) => {
            let (va, vb) = (values(a, t, memo), values(b, t, memo));
            (0..n)
                .map(|i| {
                    // max over j of min(b_j, min_{i<=k<j} a_k); empty min is 1.
                    let mut best = zero;
                    let mut guard = one;
                    for j in i..n {
                        best = best.max_of(vb[j].min_of(guard));
                        guard = guard.min_of(va[j]);
                    }
                    best
                })
                .collect()
        }
        Release(a, b) => {
            let (va, vb) = (values(a, t, memo), values(b, t, memo));
            (0..n)
                .map(|i| {
                    let mut worst = one;
                    let mut guard = zero;
                    for j in i..n {
                        worst = worst.min_of(vb[j].max_of(guard));
                        guard = guard.max_of(va[j]);
                    }
                    worst
                })
                .collect()
        }
        Eventually(a) => {
            let va = values(a, t, memo);
            (0..n)
                .map(|i| va[i..].iter().fold(zero, |m, &x| m.max_of(x)))
                .collect()
        }
        Always(a) => {
            let va = values(a, t, memo);
            (0..n)
                .map(|i| va[i..].iter().fold(one, |m, &x| m.min_of(x)))
                .collect()
        }
    };
    memo.insert(key, out.clone());
    out
}

fn zip<S: Copy>(a: Vec<S>, b: Vec<S>, op: impl Fn(S, S) -> S) -> Vec<S> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use num_rational::Rational64;

    fn trace(rows: &[&[(&str, f64)]]) -> Trace<f64> {
        let maps: Vec<BTreeMap<String, f64>> = rows
            .iter()
            .map(|r| r.iter().map(|(a, v)| (a.to_string(), *v)).collect())
            .collect();
        Trace::from_steps(&maps).unwrap()
    }

    fn fig1() -> Trace<f64> {
        trace(&[
            &[("a", 0.0), ("b", 0.0)],
            &[("a", 0.8), ("b", 0.2)],
            &[("a", 0.8), ("b", 0.9)],
        ])
    }

    #[test]
    fn until_on_figure_trace() {
        let f = parse("!a U (a & F b)").unwrap();
        assert_eq!(evaluate(&f, &fig1(), 1).unwrap(), 0.8);
        assert_eq!(evaluate_prefixes(&f, &fig1()).unwrap(), vec![0.0, 0.2, 0.8]);
    }

    #[test]
    fn always_of_balance() {
        let t = trace(&[&[("b", 1.0)], &[("b", 0.6)], &[("b", 0.8)]]);
        let f = parse("G b").unwrap();
        assert_eq!(evaluate_prefixes(&f, &t).unwrap(), vec![1.0, 0.6, 0.6]);
    }

    #[test]
    fn next_is_zero_at_the_end() {
        let t = trace(&[&[("a", 1.0)], &[("a", 1.0)]]);
        let f = parse("X a").unwrap();
        assert_eq!(evaluate_all(&f, &t).unwrap(), vec![1.0, 0.0]);
        assert_eq!(evaluate_all(&parse("!X a").unwrap(), &t).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn release_is_dual_of_until() {
        let t = trace(&[
            &[("a", 0.3), ("b", 0.9)],
            &[("a", 0.7), ("b", 0.4)],
            &[("a", 0.1), ("b", 0.5)],
        ]);
        let r = evaluate_all(&parse("a R b").unwrap(), &t).unwrap();
        let u = evaluate_all(&parse("!(!a U !b)").unwrap(), &t).unwrap();
        for (x, y) in r.iter().zip(&u) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let t = fig1();
        let f = parse("F a").unwrap();
        assert_eq!(
            evaluate(&f, &t, 4),
            Err(EvalError::IndexOutOfRange { index: 4, len: 3 })
        );
        assert_eq!(
            evaluate(&parse("F zz").unwrap(), &t, 1),
            Err(EvalError::UnknownAtom("zz".into()))
        );
        let mut bad = BTreeMap::new();
        bad.insert("a".to_string(), 1.5);
        assert!(matches!(
            Trace::from_steps(&[bad]),
            Err(TraceError::OutOfRange { .. })
        ));
    }

    #[test]
    fn rational_values_are_exact() {
        let mut t = Trace::<Rational64>::empty(["a", "b"]);
        t.push_row(vec![Rational64::new(1, 3), Rational64::new(2, 3)]).unwrap();
        t.push_row(vec![Rational64::new(1, 2), Rational64::new(1, 7)]).unwrap();
        let v = evaluate(&parse("a U b").unwrap(), &t, 1).unwrap();
        assert_eq!(v, Rational64::new(2, 3));
    }

    #[test]
    fn jsonl_round_trip() {
        let t = fig1();
        let text = t.to_jsonl();
        assert!(text.starts_with("{\"atoms\":[\"a\",\"b\"]}"));
        assert_eq!(Trace::<f64>::from_jsonl(&text).unwrap(), t);
        assert_eq!(
            Trace::<f64>::from_jsonl("{\"a\":1}\n"),
            Err(TraceError::MissingHeader)
        );
    }
}
