//! Randomised property suites over synthesised monitors, with
//! counterexample shrinking.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::compose::{compose, Mode, SpecRewardPair};
use crate::formula::Formula;
use crate::gen::{random_formula, random_trace, shrink_formula};
use crate::monitor::{synth, BooleanMonitor};
use crate::semantics::{evaluate_prefixes, Trace};

/// Largest `(|Q| + |V|) / |f|` accepted by the linearity suite.
pub const DEFAULT_SIZE_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Monitor output equals the reference semantics on every prefix.
    Oracle,
    /// Control states plus registers grow at most linearly in formula size.
    Linearity,
    /// On 0/1 traces the quantitative monitor agrees with the Boolean one.
    Crisp,
    /// After a safety violation the composite reward is pinned to the penalty.
    Veto,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Oracle, Suite::Linearity, Suite::Crisp, Suite::Veto];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Linearity => "linearity",
            Suite::Crisp => "crisp",
            Suite::Veto => "veto",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub cases: usize,
    pub seed: u64,
    pub max_depth: usize,
    pub max_len: usize,
    pub atoms: Vec<&'static str>,
    pub tolerance: f64,
    pub size_constant: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            cases: 1000,
            seed: 0,
            max_depth: 5,
            max_len: 20,
            atoms: vec!["a", "b", "c"],
            tolerance: 1e-9,
            size_constant: DEFAULT_SIZE_CONSTANT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub formula: Formula,
    pub trace: Option<Trace<f64>>,
    pub message: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "formula: {}", self.formula)?;
        writeln!(f, "{}", self.message)?;
        if let Some(t) = &self.trace {
            write!(f, "trace:\n{}", t.to_jsonl())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub failures: usize,
    /// Largest size ratio seen (linearity suite only).
    pub max_ratio: Option<f64>,
    pub counterexample: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compare the monitor's reward register after each prefix against the
/// reference semantics. Returns a description of the first mismatch.
pub fn oracle_mismatch(f: &Formula, trace: &Trace<f64>, tol: f64) -> Option<String> {
    let m = match synth::<f64>(f) {
        Ok(m) => m,
        Err(e) => return Some(format!("synthesis failed: {e}")),
    };
    let got = match m.run(trace) {
        Ok(v) => v,
        Err(e) => return Some(format!("monitor failed: {e}")),
    };
    let want = evaluate_prefixes(f, trace).expect("generated trace covers the atoms");
    got.iter()
        .zip(&want)
        .enumerate()
        .find(|(_, (g, w))| (*g - *w).abs() > tol)
        .map(|(i, (g, w))| format!("after {} letters: monitor {g}, semantics {w}", i + 1))
}

/// Compare quantitative and Boolean monitors on a 0/1 trace.
pub fn crisp_mismatch(f: &Formula, trace: &Trace<f64>) -> Option<String> {
    let q = synth::<f64>(f).ok()?;
    let mut b = BooleanMonitor::new(f).ok()?;
    let qv = q.run(trace).ok()?;
    let mut st = None;
    for (i, letter) in trace.letters().enumerate() {
        let row = q_row(&b, &letter);
        match st.as_mut() {
            None => st = Some(b.init_slice(&row).ok()?),
            Some(s) => b.step_slice(s, &row).ok()?,
        }
        let bool_out = if b.output(st.as_ref()?) { 1.0 } else { 0.0 };
        if qv[i] != bool_out {
            return Some(format!(
                "after {} letters: quantitative {}, Boolean {bool_out}",
                i + 1,
                qv[i]
            ));
        }
    }
    None
}

fn q_row(b: &BooleanMonitor, letter: &crate::semantics::Letter<'_, f64>) -> Vec<f64> {
    use crate::semantics::Labels;
    b.atoms()
        .iter()
        .map(|a| letter.label(a).expect("atom in trace"))
        .collect()
}

/// Check that once the composite reports a violation, every later reward is
/// the penalty, and that it never reports one while all safety components
/// are above the threshold.
pub fn veto_mismatch(f: &Formula, trace: &Trace<f64>, mode: Mode) -> Option<String> {
    const ZETA: f64 = -5.0;
    let pairs = vec![
        SpecRewardPair::new(f.clone(), 2.0, mode),
        SpecRewardPair::new(Formula::True.always(), 1.0, mode),
    ];
    let atoms = trace.atoms().to_vec();
    let mut cm = compose(&pairs, ZETA, &atoms).ok()?;
    let mut seen_violation = false;
    for (i, l) in trace.letters().enumerate() {
        let row = l.values();
        let r = if i == 0 {
            cm.reset(row, row).ok()?;
            cm.reward()
        } else {
            cm.step(row, row).ok()?
        };
        if seen_violation && (r != ZETA || !cm.is_violated()) {
            return Some(format!("step {}: reward {r} after a violation", i + 1));
        }
        if cm.is_violated() {
            if r != ZETA {
                return Some(format!("step {}: violated but reward {r}", i + 1));
            }
            seen_violation = true;
        } else {
            let v = cm.values();
            if mode == Mode::Quantitative && v[0] <= 1e-9 {
                return Some(format!("step {}: safety value {} but no violation", i + 1, v[0]));
            }
            let expect = 2.0 * v[0] + v[1];
            if (r - expect).abs() > 1e-9 {
                return Some(format!("step {}: reward {r}, expected {expect}", i + 1));
            }
        }
    }
    None
}

fn shrink(
    mut f: Formula,
    mut t: Trace<f64>,
    fails: impl Fn(&Formula, &Trace<f64>) -> Option<String>,
) -> Counterexample {
    let mut message = fails(&f, &t).unwrap_or_default();
    loop {
        let mut improved = false;
        for g in shrink_formula(&f) {
            if g.size() < f.size() {
                if let Some(m) = fails(&g, &t) {
                    f = g;
                    message = m;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            continue;
        }
        for k in 1..t.len() {
            let p = t.prefix(k);
            if let Some(m) = fails(&f, &p) {
                t = p;
                message = m;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Counterexample {
        formula: f,
        trace: Some(t),
        message,
    }
}

/// Run one suite for `cfg.cases` random cases.
pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> SuiteReport {
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ (suite as u64).wrapping_mul(0x9e37_79b9));
    let mut report = SuiteReport {
        suite,
        cases: 0,
        failures: 0,
        max_ratio: None,
        counterexample: None,
    };
    let atoms = &cfg.atoms;
    while report.cases < cfg.cases {
        let f = random_formula(&mut rng, atoms, cfg.max_depth);
        if suite == Suite::Veto && !f.is_safe() {
            continue;
        }
        report.cases += 1;
        let len = rng.gen_range(1..=cfg.max_len);
        let failure: Option<Counterexample> = match suite {
            Suite::Oracle => {
                let t = random_trace(&mut rng, atoms, len, false);
                oracle_mismatch(&f, &t, cfg.tolerance)
                    .map(|_| shrink(f.clone(), t, |g, u| oracle_mismatch(g, u, cfg.tolerance)))
            }
            Suite::Crisp => {
                let t = random_trace(&mut rng, atoms, len, true);
                crisp_mismatch(&f, &t).map(|_| shrink(f.clone(), t, crisp_mismatch))
            }
            Suite::Veto => {
                let crisp = rng.gen_bool(0.5);
                let t = random_trace(&mut rng, atoms, len, crisp);
                let mode = if crisp { Mode::Boolean } else { Mode::Quantitative };
                veto_mismatch(&f, &t, mode)
                    .map(|_| shrink(f.clone(), t, |g, u| veto_mismatch(g, u, mode)))
            }
            Suite::Linearity => match synth::<f64>(&f) {
                Ok(m) => {
                    let (q, v) = m.size();
                    let ratio = (q + v) as f64 / f.size() as f64;
                    report.max_ratio = Some(report.max_ratio.map_or(ratio, |r: f64| r.max(ratio)));
                    (ratio > cfg.size_constant).then(|| Counterexample {
                        formula: f.clone(),
                        trace: None,
                        message: format!(
                            "|Q| + |V| = {q} + {v} exceeds {} * |f| = {} * {}",
                            cfg.size_constant,
                            cfg.size_constant,
                            f.size()
                        ),
                    })
                }
                Err(e) => Some(Counterexample {
                    formula: f.clone(),
                    trace: None,
                    message: e.to_string(),
                }),
            },
        };
        if let Some(cx) = failure {
            report.failures += 1;
            if report.counterexample.is_none() {
                report.counterexample = Some(cx);
            }
        }
    }
    report
}
