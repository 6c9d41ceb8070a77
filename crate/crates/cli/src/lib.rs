//! Implementation of the `qmon` subcommands. Each command writes its
//! report to the given sink and returns whether the checked property held.

pub mod config;
pub mod report;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qmon_core::check::{run_suite, CheckConfig, Suite};
use qmon_core::compose::Mode;
use qmon_core::semantics::{evaluate_prefixes, Labels, Trace};
use qmon_core::{parse, synth, BooleanMonitor, Formula, ParseError};
use qmon_gym::experiment::{mean_curve, moving_average, CURVE_WINDOW};

use config::ExperimentConfig;

/// Largest tolerated gap between monitor output and the reference value.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-9;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// The command worked but the property it checks does not hold.
    PropertyFailure,
}

/// Invalid input: exits with the usage status, not the property one.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Error text with a caret under the offending column.
pub fn describe_parse_error(src: &str, e: &ParseError) -> String {
    format!("{e}\n  {src}\n  {}^", " ".repeat(e.column().saturating_sub(1)))
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    parse(src).map_err(|e| InputError(describe_parse_error(src, &e)).into())
}

pub fn compile(formula: &str, mode: Mode, out_dir: &Path, out: &mut dyn Write) -> Result<Outcome> {
    let f = parse_formula(formula)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let json_path = out_dir.join("monitor.json");
    let dot_path = out_dir.join("monitor.dot");
    writeln!(out, "formula: {f}")?;
    match mode {
        Mode::Quantitative => {
            let m = synth::<f64>(&f)?;
            writeln!(out, "mode: quantitative")?;
            writeln!(out, "states: {}", m.num_states())?;
            writeln!(out, "registers: {}", m.registers().len())?;
            fs::write(&json_path, serde_json::to_string_pretty(&m.to_json())? + "\n")?;
            fs::write(&dot_path, m.to_dot())?;
        }
        Mode::Boolean => {
            let mut m = BooleanMonitor::new(&f)?;
            m.explore()?;
            let accepting = (0..m.num_states() as u32).filter(|&q| m.is_accepting(q)).count();
            writeln!(out, "mode: boolean")?;
            writeln!(out, "states: {}", m.num_states())?;
            writeln!(out, "accepting: {accepting}")?;
            fs::write(&json_path, serde_json::to_string_pretty(&m.to_json())? + "\n")?;
            fs::write(&dot_path, m.to_dot())?;
        }
    }
    writeln!(out, "safety: {}", f.is_safe())?;
    writeln!(out, "wrote {} and {}", json_path.display(), dot_path.display())?;
    Ok(Outcome::Pass)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub fn eval(formula: &str, trace_path: &Path, mode: Mode, out: &mut dyn Write) -> Result<Outcome> {
    let f = parse_formula(formula)?;
    let text = fs::read_to_string(trace_path).with_context(|| format!("reading {}", trace_path.display()))?;
    let trace = Trace::<f64>::from_jsonl(&text).map_err(|e| InputError(format!("{}: {e}", trace_path.display())))?;
    if trace.is_empty() {
        bail!(InputError(format!("{}: trace has no steps", trace_path.display())));
    }
    let missing: Vec<&str> = f.atoms().into_iter().filter(|a| !trace.atoms().iter().any(|t| t == a)).collect();
    if !missing.is_empty() {
        bail!(InputError(format!("trace does not label atoms {missing:?} of the formula")));
    }
    let oracle = evaluate_prefixes(&f, &trace)?;
    let mut divergences = 0;
    let mut check = |got: f64, want: f64| {
        let bad = (got - want).abs() > DIVERGENCE_TOLERANCE;
        divergences += bad as usize;
        if bad { "DIVERGED" } else { "ok" }
    };
    match mode {
        Mode::Quantitative => {
            let m = synth::<f64>(&f)?;
            let names: Vec<&str> = m.registers().iter().map(|r| r.name.as_str()).collect();
            writeln!(out, "step\tstate\t{}\treward\toracle\tstatus", names.join("\t"))?;
            let mut st = None;
            for (i, letter) in trace.letters().enumerate() {
                let row = m.gather(&letter)?;
                let st = match st.as_mut() {
                    None => st.insert(m.init_slice(&row)?),
                    Some(s) => {
                        m.step_slice(s, &row)?;
                        s
                    }
                };
                let regs: Vec<String> = st.registers.iter().map(|&v| fmt_num(v)).collect();
                let v = m.value(st);
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    st.state,
                    regs.join("\t"),
                    fmt_num(v),
                    fmt_num(oracle[i]),
                    check(v, oracle[i])
                )?;
            }
        }
        Mode::Boolean => {
            let mut m = BooleanMonitor::new(&f)?;
            writeln!(out, "step\tstate\toutput\toracle\tstatus")?;
            let mut st = None;
            for (i, letter) in trace.letters().enumerate() {
                let row: Vec<f64> = m
                    .atoms()
                    .iter()
                    .map(|a| letter.label(a).ok_or_else(|| anyhow!("no label for '{a}'")))
                    .collect::<Result<_>>()?;
                let res = match st.as_mut() {
                    None => m.init_slice(&row).map(|s| {
                        st = Some(s);
                    }),
                    Some(s) => m.step_slice(s, &row),
                };
                res.map_err(|e| InputError(format!("step {}: {e}", i + 1)))?;
                let s = st.as_ref().expect("initialised");
                let v = if m.output(s) { 1.0 } else { 0.0 };
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    s.state,
                    fmt_num(v),
                    fmt_num(oracle[i]),
                    check(v, oracle[i])
                )?;
            }
        }
    }
    writeln!(out, "divergences: {divergences}")?;
    Ok(if divergences == 0 { Outcome::Pass } else { Outcome::PropertyFailure })
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub zeta: Option<f64>,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn run(config_path: &Path, over: &RunOverrides, out: &mut dyn Write) -> Result<Outcome> {
    let text = fs::read_to_string(config_path).with_context(|| format!("reading {}", config_path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)
        .map_err(|e| InputError(format!("{}: {e}", config_path.display())))?;
    if let Some(d) = &over.out {
        cfg.output = d.clone();
    }
    if let Some(s) = over.seed {
        cfg.seed = s;
    }
    if let Some(z) = over.zeta {
        cfg.zeta = z;
    }
    run_config(&cfg, over.workers.unwrap_or_else(default_workers), out)
}

pub fn run_config(cfg: &ExperimentConfig, workers: usize, out: &mut dyn Write) -> Result<Outcome> {
    if workers == 0 {
        bail!(InputError("--workers must be at least 1".into()));
    }
    let x = cfg.experiment().map_err(|errs| {
        InputError(format!("invalid configuration:\n  - {}", errs.join("\n  - ")))
    })?;
    let results = x.run(workers)?;
    let dir = &cfg.output;
    let summary = report::write_all(dir, x.env, &results, cfg.window())?;
    let series: Vec<(String, Vec<f64>)> = x
        .variants
        .iter()
        .map(|&v| (v.to_string(), moving_average(&mean_curve(&results, v), CURVE_WINDOW)))
        .collect();
    let chart = svg::line_chart(
        &format!("{}: task completion (moving average {CURVE_WINDOW})", x.env),
        "episode",
        "task completion",
        &series,
    );
    let svg_path = dir.join("curves.svg");
    fs::write(&svg_path, chart)?;
    write!(out, "{}", report::render_summary(&summary))?;
    writeln!(out, "wrote {}", dir.display())?;
    Ok(Outcome::Pass)
}

pub fn check(suites: &[Suite], cfg: &CheckConfig, out: &mut dyn Write) -> Result<Outcome> {
    let mut outcome = Outcome::Pass;
    for &s in suites {
        let r = run_suite(s, cfg);
        write!(out, "{}: {} cases, {} failures", s.name(), r.cases, r.failures)?;
        if let Some(ratio) = r.max_ratio {
            write!(out, ", max size ratio {ratio:.3} (bound {})", cfg.size_constant)?;
        }
        writeln!(out)?;
        if let Some(cx) = &r.counterexample {
            outcome = Outcome::PropertyFailure;
            writeln!(out, "counterexample:\n{cx}")?;
        }
    }
    Ok(outcome)
}
