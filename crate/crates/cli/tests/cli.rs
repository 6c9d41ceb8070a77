use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qmon_cli::config::ExperimentConfig;
use qmon_cli::report::{read_runs, read_summary, recompute_summary, EPISODE_COLUMNS, SUMMARY_COLUMNS};
use qmon_cli::{run_config, Outcome};
use qmon_gym::envs::Variant;

fn qmon(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmon"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compile_reports_states_and_safety() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmon(&["compile", "!a U (a & F b)", "--out", "m"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("states: 3\n"));
    assert!(stdout(&o).contains("safety: false\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m/monitor.json")).unwrap()).unwrap();
    assert_eq!(json["states"].as_array().unwrap().len(), 3);
    assert!(fs::read_to_string(dir.path().join("m/monitor.dot")).unwrap().starts_with("digraph"));

    let o = qmon(&["compile", "G !in_water", "--out", "s"], dir.path());
    assert!(stdout(&o).contains("safety: true\n"));
    let o = qmon(&["compile", "G !in_water", "--mode", "boolean", "--out", "b"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("safety: true\n"));
}

#[test]
fn malformed_formula_exits_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmon(&["compile", "a U"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 4"), "{}", stderr(&o));
    assert!(!dir.path().join("monitor.json").exists());
    let o = qmon(&["compile", "a", "--mode", "fuzzy"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

fn write_trace(dir: &Path, name: &str, rows: &[(f64, f64)]) {
    let mut s = String::from("{\"atoms\":[\"a\",\"b\"]}\n");
    for (a, b) in rows {
        s.push_str(&format!("{{\"a\":{a},\"b\":{b}}}\n"));
    }
    fs::write(dir.join(name), s).unwrap();
}

/// Reward and oracle columns of an eval table.
fn columns(out: &str) -> Vec<(String, String, String)> {
    out.lines()
        .skip(1)
        .take_while(|l| !l.starts_with("divergences"))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let n = f.len();
            (f[n - 3].to_string(), f[n - 2].to_string(), f[n - 1].to_string())
        })
        .collect()
}

#[test]
fn eval_matches_oracle_on_the_figure_trace() {
    let dir = tempfile::tempdir().unwrap();
    write_trace(dir.path(), "fig.jsonl", &[(0.0, 0.0), (0.8, 0.2), (0.8, 0.9)]);
    let o = qmon(&["eval", "!a U (a & F b)", "fig.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows = columns(&out);
    // Prefix values: the length-2 prefix only has the j = 2 witness,
    // min(1 - 0, 0.8, 0.2) = 0.2.
    let want = [("0", "0"), ("0.2", "0.2"), ("0.8", "0.8")];
    for (r, (v, w)) in rows.iter().zip(want) {
        assert_eq!((r.0.as_str(), r.1.as_str(), r.2.as_str()), (v, w, "ok"));
    }
    assert!(out.ends_with("divergences: 0\n"));

    let o = qmon(&["eval", "true", "fig.jsonl"], dir.path());
    assert!(columns(&stdout(&o)).iter().all(|r| r.0 == "1" && r.1 == "1"));
}

#[test]
fn eval_boolean_follows_the_dfa() {
    let dir = tempfile::tempdir().unwrap();
    write_trace(dir.path(), "crisp.jsonl", &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
    let o = qmon(&["eval", "!a U (a & F b)", "crisp.jsonl", "--mode", "boolean"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let outputs: Vec<String> = columns(&out).into_iter().map(|r| r.0).collect();
    assert_eq!(outputs, ["0", "0", "1"]);
    let states: Vec<&str> = out.lines().skip(1).take(3).map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(states, ["0", "1", "2"]);
}

#[test]
fn eval_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_trace(dir.path(), "fig.jsonl", &[(0.0, 0.0), (0.8, 0.2)]);
    write_trace(dir.path(), "empty.jsonl", &[]);
    let o = qmon(&["eval", "F c", "fig.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("\"c\""));
    let o = qmon(&["eval", "F a", "empty.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = qmon(&["eval", "F a", "fig.jsonl", "--mode", "boolean"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_passes_small_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmon(&["check", "--cases", "50"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("0 failures")).count(), 4);
    let o = qmon(&["check", "veto", "--cases", "20", "--seed", "7"], dir.path());
    assert!(stdout(&o).starts_with("veto: 20 cases, 0 failures"));
}

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml(body).unwrap();
    c.output = dir.to_path_buf();
    c
}

#[test]
fn zero_episodes_give_empty_curves_and_no_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        "schema_version = 1\nenvironment = \"cliff_walking\"\nruns = 1\n[qlearn]\nepisodes = 0\n",
    );
    let mut out = Vec::new();
    assert_eq!(run_config(&c, 1, &mut out).unwrap(), Outcome::Pass);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.matches(" None ").count(), 6, "{text}");
    let svg = fs::read_to_string(dir.path().join("curves.svg")).unwrap();
    assert!(!svg.contains("<polyline"));
    let rows = read_summary(dir.path()).unwrap();
    assert!(rows.iter().all(|r| r.mean_convergence_episode.is_none() && r.converged_runs == 0));
}

const GOLDEN_CONFIG: &str = r#"
schema_version = 1
environment = "frozen_lake"
variants = ["base", "quantitative"]
runs = 1
seed = 3
[qlearn]
episodes = 6
"#;

#[test]
fn episode_csv_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), GOLDEN_CONFIG);
    run_config(&c, 2, &mut Vec::new()).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in ["base_000.csv", "quantitative_000.csv"] {
        let got = fs::read_to_string(dir.path().join("runs").join(name)).unwrap();
        let want = fs::read_to_string(golden.join(name)).unwrap();
        assert_eq!(got, want, "{name}");
        assert_eq!(got.lines().next().unwrap(), EPISODE_COLUMNS.join(","));
    }
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));
}

#[test]
fn summary_is_recomputable_from_run_files() {
    let dir = tempfile::tempdir().unwrap();
    // A loose fixed tolerance so that some runs converge and the replayed
    // detector has something to agree with.
    let c = config(
        dir.path(),
        r#"
schema_version = 1
environment = "taxi"
runs = 3
completion_window = 50
[qlearn]
episodes = 400
[ema]
span = 8
pairs = 2
tolerance = 0.5
"#,
    );
    run_config(&c, 2, &mut Vec::new()).unwrap();
    let written = read_summary(dir.path()).unwrap();
    let again = recompute_summary(dir.path(), c.environment, &c.ema, c.window()).unwrap();
    assert_eq!(written, again);
    assert!(written.iter().any(|r| r.converged_runs > 0));
    let runs = read_runs(dir.path()).unwrap();
    assert_eq!(runs.len(), 9);
    assert_eq!(runs[3].variant, Variant::Boolean);
    assert_eq!((runs[4].run, runs[4].seed), (1, 1));
}

#[test]
fn svg_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_config(&config(a.path(), GOLDEN_CONFIG), 1, &mut Vec::new()).unwrap();
    run_config(&config(b.path(), GOLDEN_CONFIG), 3, &mut Vec::new()).unwrap();
    let read = |d: &Path| fs::read_to_string(d.join("curves.svg")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn run_rejects_bad_configs_before_training() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        "schema_version = 1\nenvironment = \"sokoban\"\nruns = 0\nvariants = []\noutput = \"out\"\n",
    )
    .unwrap();
    let o = qmon(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("runs") && err.contains("variants"), "{err}");
    assert!(!dir.path().join("out").exists());

    fs::write(dir.path().join("ok.toml"), GOLDEN_CONFIG).unwrap();
    let o = qmon(&["run", "ok.toml", "--out", "o", "--zeta", "-5", "--workers", "2", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("o/summary.csv").exists());
    let o = qmon(&["run", "ok.toml", "--zeta", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
