//! End-to-end runs of the `netbell` binary.

use std::process::{Command, Output};

use netbell_cli::commands::{
    BoundsReport, DecompositionReport, FitReport, OptimizeReport, OracleReport, ReproduceReport, VisibilityReport,
};
use netbell_cli::RunReport;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn netbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netbell")).args(args).output().expect("binary runs")
}

/// Runs with `--json`, parses into `T`, and checks re-serialization is stable.
fn json<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(args: &[&str]) -> T {
    let mut all = args.to_vec();
    all.push("--json");
    let out = netbell(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: T = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let again: T = serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(value, again);
    value
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn triangle_config(v: f64, events: u64, seed: u64) -> String {
    format!(
        r#"{{"graph": "triangle", "k": 3,
            "states": [{{"v": {v}, "lambda": 0}}, {{"v": {v}, "lambda": 0}}, {{"v": {v}, "lambda": 0}}],
            "monte_carlo": {{"events_per_input": {events}, "seed": {seed}}}}}"#
    )
}

#[test]
fn bounds_for_four_settings() {
    let r: BoundsReport = json(&["bounds", "--k", "4"]);
    assert_eq!((r.bounds.local, r.bounds.svetlichny, r.bounds.noise), (6.0, 8.0, 0.0));
    assert!((r.bounds.quantum - 8.0 * (PI_8).cos()).abs() < 1e-12);
}

const PI_8: f64 = std::f64::consts::PI / 8.0;

#[test]
fn visibility_and_optimal_k() {
    let v: VisibilityReport = json(&["visibility", "--graph", "triangle", "--k", "3"]);
    assert!((v.critical_visibility - 0.8981).abs() < 5e-4);
    let o: OptimizeReport = json(&["optimize-k", "--graph", "line3", "--kmax", "10"]);
    assert_eq!(o.k, 5);
    assert!((o.v - 0.9463).abs() < 5e-4);
    let chsh: VisibilityReport = json(&["visibility", "--graph", "line3", "--k", "2"]);
    assert!(!chsh.achievable);
}

#[test]
fn exact_simulation_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (v, total, witnessing) in [(1.0, 15.588, true), (0.95, 14.809, true), (0.88, 13.718, false)] {
        let path = write_config(&dir, &triangle_config(v, 0, 0));
        let r: RunReport = json(&["simulate", "--config", &path]);
        assert!((r.total - total).abs() < 1e-3, "v={v}: {}", r.total);
        assert_eq!(r.bound, 14.0);
        assert_eq!(r.witnessing, witnessing);
        assert!((r.ratio - r.total / r.bound).abs() < 1e-15);
    }
}

#[test]
fn sampled_simulation_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(&dir, &triangle_config(0.95, 100_000, 17));
    let a: RunReport = json(&["simulate", "--config", &path, "--workers", "1"]);
    let b: RunReport = json(&["simulate", "--config", &path, "--workers", "8"]);
    assert_eq!(a, b);
    let exact: RunReport = json(&["simulate", "--config", &path, "--events", "0"]);
    assert!((a.total - exact.total).abs() < 3.0 * a.total_error);
    let sigma = a.sigma.unwrap();
    assert!((sigma - (a.total - a.bound) / a.total_error).abs() < 1e-9);
    let other: RunReport = json(&["simulate", "--config", &path, "--seed", "18"]);
    assert_ne!(a.total, other.total);
}

#[test]
fn invalid_config_lists_every_field_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"graph": "triangle", "k": 1, "states": [{"v": 2, "lambda": 0}]}"#,
    );
    let out = netbell(&["simulate", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for field in ["k:", "states:", "states[0].v:"] {
        assert!(err.contains(field), "missing {field} in {err}");
    }
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_eq!(netbell(&["visibility", "--graph", "pentagon", "--k", "3"]).status.code(), Some(2));
    assert_eq!(netbell(&["bounds", "--k", "1"]).status.code(), Some(2));
    assert_eq!(netbell(&["fit", "--scores", "3.0,2.6,2.6"]).status.code(), Some(2));
}

#[test]
fn fit_of_transcribed_scores() {
    let r: FitReport = json(&["fit"]);
    assert!((r.edges[0].v_hat - 0.9345).abs() < 1e-4);
    let k2 = &r.per_k[0];
    assert!(k2.total < 8.0 && !k2.witnessing);
    for row in &r.per_k {
        assert_eq!(row.witnessing, r.mean_v > row.critical_visibility, "k={}", row.k);
    }
    // No violation is still a successful run.
    let weak: FitReport = json(&["fit", "--scores", "2.0,2.0,2.0", "--kmax", "3"]);
    assert!(weak.per_k.iter().all(|r| !r.witnessing));
}

#[test]
fn oracle_and_decomposition() {
    let o: OracleReport = json(&["oracle", "--graph", "line3", "--k", "2"]);
    assert_eq!(o.agrees, Some(true));
    assert_eq!(o.oracle_value, 6.0);
    let d: DecompositionReport = json(&["decompose-check"]);
    assert!(d.holds && d.max_reconstruction_error.unwrap() <= 1e-12);
    let off: DecompositionReport = json(&["decompose-check", "--w", "0.95"]);
    assert!(!off.holds);
}

#[test]
fn oracle_accepts_an_expression_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("expr.json");
    std::fs::write(
        &path,
        r#"{"edges": [{"edge": [0, 1], "coefficients": [[1, -1], [1, 1]]},
                      {"edge": [1, 2], "coefficients": [[1, 1], [1, -1]]}]}"#,
    )
    .unwrap();
    let o: OracleReport = json(&["oracle", "--graph", "line3", "--k", "2", "--expr", path.to_str().unwrap()]);
    assert_eq!(o.oracle_value, 6.0);
    assert_eq!(o.closed_form_bound, None);
}

#[test]
fn reproduce_report_round_trips() {
    let r: ReproduceReport = json(&["reproduce"]);
    assert_eq!(r.experiment.len(), 4);
    assert!(r.oracle.iter().all(|row| row.agrees));
    assert!(r.headline.iter().all(|h| h.ok));
    let text = String::from_utf8(netbell(&["reproduce"]).stdout).unwrap();
    assert!(text.contains("TRANSCRIBED"));
}
