use ctxband_core::harness::{run_experiment, ExperimentConfig, RunOptions};
use ctxband_core::Error;

fn config(body: &str, loss: &str, algorithm: &str) -> String {
    format!(
        r#"
spec_version = 1
horizon = 300
seeds = [3, 1]

{body}

{loss}

[context]
kind = "iid_uniform"
p = 1

[noise]
kind = "bounded_uniform"
half_width = 0.05

{algorithm}
"#
    )
}

const BALL: &str = "[body]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 1.0";
const TRIANGLE: &str = r#"[body]
kind = "polytope"
rows = [
  { normal = [1.0, 0.0], offset = -1.0 },
  { normal = [0.0, 1.0], offset = -1.0 },
  { normal = [-1.0, -1.0], offset = -1.0 },
]"#;
const QUADRATIC: &str = "[loss]\nkind = \"quadratic\"\nalpha = 1.0\nlipschitz = 1.0\nmap = [[0.5], [0.0]]\nshift = [-0.25, 0.0]";
const HARD: &str = "[loss]\nkind = \"lower_bound\"\nalpha = 1.0\nlipschitz = 1.0\ngamma = 1.0\np = 1\nr1 = 0.3\nr2 = 0.3";

fn run(text: &str) -> ctxband_core::Result<ctxband_core::harness::RunSummary> {
    run_experiment(
        &ExperimentConfig::from_toml(text)?,
        &RunOptions {
            workers: Some(2),
            horizon: None,
        },
    )
}

#[test]
fn polytope_body_runs_with_feasible_queries() {
    // the triangle reaches farther from the targets, so L = 1 does not certify
    let loss = QUADRATIC.replace("lipschitz = 1.0", "lipschitz = 2.0");
    let s = run(&config(
        TRIANGLE,
        &loss,
        "[algorithm]\nkind = \"router_bco\"\nK = 3",
    ))
    .unwrap();
    assert_eq!(s.seeds, vec![3, 1]);
    assert!(s
        .per_seed
        .iter()
        .all(|o| o.contextual_regret >= o.static_regret - 1e-8));
}

#[test]
fn hard_instance_with_tuned_cells() {
    let s = run(&config(
        BALL,
        HARD,
        "[algorithm]\nkind = \"router_bco\"\nK = \"lower_bound\"",
    ))
    .unwrap();
    // (min(1, L²) T)^{1/(p+2γ)} = 300^{1/3}
    assert_eq!(s.k, 6);
    assert_eq!(s.params.beta, 3.0);
}

#[test]
fn auto_cells_rejected_without_hoelder_exponent() {
    let gamma0 = "[loss]\nkind = \"lower_bound_gamma0\"\nalpha = 1.0\nlipschitz = 1.0\np = 1\nr1 = 0.3\nr2 = 0.3";
    let err = run(&config(
        BALL,
        gamma0,
        "[algorithm]\nkind = \"router_bco\"\nK = \"auto\"",
    ))
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn inadmissible_hard_instance_is_rejected() {
    let loud = HARD.replace("r1 = 0.3", "r1 = 5.0");
    let err = run(&config(
        BALL,
        &loud,
        "[algorithm]\nkind = \"router_bco\"\nK = 2",
    ))
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let text = config(BALL, QUADRATIC, "[algorithm]\nkind = \"bco\"")
        + &format!("\n[output]\ndir = {:?}\ntranscript = true\n", dir.path());
    let s = run(&text).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert_eq!(summary, s.to_json());
    assert!(!summary.contains(dir.path().to_str().unwrap()));
    let csv = std::fs::read_to_string(dir.path().join("transcript_seed3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
    assert_eq!(
        ctxband_core::harness::content_hash(csv.as_bytes()),
        s.per_seed[0].transcript_hash
    );
}
