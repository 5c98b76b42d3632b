//! End-to-end checks of the binary: output files, determinism, and the
//! documented exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manymeans"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn shrink_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("estimates.csv");
    write(
        &input,
        "id,estimate,std_error\na,4.0,1.0\nb,0.2,0.5\nc,-3.0,1.5\nd,0.05,0.2\ne,6.0,2.0\n",
    );
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");
    for out in [&out1, &out2] {
        let r = run(&["shrink", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
        for f in ["summary.csv", "estimates.csv", "curves.csv"] {
            assert!(out.join(f).exists(), "missing {f}");
        }
    }
    for f in ["summary.csv", "estimates.csv", "curves.csv"] {
        assert_eq!(
            fs::read_to_string(out1.join(f)).unwrap(),
            fs::read_to_string(out2.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let summary = fs::read_to_string(out1.join("summary.csv")).unwrap();
    assert!(summary.starts_with("estimator,lambda,t,criterion,best"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    write(&input, "id,estimate\na,1.0\n"); // missing std_error column
    let r = run(&["shrink", "--input", input.to_str().unwrap(), "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn cv_selector_on_estimates_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("estimates.csv");
    write(&input, "id,estimate,std_error\na,1.0,1.0\n");
    let r = run(&[
        "shrink",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("o").to_str().unwrap(),
        "--selector",
        "cv-loo",
    ]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn single_replicate_panel_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("panel.csv");
    write(&input, "id,rep,value\na,1,1.0\nb,1,2.0\n");
    let r = run(&["cv", "--input", input.to_str().unwrap(), "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn cv_panel_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("panel.csv");
    let mut csv = String::from("id,rep,value\n");
    for i in 0..8 {
        for rep in 1..=3 {
            csv.push_str(&format!("u{i},{rep},{}\n", (i as f64 - 3.5) + 0.3 * rep as f64));
        }
    }
    write(&input, &csv);
    let out = dir.path().join("out");
    let r = run(&["cv", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let estimates = fs::read_to_string(out.join("estimates.csv")).unwrap();
    assert_eq!(estimates.lines().count(), 9); // header + 8 units
    assert!(out.join("summary.csv").exists() && out.join("curves.csv").exists());
}

#[test]
fn surface_covers_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("surface.csv");
    let r = run(&[
        "surface",
        "--output",
        out.to_str().unwrap(),
        "--p",
        "0,0.5",
        "--mu0",
        "0,2",
        "--sigma0",
        "2",
    ]);
    assert!(r.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5); // header + 2*2*1 cells
    assert!(text.starts_with("p,mu0,sigma0,"));
}

#[test]
fn simulate_tiny_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    write(
        &cfg,
        r#"{"dgps":[{"p":0.5,"mu0":2.0,"sigma0":2.0,"sigma":1.0}],"ns":[20],"reps":3,
           "estimators":[{"selector":"sure","kind":"ridge"}],"master_seed":7}"#,
    );
    let out = dir.path().join("results.csv");
    let r = run(&["simulate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2); // header + one cell
    assert!(text.contains("ridge,sure"));
}
