use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conecusp")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

#[test]
fn cylinder_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(&["cylinder", "--seed", "42"], a.path()).status.code(), Some(0));
    assert_eq!(run(&["cylinder", "--seed", "42"], b.path()).status.code(), Some(0));
    for name in ["report.json", "cylinder.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let c = tempfile::tempdir().unwrap();
    run(&["cylinder", "--seed", "7"], c.path());
    assert_ne!(std::fs::read(a.path().join("cylinder.json")).unwrap(), std::fs::read(c.path().join("cylinder.json")).unwrap());
}

#[test]
fn sweep_ladder_gives_one_row_per_beta() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--beta-ladder", "0.5,0.1,0.01"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(d.path().join("sweep.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["beta", "c0", "c1", "iterations"]);
    let betas: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(betas, vec![0.5, 0.1, 0.01]);
}

#[test]
fn config_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\nbetas = [0.1, 0.5]\n").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()], d.path()).status.code(), Some(2));
    std::fs::write(&cfg, "this is = = not toml").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()], d.path()).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--beta-ladder", "0.5,oops"], d.path()).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--grid", "8"], d.path()).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", "/nonexistent/conecusp.toml"], d.path()).status.code(), Some(2));
}

#[test]
fn config_sections_are_applied() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "seed = 42\n[sweep]\nbetas = [0.5, 0.05]\ngrid = 1024\n").unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = csv::Reader::from_path(d.path().join("sweep.csv")).unwrap().records().count();
    assert_eq!(rows, 2);
}

#[test]
fn failing_check_still_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["curvature"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    let ids: Vec<u64> = report["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![3, 4]);
    assert!(d.path().join("curvature.csv").exists());
}

#[test]
fn all_summary_lists_every_criterion() {
    let d = tempfile::tempdir().unwrap();
    run(&["all"], d.path());
    let summary = std::fs::read_to_string(d.path().join("summary.txt")).unwrap();
    for id in 1..=12 {
        assert!(summary.lines().any(|l| l.starts_with(&format!("criterion {id:>2} "))), "criterion {id} missing");
    }
}
