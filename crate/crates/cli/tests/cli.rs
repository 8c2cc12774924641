use std::path::Path;
use std::process::{Command, Output};

fn frqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frqd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn construct_then_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g.txt");
    let o = frqd(&["construct", "--n", "10", "--r", "7", "--out", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&g).unwrap();
    assert_eq!(text.lines().count(), 1 + 42);

    let o = frqd(&["verify-redundancy", g.to_str().unwrap(), "--r", "7", "--r-prime", "0"]);
    assert_eq!(code(&o), 0);

    let o = frqd(&[
        "verify-redundancy",
        g.to_str().unwrap(),
        "--r",
        "7",
        "--r-prime",
        "0",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["redundant"], true);

    let o = frqd(&["construct", "--n", "4", "--r", "3"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1 + 6);
}

#[test]
fn verify_reports_a_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("path.txt");
    std::fs::write(&g, "# path on five nodes\n5\n0 1\n1 2\n2 3\n3 4\n").unwrap();
    let o = frqd(&["verify-redundancy", g.to_str().unwrap(), "--r", "2", "--r-prime", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("witness"));

    let o = frqd(&[
        "verify-redundancy",
        g.to_str().unwrap(),
        "--r",
        "2",
        "--r-prime",
        "0",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["witness"]["kind"], "gap_violation");
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g.txt");
    std::fs::write(&g, "3\n0 1\n1 2\n").unwrap();
    assert_eq!(
        code(&frqd(&[
            "verify-redundancy",
            g.to_str().unwrap(),
            "--r",
            "1",
            "--r-prime",
            "1"
        ])),
        2
    );
    assert_eq!(code(&frqd(&["construct", "--n", "3", "--r", "3"])), 2);
    assert_eq!(code(&frqd(&["run", "does-not-exist.toml"])), 2);
    assert_eq!(code(&frqd(&["bogus"])), 2);
    let bad = configs().join("frqd.toml");
    assert_eq!(code(&frqd(&["run", bad.to_str().unwrap(), "--set", "horizon=0"])), 2);
}

#[test]
fn run_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let cfg = configs().join("equivalence.toml");
    let o = frqd(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        "horizon=500",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(a.join("report.json").exists());
    assert!(a.join("trajectory.csv").exists());

    let base = configs().join("trim_baseline.toml");
    let o = frqd(&[
        "run",
        base.to_str().unwrap(),
        "--set",
        "horizon=500",
        "--set",
        "outputs.svg=false",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = tmp.path().join("table.csv");
    let o = frqd(&[
        "compare",
        a.join("report.json").to_str().unwrap(),
        b.join("report.json").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("optimal"));
    assert!(table.contains("trim_baseline"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let c = tmp.path().join("c");
    let o = frqd(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        "horizon=100",
        "--set",
        "seeds.master=1",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = frqd(&[
        "compare",
        a.join("report.json").to_str().unwrap(),
        c.join("report.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invariant_violation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("equivalence.toml");
    // r = 5 leaves pairs validated without being two-hop edges
    let o = frqd(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        "graph.r=5",
        "--set",
        "horizon=50",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invariant violated"));
}
