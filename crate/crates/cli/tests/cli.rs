use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rlwe-forge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn gen_small(dir: &Path, seed: &str, count: &str, tag: &str, extra: &[&str]) -> (String, String) {
    let (i, s) = (p(dir, &format!("{tag}.json")), p(dir, &format!("{tag}.csv")));
    let mut args = vec![
        "gen", "--m", "21", "--gens", "1", "--q", "13", "--sigma0", "0.5", "--count", count, "--seed", seed,
        "--instance-out", &i, "--samples-out", &s,
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (i, s)
}

#[test]
fn gen_then_decision_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let (i, s) = gen_small(dir.path(), "7", "2000", "a", &[]);
    let r = json(&run(&["attack", "decision", "--instance", &i, "--samples", &s]));
    assert_eq!(r["verdict"], "GUESS");
    assert_eq!(r["extra"]["matches_planted"], true);
    assert_eq!(r["bins"], "per-element");
    let r = json(&run(&["attack", "search", "--instance", &i, "--samples", &s]));
    assert_eq!(r["verdict"], "GUESS");
    assert_eq!(r["extra"]["matches_planted"], true);
    assert_eq!(r["secret"].as_array().unwrap().len(), 12);
}

#[test]
fn gen_reports_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "gen", "--m", "21", "--q", "13", "--sigma0", "1", "--count", "3", "--seed", "1", "--instance-out",
        &p(dir.path(), "i.json"), "--samples-out", &p(dir.path(), "s.csv"),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sigma=2.96"), "{text}");
    assert!(text.contains("|d_K|^(1/2n)=2.96"));
    assert!(text.contains("geometric-mean="));
    assert!(text.contains("precision=100 bits"));
    let lines = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(lines.lines().count(), 4);
    assert!(lines.starts_with("# rlwe-forge samples "));
}

#[test]
fn precision_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("RLWE_FORGE_PRECISION", "160")
        .args([
            "gen", "--m", "7", "--q", "13", "--sigma0", "1", "--count", "1", "--seed", "1", "--instance-out",
            &p(dir.path(), "i.json"), "--samples-out", &p(dir.path(), "s.csv"),
        ])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("precision=160 bits"));
}

#[test]
fn uniform_control_is_not_rlwe() {
    let dir = tempfile::tempdir().unwrap();
    let (i, s) = gen_small(dir.path(), "3", "1000", "u", &["--uniform"]);
    let r = json(&run(&["attack", "decision", "--instance", &i, "--samples", &s, "--alpha", "0.99999"]));
    assert_eq!(r["verdict"], "NOT-RLWE");
    assert_eq!(r["params"]["uniform_input"], true);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (_, s1) = gen_small(dir.path(), "5", "500", "t1", &["--threads", "1"]);
    let (_, s8) = gen_small(dir.path(), "5", "500", "t8", &["--threads", "8"]);
    assert_eq!(std::fs::read(s1).unwrap(), std::fs::read(s8).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (i, _) = gen_small(dir.path(), "1", "10", "a", &[]);
    let (_, other) = gen_small(dir.path(), "2", "10", "b", &[]);
    let out = run(&["attack", "decision", "--instance", &i, "--samples", &other]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash mismatch"));
    let out = run(&["attack", "decision", "--instance", &i, "--count", "50"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["attack", "decision", "--m", "9", "--q", "13", "--sigma0", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ramified_inline_and_control() {
    let r = json(&run(&["attack", "ramified", "--p", "61", "--sigma0", "0.5", "--count", "305", "--seed", "1"]));
    assert_eq!(r["verdict"], "NON-UNIFORM");
    assert_eq!(r["extra"]["secondary"]["binning"], "per-element");
    let r = json(&run(&["attack", "ramified", "--p", "61", "--sigma0", "0.5", "--count", "305", "--seed", "1", "--uniform"]));
    assert_eq!(r["verdict"], "UNIFORM");
}

#[test]
fn dual_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let (i, o) = (p(dir.path(), "d.json"), p(dir.path(), "d.csv"));
    let out = run(&["gen", "--p", "307", "--r", "0.0468", "--count", "1535", "--seed", "1", "--instance-out", &i, "--samples-out", &o]);
    assert!(out.status.success());
    let from_file = json(&run(&["attack", "dual", "--instance", &i, "--observations", &o]));
    let inline = json(&run(&["attack", "dual", "--p", "307", "--r", "0.0468", "--count", "1535", "--seed", "1"]));
    assert_eq!(from_file["chi2_max"], inline["chi2_max"]);
    assert_eq!(inline["bins"], "circle-uniform/50");
}

#[test]
fn modswitch_report() {
    let r = json(&run(&[
        "attack", "modswitch", "--m", "21", "--q", "1013", "--sigma0", "0.5", "--seed", "1", "--count", "1000", "--to", "13",
    ]));
    assert_eq!(r["attack"], "modswitch");
    assert_eq!(r["verdict"], "NOT-RLWE");
    assert!(r["extra"]["a_err_uniformity"]["p_value"].as_f64().unwrap() > 1e-3);
}

#[test]
fn scan_outputs_csv() {
    let out = run(&["scan"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "m,gens,n,q,f,sigma0,delta_hat,delta_floor,samples,bound,status,seconds,note\n");
    let out = run(&["scan", "--candidate", "7:1", "--q-hi", "14", "--sigma0", "0.5", "--error-samples", "20000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("7,1,6,13,2,0.5,"), "{row}");
    assert!(row.contains(",attacked,"), "{row}");
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.txt");
    std::fs::write(&f, "# conductor then generators\n7 1\n").unwrap();
    let out = run(&["scan", "--candidates-file", f.to_str().unwrap(), "--q-hi", "14", "--sigma0", "3", "--estimate-only"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",safe,"), "{text}");
}

#[test]
fn curve_csv() {
    let out = run(&["curve", "--n-guesses", "169", "--samples", "845", "--steps", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,bound");
    assert_eq!(lines.len(), 4);
}
