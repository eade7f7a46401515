use std::path::Path;
use std::process::{Command, Output};

use syncstr::verify::verify_sync;
use syncstr::SyncString;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncstr")).args(args).env_remove("SYNCSTR_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn verify_reports_pass_violation_and_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let good = path(dir.path(), "good.txt");
    let bad = path(dir.path(), "bad.txt");
    std::fs::write(&good, "alphabet=3\n012\n").unwrap();
    std::fs::write(&bad, "alphabet=2\n0101\n").unwrap();

    let ok = run(&["verify", "sync", "--eps", "1/2", &good]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["result"]["verdict"], "pass");

    let fail = run(&["verify", "sync", "--eps", "1/2", &bad]);
    assert_eq!(code(&fail), 1);
    assert_ne!(json(&fail)["result"]["verdict"], "pass");

    assert_eq!(code(&run(&["verify", "sync", "--eps", "2/1", &good])), 2);
    assert_eq!(code(&run(&["verify", "sync", &good])), 2);
    assert_eq!(code(&run(&["verify", "square-free", &bad])), 1);
}

#[test]
fn constructions_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "s.txt");
    let report = path(dir.path(), "r.json");
    let made = run(&["--seed", "4", "construct", "random", "--n", "200", "--eps", "1/2", "-o", &out, "--report", &report]);
    assert_eq!(code(&made), 0);
    let s = SyncString::parse_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s.len(), 200);
    assert!(verify_sync(&s, &"1/2".parse().unwrap()).unwrap().is_pass());
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["meta"]["seed"], 4);
    assert_eq!(code(&run(&["verify", "sync", "--eps", "1/2", &out])), 0);

    let sf = path(dir.path(), "sf.txt");
    assert_eq!(code(&run(&["--format", "compact", "construct", "square-free", "--n", "300", "-o", &sf])), 0);
    assert_eq!(code(&run(&["verify", "square-free", &sf])), 0);
}

#[test]
fn seeds_come_from_the_environment_too() {
    let a = run(&["--seed", "12", "construct", "random", "--n", "40", "--eps", "1/2"]);
    let b = Command::new(env!("CARGO_BIN_EXE_syncstr"))
        .args(["construct", "random", "--n", "40", "--eps", "1/2"])
        .env("SYNCSTR_SEED", "12")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["--seed", "13", "construct", "random", "--n", "40", "--eps", "1/2"]).stdout);
}

#[test]
fn binary_search_terminates_quickly() {
    let out = run(&["search-bk", "--k", "2", "--eps", "1/2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["terminated"], true);
    assert!(v["max_length"].as_u64().unwrap() <= 3);
}

#[test]
fn exhausted_search_saves_a_checkpoint_that_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cp = path(dir.path(), "cp.json");
    let first = run(&["search-bk", "--k", "3", "--eps", "3/4", "--budget", "10", "--checkpoint", &cp]);
    assert_eq!(code(&first), 3);
    assert_eq!(json(&first)["terminated"], false);
    let resumed = run(&["search-bk", "--k", "3", "--eps", "3/4", "--budget", "100000", "--resume", &cp]);
    assert_eq!(code(&resumed), 0);
    let fresh = run(&["search-bk", "--k", "3", "--eps", "3/4"]);
    assert_eq!(json(&resumed)["max_length"], json(&fresh)["max_length"]);
    assert_eq!(json(&resumed)["witness"], json(&fresh)["witness"]);
    assert_eq!(code(&run(&["search-bk", "--k", "4", "--eps", "3/4", "--resume", &cp])), 2);
}

#[test]
fn codec_demo_reports_every_trace() {
    let out = run(&["codec", "demo", "--n", "30", "--eps", "3/4", "--delta", "1/10", "--traces", "25"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["success_rate"], "25/25");
}

#[test]
fn stream_symbols_are_stable() {
    let a = run(&["--seed", "3", "stream", "window", "--pos", "5", "--len", "10"]);
    let b = run(&["--seed", "3", "stream", "window", "--pos", "5", "--len", "10"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let at = run(&["--seed", "3", "stream", "at", "--pos", "7"]);
    let lines = |o: &Output| String::from_utf8(o.stdout.clone()).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(lines(&at)[1], lines(&a)[3]);
    assert_eq!(code(&run(&["stream", "at", "--pos", "0"])), 2);
}

#[test]
fn ecc_decode_fills_erasures() {
    let dir = tempfile::tempdir().unwrap();
    let c = path(dir.path(), "code.txt");
    assert_eq!(code(&run(&["ecc", "rs", "--m", "6", "--k", "2", "--q", "7", "-o", &c])), 0);
    let text = std::fs::read_to_string(&c).unwrap();
    let word: Vec<&str> = text.lines().nth(10).unwrap().split_whitespace().collect();
    let mut noisy: Vec<String> = word.iter().map(|s| s.to_string()).collect();
    noisy[0] = "_".into();
    noisy[3] = ((noisy[3].parse::<u32>().unwrap() + 1) % 7).to_string();
    let out = run(&["ecc", "decode", "--code", &c, "--word", &noisy.join(",")]);
    assert_eq!(code(&out), 0);
    let got: Vec<String> = json(&out)["codeword"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    assert_eq!(got, word);
}

#[test]
fn morphism_report_lists_rows() {
    let out = run(&["report", "morphism", "--max-m", "2"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out).to_string().contains("ratio"));
}
