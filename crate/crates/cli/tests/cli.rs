use std::path::Path;
use std::process::{Command, Output};

use cpc_core::search::CodeRecord;

const RANGE: &str = "1000000000:1001000000";

fn cpc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(text: &str) -> Vec<CodeRecord> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn empty_range_is_a_successful_empty_search() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&cpc(dir.path(), &["search", "--range", "0:0"]));
    assert!(out.is_empty());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(String, String)> = ["1", "3"]
        .iter()
        .map(|t| {
            let codes = format!("codes{t}.jsonl");
            ok(&cpc(dir.path(), &["search", "--range", RANGE, "--threads", t, "--out", &codes]));
            let compiled = ok(&cpc(dir.path(), &["simplify", "--in", &codes, "--threads", t]));
            (std::fs::read_to_string(dir.path().join(&codes)).unwrap(), compiled)
        })
        .collect();
    assert!(!runs[0].0.is_empty());
    assert_eq!(runs[0], runs[1]);
    let sampled: Vec<String> = ["1", "2"]
        .iter()
        .map(|t| ok(&cpc(dir.path(), &["search", "--samples", "200000", "--seed", "5", "--threads", t])))
        .collect();
    assert_eq!(sampled[0], sampled[1]);
}

#[test]
fn pipeline_stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&cpc(d, &["search", "--range", RANGE, "--out", "codes.jsonl", "--summary", "sum.json", "--hist", "h.csv"]));
    let found = records(&std::fs::read_to_string(d.join("codes.jsonl")).unwrap());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("sum.json")).unwrap()).unwrap();
    assert_eq!(summary["valid_count"].as_u64().unwrap() as usize, found.len());
    let hist = std::fs::read_to_string(d.join("h.csv")).unwrap();
    assert!(hist.starts_with("bin,count\n"));
    let total: usize = hist.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, found.len());

    // every emitted record re-validates
    let v: serde_json::Value = serde_json::from_str(&ok(&cpc(d, &["verify", "--in", "codes.jsonl"]))).unwrap();
    assert_eq!(v["valid"].as_u64().unwrap() as usize, found.len());

    let routed = records(&ok(&cpc(d, &["route", "--in", "codes.jsonl", "--layout", "A,B,C,p1,p2,p3,p4"])));
    assert!(routed.iter().all(|r| r.swap_count.is_some() && r.local_count.is_none()));

    ok(&cpc(d, &["simplify", "--in", "codes.jsonl", "--check", "--out", "simp.jsonl", "--circuits", "circ.jsonl"]));
    let simp = records(&std::fs::read_to_string(d.join("simp.jsonl")).unwrap());
    for (a, b) in routed.iter().zip(&simp) {
        assert_eq!(a.swap_count, b.swap_count);
        assert_eq!(b.l_total.unwrap(), b.cpc_count + b.swap_count.unwrap() + b.local_count.unwrap());
    }
    let lowered = ok(&cpc(d, &["lower", "--in", "codes.jsonl", "--native", "sp"]));
    for (line, s) in lowered.lines().zip(&simp) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["local_count"].as_u64().unwrap() >= u64::from(s.local_count.unwrap()));
        assert!(v["circuit"]["gates"][0]["kind"].is_string());
    }

    let report: serde_json::Value = serde_json::from_str(&ok(&cpc(d, &["report", "--in", "simp.jsonl", "--weights", "1,1,1", "--hist-dir", "hist"]))).unwrap();
    let best = &report["optimum"];
    let min_l = simp.iter().map(|r| r.l_total.unwrap()).min().unwrap();
    assert_eq!(best["l_total"].as_u64().unwrap(), u64::from(min_l));
    assert_eq!(best["r_weighted"].as_f64().unwrap(), f64::from(min_l));
    assert!(d.join("hist/l_total.csv").exists());

    // heavier CPC weight changes the cost but the report still picks a minimum
    let weighted: serde_json::Value = serde_json::from_str(&ok(&cpc(d, &["report", "--in", "simp.jsonl", "--weights", "2,1,1"]))).unwrap();
    let min_r = simp.iter().map(|r| 2 * r.cpc_count + r.swap_count.unwrap() + r.local_count.unwrap()).min().unwrap();
    assert_eq!(weighted["optimum"]["r_weighted"].as_f64().unwrap(), f64::from(min_r));

    let canon: serde_json::Value = {
        ok(&cpc(d, &["canon", "--in", "codes.jsonl", "--summary", "canon.json", "--out", "canon.jsonl"]));
        serde_json::from_str(&std::fs::read_to_string(d.join("canon.json")).unwrap()).unwrap()
    };
    assert_eq!(canon["classes"], summary["class_count"]);
}

#[test]
fn malformed_lines_are_counted_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&cpc(d, &["search", "--range", RANGE, "--out", "codes.jsonl"]));
    let text = std::fs::read_to_string(d.join("codes.jsonl")).unwrap();
    let mut lines: Vec<&str> = text.lines().take(3).collect();
    lines.insert(1, "{not json");
    std::fs::write(d.join("mixed.jsonl"), lines.join("\n")).unwrap();
    let o = cpc(d, &["verify", "--in", "mixed.jsonl"]);
    let v: serde_json::Value = serde_json::from_str(&ok(&o)).unwrap();
    assert_eq!(v["malformed_lines"], 1);
    assert_eq!(v["valid"], 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mixed.jsonl:2"));
}

#[test]
fn exit_codes_separate_config_from_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cpc(d, &["search", "--errset", "xq"]).status.code(), Some(2));
    assert_eq!(cpc(d, &["search", "--range", "9:1"]).status.code(), Some(2));
    assert_eq!(cpc(d, &["verify", "--in", "missing.jsonl"]).status.code(), Some(2));
    assert_eq!(cpc(d, &["simulate", "--code", "builtin:422", "--p", "0.9"]).status.code(), Some(2));
    assert_eq!(cpc(d, &["route", "--in", "x", "--layout", "A,A,B"]).status.code(), Some(2));
    ok(&cpc(d, &["search", "--range", RANGE, "--out", "codes.jsonl"]));
    // records of the wrong shape or failing a stricter rule are data errors
    assert_eq!(cpc(d, &["verify", "--in", "codes.jsonl", "--n", "4", "--k", "2"]).status.code(), Some(3));
    assert_eq!(cpc(d, &["simplify", "--in", "codes.jsonl", "--n", "6"]).status.code(), Some(3));
    assert_eq!(cpc(d, &["stats", "--in", "codes.jsonl", "--metric", "local"]).status.code(), Some(3));
    std::fs::write(d.join("bad.json"), "not a code").unwrap();
    assert_eq!(cpc(d, &["faultscan", "--code", "bad.json"]).status.code(), Some(3));
}

#[test]
fn noise_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let csv = ok(&cpc(d, &["simulate", "--code", "builtin:422", "--p", "0.001,0.002", "--exact-weight", "2"]));
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!(csv.starts_with("p,raw,postselected,yield\n"));
    assert_eq!(rows.len(), 2);
    assert!((rows[1][2] / rows[0][2] - 4.0).abs() < 0.8);
    let a = ok(&cpc(d, &["simulate", "--code", "builtin:422", "--px", "0.02", "--pz", "0.01", "--shots", "20000", "--seed", "4"]));
    let b = ok(&cpc(d, &["simulate", "--code", "builtin:422", "--px", "0.02", "--pz", "0.01", "--shots", "20000", "--seed", "4", "--threads", "2"]));
    assert_eq!(a, b);

    let hardened: Vec<serde_json::Value> = serde_json::from_str(&ok(&cpc(d, &["faultscan", "--code", "builtin:422-hardened"]))).unwrap();
    assert!(hardened.is_empty());
    let open: Vec<serde_json::Value> =
        serde_json::from_str(&ok(&cpc(d, &["faultscan", "--code", "builtin:422-nocross", "--stabs", ""]))).unwrap();
    assert!(!open.is_empty());

    ok(&cpc(d, &["search", "--range", RANGE, "--out", "codes.jsonl"]));
    let first = std::fs::read_to_string(d.join("codes.jsonl")).unwrap().lines().next().unwrap().to_string();
    std::fs::write(d.join("code.json"), first).unwrap();
    let csv = ok(&cpc(d, &["simulate", "--code", "code.json", "--p", "0.001", "--exact-weight", "1", "--lookup"]));
    assert_eq!(csv.lines().nth(1).unwrap().rsplit(',').next().unwrap(), "0");
}
