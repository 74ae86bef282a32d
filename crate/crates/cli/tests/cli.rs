use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hfpss::presentation::G24_JSON;

fn hfpss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfpss")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, assertions: &str) -> String {
    let p = dir.join("cfg.json");
    let out = dir.join("out");
    let cfg = format!(
        r#"{{"stem_min": 40, "stem_max": 50, "smax": 28, "stems": [45], "out": {:?}, "assertions": {assertions}}}"#,
        out.display().to_string()
    );
    fs::write(&p, cfg).unwrap();
    p.display().to_string()
}

#[test]
fn stab_norm_of_omega() {
    let o = hfpss(&["stab", "norm", "--a", "w", "--b", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn stab_find_order4() {
    let o = hfpss(&["stab", "find-order4", "-N", "8"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("98304 solutions"), "{s}");
    assert!(s.matches("[ok]").count() >= 2);
    assert!(!s.contains("FAIL"));
}

#[test]
fn stab_closure() {
    let o = hfpss(&["stab", "closure", "--gens", "i,j,w"]);
    assert_eq!(stdout(&o).trim(), "order 24, stabilized");
    let o = hfpss(&["stab", "closure", "--gens", "i,nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dual_commands() {
    let o = hfpss(&["dual", "ledger"]);
    assert!(stdout(&o).ends_with("total 44\n"));
    let o = hfpss(&["dual", "ledger", "--k", "0"]);
    assert!(stdout(&o).ends_with("total -4\n"));
    let o = hfpss(&["dual", "restrict", "--group", "C6"]);
    assert!(stdout(&o).ends_with("44\n"));
    let o = hfpss(&["dual", "ledger", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hfpss(&["dual", "collapse"]);
    assert!(stdout(&o).ends_with("Collapses\n"));
}

#[test]
fn default_run_fails_its_assertions() {
    // stem 45 carries an extra pair at s = 15 and stems -1, 63, 127 are
    // nonempty when d_r = 0 for r > 7
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hfpss(&["sseq", "run", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert_eq!(s.matches("FAIL").count(), 4, "{s}");
    for f in ["run.json", "stem_45.json", "stem_-1.json", "stem_63.json", "stem_127.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn assertion_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let wrong = write_config(dir.path(), r#"[{"stem": 45, "dimension": 3}]"#);
    assert_eq!(hfpss(&["sseq", "run", "--config", &wrong]).status.code(), Some(1));
    let low = r#"[{"stem": 45, "dimension": 2, "filtrations": [5], "max_filtration": 12,
                  "classes": ["D*kbar*eta", "w*D*kbar*eta"]}]"#;
    let right = write_config(dir.path(), low);
    let o = hfpss(&["sseq", "run", "--config", &right]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = fs::read_to_string(dir.path().join("out/stem_45.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["stem"], 45);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[]");
    assert!(hfpss(&["sseq", "run", "--config", &cfg]).status.success());
    let first = fs::read(dir.path().join("out/run.json")).unwrap();
    assert!(hfpss(&["sseq", "run", "--config", &cfg, "--jobs", "2"]).status.success());
    assert_eq!(first, fs::read(dir.path().join("out/run.json")).unwrap());
}

#[test]
fn corrupted_relation_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g24.json");
    let bad = G24_JSON.replacen("c4^3", "c4^^3", 1);
    assert_ne!(bad, G24_JSON);
    fs::write(&p, bad).unwrap();
    let o = hfpss(&["sseq", "run", "--presentation", p.to_str().unwrap(), "--smax", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    let re_line = err.contains("line") || err.split(':').filter(|t| t.trim().parse::<u32>().is_ok()).count() >= 2;
    assert!(re_line, "{err}");

    fs::write(&p, "{\n  \"generators\": [\n    oops\n").unwrap();
    let o = hfpss(&["sseq", "run", "--presentation", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("3:"), "{err}");
}

#[test]
fn bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    fs::write(&p, r#"{"n": 1}"#).unwrap();
    assert_eq!(hfpss(&["sseq", "run", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(hfpss(&["sseq", "run", "--stem-min", "5", "--stem-max", "4"]).status.code(), Some(2));
}

#[test]
fn charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["chart", "--page", "2", "--stem-min", "-8", "--stem-max", "60", "--smax", "12"];
    let o = hfpss(&[&args[..], &["--from", "0", "--to", "48", "--out", out, "--print"]].concat());
    assert!(o.status.success());
    let txt = fs::read_to_string(dir.path().join("charts/e2.txt")).unwrap();
    let bottom = txt.lines().find(|l| l.starts_with("  0 |")).unwrap();
    assert!(bottom.trim_start_matches("  0 |").trim_start().starts_with('□'), "{bottom}");
    let s1 = txt.lines().find(|l| l.starts_with("  1 |")).unwrap();
    // columns are 3 wide; stem 3 is the fourth
    assert_eq!(s1[5..].chars().skip(9).take(3).collect::<String>().trim(), "◉");
    let svg = fs::read(dir.path().join("charts/e2.svg")).unwrap();
    let o = hfpss(&[&args[..], &["--from", "0", "--to", "48", "--out", out]].concat());
    assert!(o.status.success());
    assert_eq!(svg, fs::read(dir.path().join("charts/e2.svg")).unwrap());

    let o = hfpss(&["chart", "--stem-min", "40", "--stem-max", "50", "--smax", "12", "--out", out]);
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("charts/einf.svg")).unwrap();
    assert!(svg.contains("<title>D*kbar*eta</title>"));

    let o = hfpss(&["chart", "--page", "40", "--smax", "4", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let o = hfpss(&["chart", "--page", "2", "--smax", "4", "--from", "10", "--to", "9", "--out", out]);
    assert!(o.status.success());
}
