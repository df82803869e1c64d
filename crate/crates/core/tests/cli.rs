use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn spec(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a CSV file, skipping metadata and the column header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn num(x: &str) -> f64 {
    x.parse().unwrap()
}

#[test]
fn driverless_trace_csv() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "const0.json", r#"{"kind":"constant","c":{"re":0,"im":0}}"#);
    let out = dir.path().join("tr.csv");
    let o = loewner(&["trace", "--driver", s(&d), "--n", "32", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# tool: loewner"));
    assert!(text.contains("# driver_fingerprint: "));
    let r = rows(&text);
    assert_eq!(r.len(), 65);
    for row in &r {
        let t = num(&row[0]);
        assert!(num(&row[1]).abs() < 1e-12);
        assert!((num(&row[2]) - 2.0 * t.signum() * t.abs().sqrt()).abs() < 1e-6);
    }
}

#[test]
fn constant_driver_verifies() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "const_c.json", r#"{"kind":"constant","c":{"re":0.3,"im":0.2}}"#);
    let o = loewner(&["verify", "--driver", s(&d), "--suite", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = rep["entries"].as_array().unwrap();
    assert!(entries.len() >= 20);
    assert!(entries.iter().all(|e| e["pass"] == true));
    assert_eq!(rep["meta"]["driver_kind"], "constant");
    assert_eq!(rep["meta"]["driver_fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn over_budget_driver_fails_verification() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "big.json", r#"{"kind":"sqrt","coef":{"re":1.5,"im":0}}"#);
    let o = loewner(&["verify", "--driver", s(&d), "--suite", "cone"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn driverless_hull_csv_and_svg() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "const0.json", r#"{"kind":"constant","c":{"re":0,"im":0}}"#);
    let out = dir.path().join("h.csv");
    let svg = dir.path().join("h.svg");
    let args = ["hull", "--driver", s(&d), "--t", "1", "--grid", "-3,3,-3,3,64,64", "--out", s(&out), "--svg", s(&svg)];
    let o = loewner(&args);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r.len(), 64 * 64);
    let pixel = 6.0 / 64.0 * 2f64.sqrt();
    let mut dead = 0;
    for row in &r {
        let (x, y) = (num(&row[0]), num(&row[1]));
        // distance to the segment [−2i, 2i]
        let dist = x.hypot((y.abs() - 2.0).max(0.0));
        if dist > pixel {
            assert_eq!(row[2], "inf", "({x}, {y})");
        }
        if row[2] != "inf" {
            dead += 1;
        }
    }
    assert!(dead > 0);

    let first = std::fs::read(&svg).unwrap();
    assert_eq!(loewner(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&svg).unwrap(), first);
    assert_eq!(String::from_utf8(first).unwrap().matches("<rect").count(), 64 * 64);
}

#[test]
fn right_hull_of_driverless_flow() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "const0.json", r#"{"kind":"constant","c":{"re":0,"im":0}}"#);
    let o = loewner(&["right-hull", "--driver", s(&d), "--t", "1", "--grid", "-3,3,-3,3,32,32"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 32 * 32);
    // the right hull of the driverless flow is the segment [−2, 2]
    let pixel = 6.0 / 32.0 * 2f64.sqrt();
    for row in &r {
        let (x, y) = (num(&row[0]), num(&row[1]));
        if y.hypot((x.abs() - 2.0).max(0.0)) > pixel {
            assert_eq!(row[2], "inf", "({x}, {y})");
        }
    }
}

#[test]
fn motion_of_constant_driver() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "c.json", r#"{"kind":"constant","c":{"re":0.3,"im":0.2}}"#);
    let svg = dir.path().join("m.svg");
    let o = loewner(&["motion", "--driver", s(&d), "--radius", "0.5", "--count", "8", "--n", "4", "--svg", s(&svg)]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(r.len(), 9 * 5);
    for row in &r {
        let (ar, ai, t) = (num(&row[0]), num(&row[1]), num(&row[2]));
        let want_re = 0.3 * ar - 0.2 * ai;
        let want_im = 2.0 * t.sqrt() + 0.3 * ai + 0.2 * ar;
        assert!((num(&row[3]) - want_re).abs() < 1e-6);
        assert!((num(&row[4]) - want_im).abs() < 1e-6);
    }
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 9);
}

#[test]
fn derivative_and_norm_json() {
    let dir = TempDir::new().unwrap();
    let d = spec(&dir, "z.json", r#"{"kind":"constant","c":{"re":0,"im":0}}"#);
    let o = loewner(&["derivative", "--driver", s(&d), "--t", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["derivative"]["re"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["derivative"]["im"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(v["meta"]["config"]["t"].as_f64() == Some(0.25));

    let o = loewner(&["derivative", "--driver", s(&d), "--t", "-0.25"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["derivative"]["im"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let sq = spec(&dir, "sq.json", r#"{"kind":"sqrt","coef":{"re":0.3,"im":0.4}}"#);
    let o = loewner(&["norm", "--driver", s(&sq)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["norm_lower_bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    // a rough driver has no derivative formula
    let o = loewner(&["derivative", "--driver", s(&sq), "--t", "0.25"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(loewner(&["trace", "--driver", s(&missing)]).status.code(), Some(2));
    let unknown = spec(&dir, "u.json", r#"{"kind":"constant","c":{"re":0,"im":0},"colour":1}"#);
    assert_eq!(loewner(&["trace", "--driver", s(&unknown)]).status.code(), Some(2));
    let malformed = spec(&dir, "m.json", "{");
    assert_eq!(loewner(&["norm", "--driver", s(&malformed)]).status.code(), Some(2));
    let ok = spec(&dir, "ok.json", r#"{"kind":"constant","c":{"re":0,"im":0}}"#);
    assert_eq!(loewner(&["hull", "--driver", s(&ok), "--grid", "1,2,3"]).status.code(), Some(2));
    assert_eq!(loewner(&["hull", "--driver", s(&ok), "--t", "2"]).status.code(), Some(2));
    assert_eq!(loewner(&["verify", "--driver", s(&ok), "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(loewner(&["--threads", "0", "norm", "--driver", s(&ok)]).status.code(), Some(2));
    assert_eq!(loewner(&["teleport"]).status.code(), Some(2));
}
