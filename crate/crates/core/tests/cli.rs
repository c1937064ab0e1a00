use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hgeo"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_then_verify() {
    let json = scratch("solve.json");
    let out = bin()
        .args(["solve", config("so3_four_rays.toml").to_str().unwrap(), "--json"])
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["version"], "hgeo-report/1");
    assert_eq!(doc["audit"]["count"], 4);
    assert_eq!(doc["audit"]["pass"], true);

    let out = bin()
        .arg("verify")
        .arg(&json)
        .arg(config("so3_four_rays.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // verifying against a different problem fails the residual check
    let out = bin()
        .arg("verify")
        .arg(&json)
        .arg(config("so3_two_rays.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_flag_is_deterministic() {
    let run = |seed: &str| {
        bin()
            .args(["solve", config("sl2.toml").to_str().unwrap(), "--json", "-", "--seed", seed])
            .output()
            .unwrap()
    };
    let a = run("7");
    let b = run("7");
    assert_eq!(a.status.code(), Some(0));
    let rays = |o: &std::process::Output| {
        let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        doc["rays"].clone()
    };
    assert_eq!(rays(&a), rays(&b));
}

#[test]
fn input_errors_exit_with_one() {
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "[algebra]\nfamily = \"so3\"\na = 1\nb = 2\nc = 1\n[metric]\nv = [1, 0, 0]\n").unwrap();
    let out = bin().arg("solve").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("metric.v"));

    let out = bin().args(["solve", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_and_plot() {
    let out = bin()
        .args(["analyze", config("sl2.toml").to_str().unwrap(), "--json", "-"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["required_minimum"], 4);

    let svg = scratch("sl2.svg");
    let out = bin()
        .args(["plot", config("sl2.toml").to_str().unwrap(), "--plane", "x3=0", "--out"])
        .arg(&svg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    for id in ["id=\"blue\"", "id=\"green\"", "id=\"red\"", "id=\"red-3\""] {
        assert!(text.contains(id), "missing {id}");
    }
    let blue = text.find("id=\"blue\"").unwrap();
    let green = text.find("id=\"green\"").unwrap();
    let red = text.find("id=\"red\"").unwrap();
    assert!(blue < green && green < red);
}

#[test]
fn small_sweep() {
    let out = bin()
        .args(["sweep", "--family", "mixed", "--trials", "4", "--seed", "3", "--starts", "300"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["trials"], 4);
    assert_eq!(doc["failures"].as_array().unwrap().len(), 0);
}
