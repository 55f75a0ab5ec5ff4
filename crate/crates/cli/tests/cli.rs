use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURES: [&str; 7] = [
    "gersten", "quad", "notrich1", "notrich2", "rank2", "nested", "eg",
];

fn fixture(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(file)
}

fn fbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fbc_on(sub: &str, file: &str, extra: &[&str]) -> Output {
    let path = fixture(file);
    let mut args = vec![sub, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    fbc(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fbc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn malformed_input_exits_with_two() {
    let path = temp_file("malformed.tt", "vertex x\nedge a x y\n");
    let out = fbc(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn non_normal_form_exits_with_two() {
    let path = temp_file(
        "hanging.tt",
        "vertex x\nvertex y\nedge a x x\nedge b x x\nedge h y x\nmap a = a\nmap b = b a\nmap h = h a a\n",
    );
    let out = fbc(&["decide", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("valence one"));
}

#[test]
fn fixtures_validate() {
    for name in FIXTURES {
        let out = fbc_on("validate", &format!("{name}.tt"), &[]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn gersten_is_not_hhg() {
    let out = fbc_on("decide", "gersten.tt", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["hhg"], Value::Bool(false));
    assert_eq!(v["excessive"]["axis"], "a");
    assert_eq!(v["witness"]["triple_intersection"][1]["word"], "a a");

    let out = fbc_on("decide", "gersten.tt", &["--exit-verdict"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn quad_headline() {
    let out = fbc_on("decide", "quad.tt", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).lines().next(),
        Some("HHG: yes (quadratic growth)")
    );
    let out = fbc_on("decide", "quad.tt", &["--exit-verdict"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn eg_verdict_carries_caveat() {
    let v = json(&fbc_on("decide", "eg.tt", &["--json"]));
    assert_eq!(v["hhg"], Value::Bool(true));
    assert_eq!(v["caveats"].as_array().unwrap().len(), 1);
}

#[test]
fn json_output_is_deterministic() {
    for name in FIXTURES {
        for sub in ["decide", "classify", "nielsen", "delta"] {
            let file = format!("{name}.tt");
            let extra: &[&str] = if sub == "decide" {
                &["--json", "--all"]
            } else {
                &["--json"]
            };
            let a = fbc_on(sub, &file, extra);
            let b = fbc_on(sub, &file, extra);
            assert_eq!(a.status.code(), Some(0), "{sub} {name}");
            assert_eq!(a.stdout, b.stdout, "{sub} {name}");
            json(&a);
        }
    }
}

#[test]
fn powers_give_the_same_verdict() {
    for name in FIXTURES {
        let file = format!("{name}.tt");
        let mut v1 = json(&fbc_on("decide", &file, &["--json"]));
        let mut v2 = json(&fbc_on("decide", &file, &["--json", "--power", "2"]));
        // Witness words depend on the map; the verdict must not.
        v1.as_object_mut().unwrap().remove("witness");
        v2.as_object_mut().unwrap().remove("witness");
        assert_eq!(v1, v2, "{name}");
    }
}

#[test]
fn direct_delta_mode() {
    let out = fbc(&[
        "delta",
        "--from-delta",
        fixture("cat0nonhhg.delta").to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["unbranched"], Value::Bool(false));
    assert_eq!(v["max_black_valence"], 4);
}

#[test]
fn delta_dot_export() {
    let dot = std::env::temp_dir().join(format!("fbc-cli-{}-notrich1.dot", std::process::id()));
    let out = fbc_on("delta", "notrich1.tt", &["--dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert_eq!(text.matches(" -- ").count(), 2);
}

#[test]
fn witness_subcommand() {
    let out = fbc_on("witness", "gersten.tt", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 3);

    let out = fbc_on("witness", "quad.tt", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_subcommand_agrees() {
    let out = fbc_on("oracle", "notrich2.tt", &["--max-len", "8", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["agree"], Value::Bool(true));
}

#[test]
fn power_must_be_positive() {
    let out = fbc_on("decide", "quad.tt", &["--power", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
