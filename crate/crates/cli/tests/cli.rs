use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn uhatforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhatforge"))
        .args(args)
        .current_dir(dir)
        .env_remove("UHATFORGE_CAPS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(out).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

#[test]
fn eval_verdicts_and_parse_errors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let up = uhatforge(d, &["examples", "uptrend7", "--out", "up.ltl"]);
    assert_eq!(code(&up), 0, "{}", stderr(&up));
    file(&dir, "dbl.seq", "# doubling\n1\n2\n4\n8\n16\n32\n64\n128\n");
    let out = uhatforge(d, &["eval", "up.ltl", "dbl.seq"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("accept"));

    file(&dir, "next.ltl", "# needs a successor\nX true\n");
    file(&dir, "one.seq", "5\n");
    let out = uhatforge(d, &["--format", "json", "eval", "next.ltl", "one.seq"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["verdict"], "reject");
    assert_eq!(v["flags"], serde_json::json!([false]));

    file(&dir, "bad.seq", "1\n2/x\n");
    let out = uhatforge(d, &["eval", "next.ltl", "bad.seq"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2:1"), "{}", stderr(&out));

    file(&dir, "broken.ltl", "\n\nX (x[1][1] >\n");
    let out = uhatforge(d, &["eval", "broken.ltl", "one.seq"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("parse error at 3:"), "{}", stderr(&out));
}

#[test]
fn eval_with_predicate_file() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    file(&dir, "preds.json", r#"{"mid3": {"table": {"3": [0, 1, 0]}}}"#);
    file(&dir, "f.ltl", "X pred mid3\n");
    file(&dir, "s.seq", "0\n0\n0\n");
    let out = uhatforge(d, &["eval", "f.ltl", "s.seq", "--preds", "preds.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("       1 1\n       2 0\n       3 0"),
        "{}",
        stdout(&out)
    );
    let out = uhatforge(d, &["eval", "f.ltl", "s.seq"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bundled_machines_decide_their_languages() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&uhatforge(d, &["examples", "double", "--out", "double.json"])), 0);
    assert_eq!(
        code(&uhatforge(d, &["examples", "greater-than", "--out", "gt.json"])),
        0
    );
    file(&dir, "s.seq", "1\n3\n7\n");
    file(&dir, "t.seq", "1\n2\n");
    file(&dir, "pair.seq", "2 1\n");
    assert_eq!(code(&uhatforge(d, &["accepts", "double.json", "s.seq"])), 0);
    assert_eq!(code(&uhatforge(d, &["accepts", "double.json", "t.seq"])), 1);
    assert_eq!(code(&uhatforge(d, &["accepts", "gt.json", "pair.seq"])), 0);
    let mismatch = uhatforge(d, &["accepts", "gt.json", "s.seq"]);
    assert_eq!(code(&mismatch), 2);
    assert!(stderr(&mismatch).contains("dimension mismatch"));

    let run = uhatforge(d, &["--format", "json", "run", "double.json", "s.seq"]);
    assert_eq!(code(&run), 0);
    assert_eq!(json(&run)["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn sqrt2_machine_over_its_field() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let input = uhatforge(d, &["examples", "sqrt2-input", "--out", "in.seq"]);
    assert_eq!(code(&input), 0);
    assert_eq!(code(&uhatforge(d, &["examples", "sqrt2", "--out", "yes.json"])), 0);
    assert_eq!(
        code(&uhatforge(
            d,
            &["examples", "sqrt2", "--alpha", "1", "--beta", "2", "--out", "no.json"]
        )),
        0
    );
    assert_eq!(code(&uhatforge(d, &["accepts", "yes.json", "in.seq"])), 0);
    assert_eq!(code(&uhatforge(d, &["accepts", "no.json", "in.seq"])), 1);
    // the whole machine is too large to lower at any length
    let out = uhatforge(d, &["lower", "yes.json", "--n", "3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn compile_is_deterministic_and_self_checks() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    file(&dir, "a.ltl", "x[1][1] > 2*x[2][1] | !X true\n");
    let a = uhatforge(d, &["compile", "a.ltl"]);
    let b = uhatforge(d, &["compile", "a.ltl"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let machine: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let sha = machine["metadata"]["formula_sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);

    let out = uhatforge(
        d,
        &[
            "--format",
            "json",
            "compile",
            "a.ltl",
            "--out",
            "a.json",
            "--self-check",
            "100",
            "--seed",
            "9",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["dim"], 1);
    assert!(v["self_check"]["mismatch"].is_null());
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));

    file(&dir, "wide.ltl", "x[1][3] > 0\n");
    let out = uhatforge(d, &["--format", "json", "compile", "wide.ltl", "--out", "w.json"]);
    assert_eq!(json(&out)["dim"], 3);
    file(&dir, "row.seq", "0 0 1\n");
    assert_eq!(code(&uhatforge(d, &["accepts", "w.json", "row.seq"])), 0);
}

#[test]
fn lower_then_check_equivalence() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    uhatforge(d, &["examples", "double", "--out", "double.json"]);
    let out = uhatforge(
        d,
        &[
            "--format",
            "json",
            "lower",
            "double.json",
            "--n",
            "3",
            "--out",
            "d3.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["nvars"], 8);
    assert!(report["alternations"].as_u64() <= report["alternation_bound"].as_u64());
    assert!(report["degree"].as_u64().unwrap() <= 2);

    let out = uhatforge(
        d,
        &[
            "check-equiv",
            "double.json",
            "d3.json",
            "--n",
            "3",
            "--grid",
            "2",
            "--seed",
            "4",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("125 grid inputs"));

    // a constraint for a different length is rejected up front
    assert_eq!(
        code(&uhatforge(d, &["check-equiv", "double.json", "d3.json", "--n", "2"])),
        2
    );

    // "always accept" over the same variables
    file(
        &dir,
        "always.json",
        r#"{"field": "Q", "nvars": 8, "pc": {"rel": ">", "poly": [{"coef": "1", "exps": [0, 0, 0, 0, 0, 0, 0, 0]}]}}"#,
    );
    let out = uhatforge(
        d,
        &[
            "--format",
            "json",
            "check-equiv",
            "double.json",
            "always.json",
            "--n",
            "3",
        ],
    );
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert_eq!(json(&out)["result"], "mismatch");
}

#[test]
fn resource_caps_from_environment() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    uhatforge(d, &["examples", "double", "--out", "double.json"]);
    let out = Command::new(env!("CARGO_BIN_EXE_uhatforge"))
        .args(["lower", "double.json", "--n", "3"])
        .current_dir(d)
        .env("UHATFORGE_CAPS", "assignments=10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_uhatforge"))
        .args(["lower", "double.json", "--n", "3"])
        .current_dir(d)
        .env("UHATFORGE_CAPS", "nonsense")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn rationalize_constraints() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    uhatforge(d, &["examples", "double", "--out", "double.json"]);
    uhatforge(d, &["lower", "double.json", "--n", "2", "--out", "d2.json"]);
    let out = uhatforge(
        d,
        &[
            "--format",
            "json",
            "rationalize",
            "d2.json",
            "--m",
            "3",
            "--out",
            "r2.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["rewritten"], 0);
    let before: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("d2.json")).unwrap()).unwrap();
    let after: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r2.json")).unwrap()).unwrap();
    assert_eq!(before, after);

    // first layer of the sqrt2 machine: accept iff √2·c0 > 0 at position 1
    uhatforge(d, &["examples", "sqrt2", "--out", "s2.json"]);
    let prefix = ["--layers", "1", "--accept-vector", "1,0,0,0,0"];
    let mut args = vec!["lower", "s2.json", "--n", "2", "--out", "p.json"];
    args.extend(prefix);
    assert_eq!(code(&uhatforge(d, &args)), 0);
    let out = uhatforge(
        d,
        &[
            "--format",
            "json",
            "rationalize",
            "p.json",
            "--m",
            "3",
            "--out",
            "pr.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["rewritten"], 1);
    assert!(v["checked_inputs"].as_u64().unwrap() > 0);
    let rat: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("pr.json")).unwrap()).unwrap();
    assert_eq!(rat["field"], "Q");
    let mut args = vec!["check-equiv", "s2.json", "pr.json", "--n", "2", "--samples", "300"];
    args.extend(prefix);
    let out = uhatforge(d, &args);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));

    assert_eq!(code(&uhatforge(d, &["rationalize", "missing.json", "--m", "3"])), 2);

    // without --out the file is rewritten in place
    let out = uhatforge(d, &["rationalize", "p.json", "--m", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let in_place: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    assert_eq!(in_place, rat);
}

#[test]
fn listing_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = uhatforge(d, &["--format", "json", "examples"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["machines"].as_array().unwrap().iter().any(|m| m == "double"));
    assert_eq!(v["formulas"].as_array().unwrap().len(), 9);
    assert_eq!(code(&uhatforge(d, &["examples", "nope"])), 2);
    let out = uhatforge(d, &["examples", "--out", "all"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for name in [
        "double.json",
        "greater-than.json",
        "sqrt2.json",
        "sqrt2-input.seq",
        "uptrend7.ltl",
        "recurrence.ltl",
    ] {
        assert!(d.join("all").join(name).is_file(), "{name}");
    }
    assert_eq!(
        code(&uhatforge(d, &["accepts", "all/sqrt2.json", "all/sqrt2-input.seq"])),
        0
    );
    assert_eq!(code(&uhatforge(d, &["frobnicate"])), 2);
}
