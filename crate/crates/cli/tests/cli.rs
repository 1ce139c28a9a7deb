use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCHEMA: &str = include_str!("../schemas/v1.schema.json");

fn weylwit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylwit")).args(args).current_dir(dir).output().expect("binary runs")
}

fn weylwit_threads(args: &[&str], dir: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylwit"))
        .args(args)
        .current_dir(dir)
        .env("WEYLWIT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

/// Validates `doc` against one definition of the published schema.
fn assert_schema(def: &str, doc: &Value) {
    let mut root: Value = serde_json::from_str(SCHEMA).unwrap();
    assert!(root["$defs"].get(def).is_some(), "schema has no definition {def}");
    root["$ref"] = Value::String(format!("#/$defs/{def}"));
    let v = jsonschema::validator_for(&root).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{def}: {errors:#?}");
}

struct Ws {
    dir: TempDir,
}

impl Ws {
    fn new() -> Self {
        Ws { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        weylwit(args, self.dir.path())
    }

    /// Runs a command that writes a file and checks it succeeded.
    fn make(&self, name: &str, args: &[&str]) -> Value {
        let mut full = vec!["--out", name];
        full.extend_from_slice(args);
        let out = self.run(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_str(&std::fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }
}

#[test]
fn iso_pipeline_through_the_binary() {
    let ws = Ws::new();
    let w = ws.make("w.json", &["build-iso", "--a", "3,1", "--b", "1"]);
    assert_schema("witness_iso", &w);
    assert_eq!(w["dim"], 5);

    let r = ws.make("r.json", &["build-iso", "--a", "3,1", "--b", "1", "--seed", "11"]);
    assert_schema("witness_iso", &r);
    assert_ne!(w["g"], r["g"]);

    let out = ws.run(&["validate", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_schema("validate", &v);
    assert_eq!(v["kind"], "iso");

    let n = ws.make("n.json", &["normalize", "r.json"]);
    assert_schema("witness_iso", &n);
    assert!(n["normalized"].is_array());

    let out = ws.run(&["transport", "w.json", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json_of(&out);
    assert_schema("transport", &t);
    assert_eq!(t["image_matches"], true);

    let out = ws.run(&["isotropy", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let i = json_of(&out);
    assert_schema("isotropy", &i);
    assert_eq!(i["order"].as_u64().unwrap(), 1 << i["sign_group_rank"].as_u64().unwrap());
    assert_eq!(i["negative_det"]["det_plus"], "-1/1");
    assert_eq!(i["special"]["det_matches"], true);
}

#[test]
fn component_of_even_orthogonal_witness() {
    let ws = Ws::new();
    ws.make("w.json", &["build-iso", "--a", "3", "--b", "1"]);
    let out = ws.run(&["component", "w.json"]);
    assert_eq!(out.status.code(), Some(0));
    let c = json_of(&out);
    assert_schema("component", &c);
    assert!(c["component"]["label"].is_u64());
}

#[test]
fn twisted_pipeline_through_the_binary() {
    let ws = Ws::new();
    let w = ws.make("w.json", &["build-twisted", "--a", "1", "--b", "2"]);
    assert_schema("witness_twisted", &w);
    let r = ws.make("r.json", &["build-twisted", "--a", "1", "--b", "2", "--seed", "4"]);
    assert_schema("witness_twisted", &r);

    let out = ws.run(&["validate", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_schema("validate", &json_of(&out));

    let n = ws.make("n.json", &["normalize", "r.json"]);
    assert_schema("witness_twisted", &n);

    let out = ws.run(&["transport", "w.json", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json_of(&out);
    assert_schema("transport", &t);
    assert_eq!(t["image_matches"], true);

    let out = ws.run(&["isotropy", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_schema("isotropy", &json_of(&out));

    let out = ws.run(&["sl-refine", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let s = json_of(&out);
    assert_schema("sl_refine", &s);
    assert_eq!(s["refinement"]["class_count"], 1);

    ws.make("z.json", &["build-twisted", "--a", "", "--b", "2"]);
    let out = ws.run(&["sl-refine", "z.json"]);
    assert_eq!(out.status.code(), Some(0));
    let s = json_of(&out);
    assert_schema("sl_refine", &s);
    assert_eq!(s["refinement"]["class_count"], 2);
}

#[test]
fn weyl_commands_match_schema() {
    let ws = Ws::new();
    let out = ws.run(&["weyl", "verify-table", "--type", "G2"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json_of(&out);
    assert_schema("table", &t);
    let rows = t["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass")));

    let out = ws.run(&["weyl", "find", "--type", "E8", "--factors", "Phi6^2*Phi12", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let f = json_of(&out);
    assert_schema("find", &f);
    assert_eq!(f["found"], true);
}

#[test]
fn selftest_matches_schema_and_passes() {
    let ws = Ws::new();
    let out = ws.run(&["selftest", "--max-dim", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let s = json_of(&out);
    assert_schema("selftest", &s);
    assert_eq!(s["passed"], true);
}

#[test]
fn every_document_is_tagged() {
    let ws = Ws::new();
    for args in [&["build-iso", "--a", "1", "--b", ""][..], &["weyl", "verify-table", "--type", "G2"]] {
        let v = json_of(&ws.run(args));
        assert_eq!(v["schema"], "v1", "{args:?}");
    }
}

#[test]
fn exit_codes() {
    let ws = Ws::new();
    assert_eq!(ws.run(&["validate", "missing.json"]).status.code(), Some(3));
    std::fs::write(ws.path("bad.json"), "{ not json").unwrap();
    assert_eq!(ws.run(&["validate", "bad.json"]).status.code(), Some(2));
    assert_eq!(ws.run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ws.run(&["build-iso", "--a", "x"]).status.code(), Some(2));
    // parity violation for the symmetric case
    assert_eq!(ws.run(&["build-iso", "--a", "3,1", "--b", "2"]).status.code(), Some(2));
    assert_eq!(ws.run(&["weyl", "verify-table", "--type", "Q9"]).status.code(), Some(2));
    // degree 2 cannot fill rank 8
    assert_eq!(ws.run(&["weyl", "find", "--type", "E8", "--factors", "6", "--budget", "10"]).status.code(), Some(2));
    // a real target with no budget is a check failure
    assert_eq!(ws.run(&["weyl", "find", "--type", "E8", "--factors", "30", "--budget", "0"]).status.code(), Some(1));

    // a tampered witness fails validation
    let mut w = ws.make("w.json", &["build-iso", "--a", "3", "--b", ""]);
    w["g"][0][0] = Value::String("5/1".into());
    std::fs::write(ws.path("t.json"), serde_json::to_string(&w).unwrap()).unwrap();
    let out = ws.run(&["validate", "t.json"]);
    assert!(matches!(out.status.code(), Some(1) | Some(2)), "{:?}", out.status);
    if out.status.code() == Some(1) {
        assert_eq!(json_of(&out)["passed"], false);
    }

    // component on a twisted witness, sl-refine on an iso witness
    ws.make("tw.json", &["build-twisted", "--a", "1", "--b", ""]);
    assert_eq!(ws.run(&["component", "tw.json"]).status.code(), Some(2));
    assert_eq!(ws.run(&["sl-refine", "w.json"]).status.code(), Some(2));

    assert_eq!(weylwit_threads(&["selftest", "--max-dim", "1"], ws.dir.path(), "zero").status.code(), Some(2));
    assert_eq!(ws.run(&["--out", "/nonexistent/dir/x.json", "build-iso", "--a", "1"]).status.code(), Some(3));
}

#[test]
fn output_is_byte_identical() {
    let ws = Ws::new();
    for args in [
        &["build-iso", "--a", "5,3", "--b", "2", "--seed", "9"][..],
        &["build-twisted", "--a", "2", "--b", "3", "--seed", "9"],
        &["weyl", "find", "--type", "E7", "--factors", "Phi18*Phi2", "--seed", "5"],
        &["selftest", "--max-dim", "4", "--seed", "2"],
    ] {
        let a = ws.run(args);
        let b = ws.run(args);
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let ws = Ws::new();
    for args in [
        &["weyl", "verify-table", "--type", "E8", "--search", "--seed", "3"][..],
        &["weyl", "find", "--type", "E8", "--factors", "12^2", "--seed", "1"],
    ] {
        let one = weylwit_threads(args, ws.dir.path(), "1");
        let four = weylwit_threads(args, ws.dir.path(), "4");
        assert_eq!(one.status.code(), four.status.code());
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}
