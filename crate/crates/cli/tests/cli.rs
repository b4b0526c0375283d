use std::path::Path;

use closurelab_cli::run_with_args;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with_args(std::iter::once("closurelab").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: out,
        stderr: String::from_utf8_lossy(&err).into_owned(),
    }
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn write_manifest(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn middle_layers_closedness_is_four_sevenths() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "m.json",
        r#"{"command":"closedness","params":{"n":7,"a":"middle","exact":true},"seed":0}"#,
    );
    let r = run(&["run", "--manifest", &m]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["payload"]["eta"], "4/7");
    assert_eq!(v["payload"]["spectral_eta"], "4/7");
    assert_eq!(v["status"], "ok");
    // The manifest is echoed and hashed.
    assert_eq!(v["manifest"]["params"]["n"], 7);
    assert_eq!(v["manifest_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn flags_and_manifest_give_the_same_document() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "m.json",
        r#"{"command":"closedness","params":{"n":5,"a":"middle","exact":true},"seed":0}"#,
    );
    let a = run(&["--manifest", &m]);
    let b = run(&["closedness", "--n", "5", "--a", "middle", "--exact"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn forcing_pipeline_manifest_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "f.json",
        r#"{"command":"forcing-pipeline","params":{"shape":[4,4],"delta":"1/2"},"seed":3}"#,
    );
    let r = run(&["run", "--manifest", &m]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["payload"]["report"]["certificate"]["verified"], true);
}

#[test]
fn oversized_spectrum_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "s.json", r#"{"command":"spectrum","params":{"n":30,"set":"middle"},"seed":0}"#);
    let r = run(&["run", "--manifest", &m]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("budget"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn manifest_budget_lowers_the_exponent_cap() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        dir.path(),
        "s.json",
        r#"{"command":"spectrum","params":{"n":9,"set":"middle"},"seed":0,"budgets":{"max_group_exponent":8}}"#,
    );
    assert_eq!(run(&["run", "--manifest", &m]).code, 3);
}

#[test]
fn unknown_keys_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let top = write_manifest(dir.path(), "a.json", r#"{"command":"scenarios","params":{},"seed":0,"extra":1}"#);
    let param = write_manifest(
        dir.path(),
        "b.json",
        r#"{"command":"closedness","params":{"n":5,"a":"middle","colour":"red"},"seed":0}"#,
    );
    assert_eq!(run(&["run", "--manifest", &top]).code, 1);
    let r = run(&["run", "--manifest", &param]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("colour"), "{}", r.stderr);
}

#[test]
fn missing_manifest_and_bad_usage_exit_one() {
    assert_eq!(run(&["run", "--manifest", "/nonexistent/m.json"]).code, 1);
    assert_eq!(run(&["closedness", "--n"]).code, 1);
    assert_eq!(run(&[]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let args = |w: &'static str| {
        vec!["--seed", "11", "--workers", w, "closedness", "--n", "9", "--a", "random:1/3", "--samples", "20000"]
    };
    let one = run(&args("1"));
    let four = run(&args("4"));
    assert_eq!(one.code, 0, "{}", one.stderr);
    assert_eq!(one.stdout, four.stdout);
    let p1 = run(&["--workers", "1", "forcing-pipeline", "--shape", "3,3"]);
    let p4 = run(&["--workers", "4", "forcing-pipeline", "--shape", "3,3"]);
    assert_eq!(p1.stdout, p4.stdout);
}

#[test]
fn selftest_is_deterministic_and_catches_a_fault() {
    let a = run(&["--seed", "5", "selftest"]);
    let b = run(&["--seed", "5", "selftest"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a.stdout)["all_pass"], true);
    let bad = run(&["--seed", "5", "selftest", "--inject-fault", "wht"]);
    assert_ne!(bad.code, 0);
    assert_eq!(json(&bad.stdout)["all_pass"], false);
}

#[test]
fn csv_output_is_rfc4180() {
    let r = run(&["--format", "csv", "scenarios"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("\r\n"));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().collect::<Result<_, _>>().unwrap();
    assert!(!rows.is_empty());
    let width = rdr.headers().unwrap().len();
    assert!(rows.iter().all(|r| r.len() == width));
}

#[test]
fn out_file_is_written_with_a_metadata_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.json");
    let out_s = out.to_str().unwrap();
    let r = run(&["--out", out_s, "closedness", "--n", "5", "--a", "middle", "--exact"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let doc = json(&std::fs::read(&out).unwrap());
    assert_eq!(doc["payload"]["eta"], "3/5");
    let meta = json(&std::fs::read(dir.path().join("res.json.meta.json")).unwrap());
    assert_eq!(meta["manifest_hash"], doc["manifest_hash"]);
    assert!(meta["elapsed_ms"].is_u64());
    assert!(doc.get("elapsed_ms").is_none());

    // A second run overwrites in place with identical bytes.
    let first = std::fs::read(&out).unwrap();
    assert_eq!(run(&["--out", out_s, "closedness", "--n", "5", "--a", "middle", "--exact"]).code, 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn counterexample_and_lsystem_run() {
    let r = run(&["counterexample", "--n", "16,25", "--samples", "2000", "--concentration-n", "20", "--concentration-w", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["payload"]["concentration"]["count"], "2");
    let l = run(&["lsystem", "--shape", "3,3"]);
    assert_eq!(l.code, 0, "{}", l.stderr);
}
