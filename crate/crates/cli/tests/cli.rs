use serde_json::Value;
use solvmat_core::arith::{fmt_q, parse_q, pow_q, q_int, PrimeSet};
use solvmat_core::group::{word_evaluate, GeneratorWord, TriangularMatrix};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn solvmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvmat"))
        .args(args)
        .env_remove("SOLVMAT_AUDIT_EVERY")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn matrix(v: &Value) -> TriangularMatrix {
    let rows = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            r.as_array()
                .unwrap()
                .iter()
                .map(|s| parse_q(s.as_str().unwrap()).unwrap())
                .collect()
        })
        .collect();
    TriangularMatrix::new(rows).unwrap()
}

#[test]
fn metrics_of_identity_are_zero() {
    let v = json_stdout(&solvmat(&[
        "metrics",
        data("identity3.json").to_str().unwrap(),
        "--bfs-radius",
        "2",
    ]));
    assert_eq!(v["length_estimate"], 0);
    assert_eq!(v["semidirect_estimate"], 0);
    assert_eq!(v["adelic_length"], 0.0);
    assert_eq!(v["word_length"], 0);
    assert_eq!(v["header"]["tool"], "solvmat");
    assert!(v["header"]["rng"].as_str().unwrap().contains("ChaCha20"));
    assert_eq!(v["header"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn metrics_of_diagonal_two() {
    let v = json_stdout(&solvmat(&[
        "metrics",
        data("diag2.json").to_str().unwrap(),
        "--bfs-radius",
        "3",
    ]));
    assert_eq!(v["length_estimate"], 1);
    assert_eq!(v["word_length"], 1);
    let adelic = v["adelic_length"].as_f64().unwrap();
    assert!((adelic - 2.0 * 2f64.ln()).abs() < 1e-9, "{adelic}");
}

#[test]
fn metrics_csv_has_header_comments() {
    let out = solvmat(&["metrics", data("diag2.json").to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# solvmat "));
    assert!(text.contains("\nfield,value\n"));
    assert!(text.contains("\nlength_estimate,1\n"));
}

#[test]
fn non_member_exits_3() {
    let out = solvmat(&["metrics", data("not_member.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("not a member"), "{}", stderr(&out));
    let out = solvmat(&["factorize", data("not_member.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_matrix_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "m.json",
        r#"{"n": 2, "primes": [2], "entries": [["1","x"],["0","1"]]}"#,
    );
    let out = solvmat(&["metrics", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("entries[0][1]"), "{}", stderr(&out));

    let p = write(dir.path(), "m2.json", r#"{"n": 2, "primes": [2]}"#);
    let out = solvmat(&["metrics", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("entries"), "{}", stderr(&out));
}

#[test]
fn factorize_identity_is_empty() {
    let v = json_stdout(&solvmat(&["factorize", data("identity3.json").to_str().unwrap()]));
    assert_eq!(v["length"], 0);
    assert_eq!(v["bound"], 0);
    assert!(v["tokens"].as_array().unwrap().is_empty());
}

#[test]
fn factorize_theta_re_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let out = solvmat(&[
        "factorize",
        data("theta3.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let v = json_stdout(&out);
    let len = v["length"].as_u64().unwrap();
    assert!(len <= v["bound"].as_u64().unwrap() && len <= 24);

    let file: Value = serde_json::from_slice(&std::fs::read(dir.path().join("word.json")).unwrap()).unwrap();
    assert_eq!(file["tokens"], v["tokens"]);
    assert!(file["header"]["version"].is_string());
    let tokens: Vec<String> = file["tokens"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap().to_string())
        .collect();
    let w = GeneratorWord::from_tokens(&tokens).unwrap();
    let f = word_evaluate(&w, 2, &PrimeSet::single(2).unwrap()).unwrap();
    assert_eq!(
        f.matrix(),
        &TriangularMatrix::theta(2, 0, 1, parse_q("3").unwrap()).unwrap()
    );
}

#[test]
fn invert_multiplies_back() {
    let original: Value = serde_json::from_slice(&std::fs::read(data("mixed.json")).unwrap()).unwrap();
    let v = json_stdout(&solvmat(&["invert", data("mixed.json").to_str().unwrap()]));
    assert_eq!(v["primes"], original["primes"]);
    assert!(matrix(&original).mul(&matrix(&v)).unwrap().is_identity());
}

#[test]
fn displacement_and_triviality_of_zero_drift() {
    let v = json_stdout(&solvmat(&["displacement", data("zero_drift.json").to_str().unwrap()]));
    assert_eq!(v["displacement"]["matrix"][0][1], "0");
    assert_eq!(v["displacement"]["non_zero"], false);
    let v = json_stdout(&solvmat(&[
        "check-triviality",
        data("zero_drift.json").to_str().unwrap(),
    ]));
    assert_eq!(v["triviality"]["verdict"], "Trivial");
    assert_eq!(v["triviality"]["zero_displacement"], true);
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn deterministic_walk_reaches_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = solvmat(&[
        "walk",
        data("doubling_walk.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let v = json_stdout(&out);
    assert_eq!(v["converged"], 1);

    let summary = read_json(&dir.path().join("summary.json"));
    let seed = &summary["seeds"][0];
    assert_eq!(seed["converged"], true);
    let entry = &seed["boundary"]["entries"][0];
    assert_eq!(entry["field"], "p-adic");
    assert_eq!(entry["representative"], "-1");
    assert_eq!(entry["value"]["unit_digits"], ((1u64 << 30) - 1).to_string());
    assert_eq!(summary["displacement"]["matrix"][0][1], "1");

    let traj = std::fs::read_to_string(dir.path().join("trajectory_seed1.jsonl")).unwrap();
    let lines: Vec<Value> = traj.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["header"]["seed"], 1);
    assert_eq!(lines[0]["header"]["config_sha256"], summary["header"]["config_sha256"]);
    let ms: Vec<u64> = lines[1..].iter().map(|l| l["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, vec![0, 10, 100, 300]);
    // exact entries only at audit steps; 300 is the final step
    assert!(lines[2].get("phi_exact").is_none());
    assert_eq!(lines[4]["phi_exact"][0][1], fmt_q(&(pow_q(2, 300) - q_int(1))));

    let csv = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert!(csv.starts_with("# solvmat "));
    assert!(csv.contains("seed,m,error_estimate\n1,0,0\n1,300,0\n"), "{csv}");
}

#[test]
fn zero_drift_walk_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("zero_drift_walk.json");
    let out = solvmat(&[
        "walk",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(json_stdout(&out)["triviality"], "Trivial");
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["triviality"]["verdict"], "Trivial");
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(summary["seeds"][0]["boundary"]["entries"][0]["field"], "undefined");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = data("n3_walk.json");
    for d in [&a, &b] {
        let out = solvmat(&["walk", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in [
        "summary.json",
        "errors.csv",
        "trajectory_seed1.jsonl",
        "trajectory_seed4.jsonl",
    ] {
        let (x, y) = (
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
        );
        assert!(x == y, "{name} differs between runs");
    }
    let summary = read_json(&a.path().join("summary.json"));
    assert_eq!(summary["displacement"]["homogeneous_sign"], "negative");
    assert!(summary["seeds"]
        .as_array()
        .unwrap()
        .iter()
        .all(|s| s["approximation"] == "corrected-n3"));
}

#[test]
fn seed_override_and_audit_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_solvmat"))
        .args([
            "walk",
            data("n3_walk.json").to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("SOLVMAT_AUDIT_EVERY", "1000")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["config"]["run"]["seeds"], serde_json::json!([9]));
    assert_eq!(summary["config"]["run"]["audit_every"], 1000);
    let traj = std::fs::read_to_string(dir.path().join("trajectory_seed9.jsonl")).unwrap();
    let exact: Vec<u64> = traj
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v.get("phi_exact").is_some())
        .map(|v| v["m"].as_u64().unwrap())
        .collect();
    assert_eq!(exact, vec![0, 1000, 2000]);

    let out = Command::new(env!("CARGO_BIN_EXE_solvmat"))
        .args([
            "walk",
            data("n3_walk.json").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("SOLVMAT_AUDIT_EVERY", "often")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("doubling.json"), dir.path().join("doubling.json")).unwrap();
    let cases = [
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1]}}"#,
            "run: missing field `checkpoints`",
        ),
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1, 1], "checkpoints": []}}"#,
            "run.seeds",
        ),
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1], "checkpoints": [5, 3]}}"#,
            "run.checkpoints",
        ),
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1], "checkpoints": [11]}}"#,
            "run.checkpoints",
        ),
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": {"n": 2, "p": 2, "support": [{"x": [1, 0], "f": [["1","1"],["0","1"]], "prob": "1/2"}]}, "run": {"steps": 10, "seeds": [1], "checkpoints": []}}"#,
            "measure.support",
        ),
        (
            r#"{"group": {"n": 3, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1], "checkpoints": []}}"#,
            "group.n",
        ),
        (
            r#"{"group": {"n": 2, "primes": [2]}, "measure": "doubling.json", "run": {"steps": 10, "seeds": [1], "checkpoints": [], "extra": 1}}"#,
            "run.extra: unknown field `extra`",
        ),
    ];
    for (k, (body, needle)) in cases.iter().enumerate() {
        let p = write(dir.path(), &format!("c{k}.json"), body);
        let out = solvmat(&[
            "walk",
            p.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "case {k}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "case {k}: {}", stderr(&out));
    }
}

#[test]
fn verify_runs_named_suite() {
    let out = solvmat(&["verify", "triviality"]);
    let v = json_stdout(&out);
    assert_eq!(v[0]["suite"], "triviality");
    assert_eq!(v[0]["passed"], true);
    assert!(stderr(&out).contains("[PASS]"));

    let out = solvmat(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}
