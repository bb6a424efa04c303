use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

fn nmlkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmlkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("NMLKIT_LIMITS")
        .output()
        .expect("binary runs")
}

fn schema(name: &str) -> JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{name}.schema.json"));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft202012)
        .compile(&doc)
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn check(name: &str, v: &Value) {
    for s in ["report", name] {
        if let Err(errors) = schema(s).validate(v) {
            let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
            panic!("{s} schema rejects output:\n{}\n{v}", msgs.join("\n"));
        }
    }
}

/// Runs with `--json`, checks the exit code and both schemas.
fn json(dir: &Path, schema_name: &str, args: &[&str], code: i32) -> Value {
    let mut full = args.to_vec();
    full.push("--json");
    let out = nmlkit(dir, &full);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    check(schema_name, &v);
    v
}

fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    let files = [
        ("ex1.dt", "d: T ; p ; q\n"),
        ("none.dt", "d: T ; p ; !p\n"),
        ("lp.ae", "L p -> p\n"),
        ("nlp.ae", "!L p -> p\n"),
        ("sat.fs", "p | q\n!p\n"),
        ("unsat.fs", "p & !p\n"),
        ("i.imp", "p: p\np: p -> q\nc: q\nc: r\n"),
    ];
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

#[test]
fn dl_solve_example() {
    let dir = workspace();
    let v = json(dir.path(), "dl-solve", &["dl", "solve", "ex1.dt"], 0);
    assert_eq!(v["exists"], true);
    assert_eq!(v["witnesses"], serde_json::json!([[1]]));
    let text = serde_json::to_string(&v).unwrap();
    assert!(text.starts_with(r#"{"exists":true,"witnesses":[[1]]"#), "{text}");
    for method in ["enum", "mso"] {
        let v = json(
            dir.path(),
            "dl-solve",
            &["dl", "solve", "none.dt", "--method", method],
            0,
        );
        assert_eq!(v["exists"], false, "{method}");
    }
}

#[test]
fn ael_solve_fixtures() {
    let dir = workspace();
    let v = json(dir.path(), "ael-solve", &["ael", "solve", "lp.ae"], 0);
    assert_eq!(v["full_sets"].as_array().unwrap().len(), 2);
    let v = json(
        dir.path(),
        "ael-solve",
        &["ael", "solve", "nlp.ae", "--oracle", "brute"],
        0,
    );
    assert_eq!(v["exists"], false);
    let v = json(
        dir.path(),
        "ael-solve",
        &["ael", "solve", "lp.ae", "--method", "mso"],
        0,
    );
    assert_eq!(v["exists"], true);
}

#[test]
fn verdicts_do_not_ride_the_exit_code() {
    let dir = workspace();
    for method in ["brute", "dp"] {
        let v = json(
            dir.path(),
            "fmt-check-sat",
            &["fmt", "check-sat", "unsat.fs", "--method", method],
            0,
        );
        assert_eq!(v["satisfiable"], false);
        let v = json(
            dir.path(),
            "fmt-check-sat",
            &["fmt", "check-sat", "sat.fs", "--method", method],
            0,
        );
        assert_eq!(v["satisfiable"], true);
        let v = json(
            dir.path(),
            "fmt-check-imp",
            &["fmt", "check-imp", "i.imp", "--method", method],
            0,
        );
        assert_eq!(v["implies"], false);
        assert_eq!(v["failing"], serde_json::json!([2]));
    }
}

#[test]
fn pseudo_clique_width() {
    let dir = workspace();
    let out = nmlkit(
        dir.path(),
        &[
            "gen",
            "pseudo-clique",
            "-n",
            "5",
            "-k",
            "2",
            "--labels",
            "-o",
            "pc5_2.gr",
        ],
    );
    assert!(out.status.success());
    let v = json(dir.path(), "tw-compute", &["tw", "compute", "pc5_2.gr", "--exact"], 0);
    assert_eq!(v["width"], 4);
    assert_eq!(v["valid"], true);

    assert!(nmlkit(dir.path(), &["tw", "compute", "pc5_2.gr", "-o", "pc.td"])
        .status
        .success());
    let v = json(dir.path(), "tw-verify", &["tw", "verify", "pc5_2.gr", "pc.td"], 0);
    assert_eq!(v["valid"], true);
    let v = json(dir.path(), "tw-normalize", &["tw", "normalize", "pc5_2.gr", "pc.td"], 0);
    assert_eq!(v["valid"], true);
    assert!(v["width_after"].as_u64() <= v["width_before"].as_u64());
    assert!(v["edge_node_max_bags"].as_u64().unwrap() <= 2);
    let v = json(dir.path(), "tw-lower-bound", &["tw", "lower-bound", "pc5_2.gr"], 0);
    assert_eq!(v["lower_bound"], 4);
    assert_eq!(v["certified"], true);
}

#[test]
fn broken_decomposition_is_reported() {
    let dir = workspace();
    fs::write(dir.path().join("tri.gr"), "p tw 3 3\n1 2\n2 3\n1 3\n").unwrap();
    fs::write(dir.path().join("bad.td"), "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n").unwrap();
    let v = json(dir.path(), "tw-verify", &["tw", "verify", "tri.gr", "bad.td"], 0);
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn every_subcommand_validates() {
    let dir = workspace();
    let d = dir.path();
    json(d, "struct-build", &["struct", "build", "ex1.dt", "--kind", "dl"], 0);
    json(d, "struct-build", &["struct", "build", "i.imp", "--kind", "imp"], 0);
    json(
        d,
        "mso-eval",
        &["mso", "eval", "sat.fs", "--kind", "prop", "--paper", "sat", "--show"],
        0,
    );
    let v = json(
        d,
        "mso-eval",
        &[
            "mso",
            "eval",
            "sat.fs",
            "--kind",
            "prop",
            "--formula",
            "E M. A x. x in M",
        ],
        0,
    );
    assert_eq!(v["holds"], true);
    for args in [
        vec!["gen", "pseudo-clique", "-n", "4", "-k", "1"],
        vec!["gen", "dl-lower", "-n", "3", "--variant", "symmetric"],
        vec!["gen", "ael-lower", "-k", "4"],
        vec!["gen", "imp-lower", "--kind", "cnf_dnf", "-n", "4"],
    ] {
        json(d, "gen", &args, 0);
    }
    let v = json(
        d,
        "bench",
        &["bench", "--family", "pseudo-clique", "--params", "3..6"],
        0,
    );
    for row in v["rows"].as_array().unwrap() {
        if row["method"] == "exact" {
            assert_eq!(row["width"].as_u64().unwrap() + 1, row["param"].as_u64().unwrap());
        }
    }
}

#[test]
fn bench_records_limits_and_continues() {
    let dir = workspace();
    let v = json(
        dir.path(),
        "bench",
        &["bench", "--family", "chain", "--params", "26,30"],
        0,
    );
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        match row["method"].as_str().unwrap() {
            "dp_sat" => assert_eq!(row["verdict"], "sat"),
            _ => {
                assert!(row["verdict"].as_str().unwrap().starts_with("limit:"));
                assert_eq!(row["limits_hit"].as_array().unwrap().len(), 1);
            }
        }
    }
    let out = nmlkit(
        dir.path(),
        &["bench", "--family", "chain", "--params", "10", "--csv", "out.csv"],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(
        csv.starts_with("family,param,n_vertices,width,method,wall_ms,verdict\n"),
        "{csv}"
    );
}

#[test]
fn exit_codes() {
    let dir = workspace();
    assert_eq!(nmlkit(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(
        nmlkit(dir.path(), &["dl", "solve", "missing.dt"]).status.code(),
        Some(2)
    );
    fs::write(dir.path().join("broken.fs"), "p &\n").unwrap();
    json(dir.path(), "error", &["fmt", "check-sat", "broken.fs"], 2);

    let out = Command::new(env!("CARGO_BIN_EXE_nmlkit"))
        .args(["fmt", "check-sat", "sat.fs", "--json"])
        .current_dir(dir.path())
        .env("NMLKIT_LIMITS", "atoms=1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    check("error", &v);
    assert_eq!(v["limits"]["atoms"], 1);
    assert_eq!(v["limits_hit"].as_array().unwrap().len(), 1);
}

#[test]
fn reports_reproduce() {
    let dir = workspace();
    let a = json(
        dir.path(),
        "dl-solve",
        &["dl", "solve", "ex1.dt", "--oracle", "brute"],
        0,
    );
    assert_eq!(a["command"], "nmlkit dl solve ex1.dt --oracle brute --json");
    let b = json(
        dir.path(),
        "dl-solve",
        &["dl", "solve", "ex1.dt", "--oracle", "brute"],
        0,
    );
    assert_eq!(a["fingerprint"], b["fingerprint"]);
    assert_eq!(a["witnesses"], b["witnesses"]);
    let c = json(
        dir.path(),
        "dl-solve",
        &["dl", "solve", "none.dt", "--oracle", "brute"],
        0,
    );
    assert_ne!(a["fingerprint"], c["fingerprint"]);
}

#[test]
fn verify_paper_quick() {
    let dir = workspace();
    let v = json(dir.path(), "verify-paper", &["verify-paper", "--quick"], 0);
    let checks = v["checks"].as_array().unwrap();
    let failed: Vec<u64> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    // Only the exactly-one-bag clause of the normalisation criterion fails.
    assert_eq!(failed, vec![2]);
    assert!(checks.len() > 9);
}

#[test]
fn schemas_reject_malformed_reports() {
    let good = serde_json::json!({
        "exists": true, "witnesses": [[1]], "method": "enum", "oracle": "twdp",
        "command": "nmlkit dl solve x.dt --json",
        "fingerprint": format!("sha256:{}", "0".repeat(64)),
        "timings_ms": {"solve": 0.1},
        "limits": {"atoms": 24, "exact_tw": 24, "dp_width": 14, "dl_rules": 20, "ae_beliefs": 20,
                   "mso_single": 22, "mso_nested": 16, "mso_steps": 400000000u64, "pseudo_lb": 64},
        "limits_hit": []
    });
    assert!(schema("report").is_valid(&good) && schema("dl-solve").is_valid(&good));
    let mut zero_based = good.clone();
    zero_based["witnesses"] = serde_json::json!([[0]]);
    assert!(!schema("dl-solve").is_valid(&zero_based));
    let mut no_witnesses = good.clone();
    no_witnesses.as_object_mut().unwrap().remove("witnesses");
    assert!(!schema("dl-solve").is_valid(&no_witnesses));
    let mut bad_hash = good;
    bad_hash["fingerprint"] = "md5:abc".into();
    assert!(!schema("report").is_valid(&bad_hash));
}
