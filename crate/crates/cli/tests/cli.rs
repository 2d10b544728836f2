use std::process::{Command, Output};

use serde_json::Value;

fn su2ladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su2ladder"))
        .args(args)
        .env_remove("SU2LADDER_TOLERANCE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn verify_passes_with_exit_zero() {
    let o = su2ladder(&["verify", "--spin", "1", "--nmax", "3"]);
    let report = json(&o);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report["overall_pass"], true);
    assert_eq!(report["failed"], 0);
}

#[test]
fn exit_code_counts_failures() {
    let o = su2ladder(&["verify", "--spin", "1", "--nmax", "1"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed = report["failed"].as_i64().unwrap();
    assert!(failed > 0);
    assert_eq!(o.status.code(), Some(failed as i32));
}

#[test]
fn tolerance_from_environment() {
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_su2ladder"))
            .args(["verify", "--spin", "1", "--nmax", "3"])
            .env("SU2LADDER_TOLERANCE", tol)
            .output()
            .unwrap()
    };
    let loose = run("1e-3");
    let report: Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert_eq!(report["config"]["tolerance"], 1e-3);
    assert_eq!(run("not-a-number").status.code(), Some(255));
}

#[test]
fn bad_input_exits_255() {
    for args in [
        &["verify", "--spin", "0"][..],
        &["verify", "--override", "nonsense"],
        &["frobnicate"],
        &["spectrum", "--spin", "1", "--sector", "9,0"],
        &["dump-op", "--spin", "1", "--op", "tau:5"],
        &["kernel", "--spin", "1", "--format", "csv"],
    ] {
        let o = su2ladder(args);
        assert_eq!(o.status.code(), Some(255), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(su2ladder(&["--help"]).status.code(), Some(0));
}

#[test]
fn out_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let o = su2ladder(&["verify", "--spin", "1", "--nmax", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 failed"));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("check,anchor,"));
    assert!(lines.count() > 50);
}

#[test]
fn spectrum_table() {
    let o = su2ladder(&["spectrum", "--spin", "1", "--nmax", "2", "--sector", "2,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "sector,eigenvalue,j,multiplicity");
    // Two particles of spin 1 at weight 0: j = 0 and j = 2.
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",0,1") && rows[2].ends_with(",2,1"), "{rows:?}");
    let rows = json(&su2ladder(&["spectrum", "--spin", "1", "--nmax", "2", "--format", "json"]));
    assert!(rows.as_array().unwrap().len() > 3);
}

#[test]
fn basis_and_operator_dumps() {
    let basis = json(&su2ladder(&["basis", "--spin", "1", "--nmax", "1"]));
    assert_eq!(basis, serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]]));
    let sector = json(&su2ladder(&["basis", "--spin", "1", "--nmax", "2", "--sector", "2,0"]));
    assert_eq!(sector, serde_json::json!([[1, 0, 1], [0, 2, 0]]));
    let canonical = json(&su2ladder(&["basis", "--spin", "1", "--nmax", "2", "--canonical"]));
    assert!(canonical.is_object() || canonical.is_array());

    let jz = json(&su2ladder(&["dump-op", "--spin", "1", "--nmax", "1", "--op", "jz"]));
    assert_eq!(jz["dim"], 4);
    assert_eq!(jz["entries"], serde_json::json!([[0, 0, -1.0, 0.0], [2, 2, 1.0, 0.0]]));
    for op in ["jplus", "n", "jhat", "adag:-1", "p:1", "m:1", "tau:1", "tau-lower:-1"] {
        let v = json(&su2ladder(&["dump-op", "--spin", "1", "--nmax", "3", "--op", op]));
        assert!(!v["entries"].as_array().unwrap().is_empty(), "{op}");
    }
}

#[test]
fn kernel_and_ladders() {
    let k = json(&su2ladder(&["kernel", "--spin", "1", "--nmax", "3"]));
    assert!(k["claims"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    assert!(!k["lattice"]["nodes"].as_array().unwrap().is_empty());

    let l = json(&su2ladder(&["ladders", "--spin", "2"]));
    assert_eq!(l["spin"], 2);
    let thetas: Vec<i64> = l["sigmas"].as_array().unwrap().iter().map(|s| s["theta"].as_i64().unwrap()).collect();
    assert_eq!(thetas, vec![-2, -1, 0, 1, 2]);
    assert_eq!(l["right_functions"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_output_is_stable() {
    let a = su2ladder(&["verify", "--spin", "1", "--nmax", "3"]);
    let b = su2ladder(&["verify", "--spin", "1", "--nmax", "3", "--parallelism", "2"]);
    assert_eq!(a.stdout, b.stdout);
}
