use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfree"))
        .args(args)
        .env_remove("BFREE_TOL")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn write(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(doc).unwrap()).unwrap();
    p
}

fn c(re: f64) -> Value {
    json!([re, 0.0])
}

fn raw_pair(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> Value {
    let m = |x: [[f64; 2]; 2]| json!([[c(x[0][0]), c(x[0][1])], [c(x[1][0]), c(x[1][1])]]);
    json!({
        "schema_version": 1,
        "kind": "raw_pair",
        "matrices": {"a": m(a), "b": m(b)},
        "basis_order": "e_0, e_1"
    })
}

fn plus_state() -> Value {
    json!({
        "schema_version": 1,
        "kind": "density_matrix",
        "data": [[c(0.5), c(0.5)], [c(0.5), c(0.5)]]
    })
}

#[test]
fn catalog_list_has_five_models() {
    let o = bfree(&["catalog", "list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        ["example1", "example2", "qubit_dephasing", "weyl_qudit", "phase_damping"]
    );
}

#[test]
fn catalog_show_and_unknown_name() {
    let o = bfree(&["catalog", "show", "phase_damping"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("L_D rho"));
    assert!(text.contains("decoherence free"));

    let o = bfree(&["catalog", "show", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    let o = bfree(&["catalog", "export", "nope", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!p.exists());
}

#[test]
fn exported_files_validate_and_round_trip_through_subspace() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example1", "qubit_dephasing", "weyl_qudit"] {
        let p = dir.path().join(format!("{name}.json"));
        let o = bfree(&["catalog", "export", name, p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let file: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_valid("model_file.schema.json", &file);

        let from_file = stdout_json(&bfree(&["subspace", "--model", p.to_str().unwrap()]));
        let from_catalog = stdout_json(&bfree(&["subspace", "--model", &format!("catalog:{name}")]));
        for key in ["m_dim", "chain_dims", "cutoffs", "frame", "sectors", "df_witness", "shemesh_nontrivial"] {
            assert_eq!(from_file[key], from_catalog[key], "{name}: {key}");
        }
    }
}

#[test]
fn subspace_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = bfree(&["subspace", "--model", "catalog:example2", "--sector-n", "2", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty() && o.stderr.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn qubit_dephasing_subspace_is_diagonal() {
    let o = bfree(&["subspace", "--model", "catalog:qubit_dephasing"]);
    assert_eq!(code(&o), 0);
    assert!(o.stderr.is_empty());
    let r = stdout_json(&o);
    assert_valid("subspace_report.schema.json", &r);
    assert!(r["m_dim"].as_u64().unwrap() >= 2);
    // column-stacked 2x2: entries 1 and 2 are the coherences
    for row in [1, 2] {
        for col in r["frame"][row].as_array().unwrap() {
            let z = col.as_array().unwrap();
            assert!(z[0].as_f64().unwrap().abs() < 1e-12 && z[1].as_f64().unwrap().abs() < 1e-12);
        }
    }
    assert!(r["df_witness"].is_object());
}

#[test]
fn gksl_reports_validate() {
    for name in ["weyl_qudit", "phase_damping"] {
        let r = stdout_json(&bfree(&["subspace", "--model", &format!("catalog:{name}")]));
        assert_valid("subspace_report.schema.json", &r);
        assert!(r["df_witness"].is_object(), "{name}");
    }
}

#[test]
fn raw_pair_with_zero_b_is_entirely_free() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "pair.json", &raw_pair([[0.3, 1.0], [-2.0, 0.1]], [[0.0; 2]; 2]));
    let r = stdout_json(&bfree(&["subspace", "--model", p.to_str().unwrap()]));
    assert_valid("subspace_report.schema.json", &r);
    assert_eq!(r["m_dim"], 2);
    assert_eq!(r["ambient_dim"], 2);
}

#[test]
fn example2_single_excitation_sectors() {
    let o = bfree(&["subspace", "--model", "catalog:example2", "--sector-n", "1"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_valid("subspace_report.schema.json", &r);
    let mut alphas: Vec<f64> = r["sectors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["alpha"].as_f64().unwrap())
        .collect();
    alphas.sort_by(f64::total_cmp);
    let want = [-5.0, 0.0, 5.0];
    assert_eq!(alphas.len(), 3);
    for (a, w) in alphas.iter().zip(want) {
        assert!((a - w).abs() < 1e-10, "{alphas:?}");
    }

    let o = bfree(&["subspace", "--model", "catalog:example1", "--sector-n", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn shemesh_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let zx = write(dir.path(), "zx.json", &raw_pair([[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [1.0, 0.0]]));
    let o = bfree(&["shemesh", "--model", zx.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_valid("shemesh_report.schema.json", &r);
    assert_eq!(r["nontrivial"], false);
    assert!(r["witness"].is_null());

    let dd = write(dir.path(), "dd.json", &raw_pair([[1.0, 0.0], [0.0, 2.0]], [[3.0, 0.0], [0.0, 5.0]]));
    let r = stdout_json(&bfree(&["shemesh", "--model", dd.to_str().unwrap()]));
    assert_eq!(r["nontrivial"], true);
    assert!(r["witness_residual"].as_f64().unwrap() < 1e-12);
    let w = r["witness"].as_array().unwrap();
    let mag: Vec<f64> = w.iter().map(|z| z[0].as_f64().unwrap().hypot(z[1].as_f64().unwrap())).collect();
    assert!(mag.iter().any(|&m| (m - 1.0).abs() < 1e-12));

    let r = stdout_json(&bfree(&["shemesh", "--model", "catalog:example1"]));
    assert_valid("shemesh_report.schema.json", &r);
    assert_eq!(r["nontrivial"], true);

    let o = bfree(&["shemesh", "--model", "catalog:qubit_dephasing"]);
    assert_eq!(code(&o), 2);
    let o = bfree(&["shemesh", "--model", zx.to_str().unwrap(), "--max-power", "5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_dephasing_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mixed.json");
    let o = bfree(&[
        "verify", "--model", "catalog:qubit_dephasing", "--state", "builtin:maximally_mixed",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_valid("verify_report.schema.json", &r);
    assert!(r["max_deviation"].as_f64().unwrap() <= 1e-8);
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,deviation,E1,E2"));
    assert_eq!(lines.count(), 101);

    let plus = write(dir.path(), "plus.json", &plus_state());
    let state: Value = serde_json::from_str(&std::fs::read_to_string(&plus).unwrap()).unwrap();
    assert_valid("state_file.schema.json", &state);
    let out = dir.path().join("plus_report.json");
    let o = bfree(&[
        "verify", "--model", "catalog:qubit_dephasing", "--state", plus.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["verdict"], false);
    let ts = r["t_grid"].as_array().unwrap();
    let devs = r["deviation"].as_array().unwrap();
    for (t, d) in ts.iter().zip(devs) {
        let (t, d) = (t.as_f64().unwrap(), d.as_f64().unwrap());
        assert!((d - (1.0 - (-2.0 * t).exp())).abs() < 1e-6, "t = {t}: {d}");
    }
}

#[test]
fn verify_single_point_grid_passes_trivially() {
    let o = bfree(&[
        "verify", "--model", "catalog:qubit_dephasing", "--state", "builtin:df",
        "--t-max", "0", "--t-steps", "1",
    ]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["deviation"], json!([0.0]));
    assert_eq!(r["t_grid"], json!([0.0]));
}

#[test]
fn verify_closed_model_reports_energies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e1.json");
    let o = bfree(&[
        "verify", "--model", "catalog:example1", "--state", "builtin:df", "--t-steps", "21",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_valid("verify_report.schema.json", &r);
    let e2: Vec<f64> = r["energy2"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(e2.iter().all(|e| (e - e2[0]).abs() < 1e-10));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 4 && !l.ends_with(',')));
}

#[test]
fn verify_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let plus = write(dir.path(), "plus.json", &plus_state());
    // density matrix on a closed model
    let o = bfree(&["verify", "--model", "catalog:example1", "--state", plus.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    // dimension mismatch
    let o = bfree(&["verify", "--model", "catalog:weyl_qudit", "--state", plus.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    // missing and malformed files
    let o = bfree(&["verify", "--model", "catalog:weyl_qudit", "--state", "/nonexistent/s.json"]);
    assert_eq!(code(&o), 2);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    let o = bfree(&["subspace", "--model", junk.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = bfree(&["verify", "--model", "catalog:weyl_qudit", "--state", "builtin:nothing"]);
    assert_eq!(code(&o), 2);
    let not_state = write(
        dir.path(),
        "neg.json",
        &json!({"schema_version": 1, "kind": "density_matrix", "data": [[c(1.5), c(0.0)], [c(0.0), c(-0.5)]]}),
    );
    let o = bfree(&["verify", "--model", "catalog:qubit_dephasing", "--state", not_state.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn overflowing_propagation_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "big.json", &raw_pair([[1e3, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]]));
    let s = write(
        dir.path(),
        "v.json",
        &json!({"schema_version": 1, "kind": "state_vector", "data": [c(1.0), c(0.0)]}),
    );
    let o = bfree(&["verify", "--model", p.to_str().unwrap(), "--state", s.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
}

#[test]
fn tolerance_env_var_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_bfree"))
        .args(["subspace", "--model", "catalog:qubit_dephasing"])
        .env("BFREE_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["tolerance"], "1e-9");
    assert!(r["cutoffs"].as_array().unwrap().iter().all(|c| c.as_f64() == Some(1e-9)));
}
