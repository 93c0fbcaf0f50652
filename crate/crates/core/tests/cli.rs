use std::path::PathBuf;

use invmod::cli::{self, Outcome};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Outcome {
    let mut argv = vec!["invmod"];
    argv.extend_from_slice(args);
    cli::run(argv)
}

fn report(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}):\n{}", out.stdout))
}

fn validator() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator()
        .iter_errors(v)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("invmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn every_command_report_matches_schema() {
    let chi2 = data("chi_su2_2e1.json");
    let mu = data("mu_su2_eigen.json");
    let chi_su3 = data("chi_su3_product.json");
    let sl2r = data("sl2r.json");
    let so2 = data("so2_in_sl2r.json");
    let bad = data("not_jacobi.json");
    let chi1 = data("chi_su2_e1.json");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["validate", "--preset", "halfplane_split"], 0),
        (vec!["validate", "--algebra", &sl2r, "--isotropy", &so2], 0),
        (vec!["validate", "--algebra", &bad], 2),
        (
            vec!["complement", "--algebra", &sl2r, "--isotropy", &so2],
            0,
        ),
        (vec!["complement", "--preset", "aff1"], 3),
        (
            vec![
                "intertwiners",
                "--preset",
                "halfplane_split",
                "--k",
                "su2",
                "--chi",
                &chi2,
            ],
            0,
        ),
        (
            vec![
                "curvature",
                "--preset",
                "halfplane_split",
                "--k",
                "su2",
                "--chi",
                &chi2,
                "--mu",
                &mu,
            ],
            0,
        ),
        (
            vec![
                "type11",
                "--preset",
                "halfplane_split",
                "--k",
                "su2",
                "--mu",
                &mu,
            ],
            0,
        ),
        (
            vec![
                "holomorphic",
                "--preset",
                "product_halfplane_split",
                "--k",
                "su3",
                "--chi",
                &chi_su3,
            ],
            0,
        ),
        (
            vec![
                "moduli",
                "--preset",
                "halfplane_split",
                "--k",
                "su2",
                "--chi",
                &chi2,
                "--mu",
                &mu,
            ],
            0,
        ),
        (vec!["halfplane", "--k", "su2"], 0),
        (vec!["halfplane", "--k", "u1"], 0),
        (
            vec![
                "report-hypotheses",
                "--preset",
                "product_halfplane_split",
                "--k",
                "su2",
            ],
            0,
        ),
        (
            vec![
                "intertwiners",
                "--preset",
                "halfplane_split",
                "--k",
                "su2",
                "--chi",
                &chi1,
                "--seed",
                "9",
            ],
            0,
        ),
    ];
    for (args, code) in cases {
        let out = run(&args);
        assert_eq!(out.code, code, "{args:?}: stderr {}", out.stderr);
        let v = report(&out);
        assert_valid(&v);
        assert_eq!(v["command"], Value::String(args[0].into()));
    }
}

#[test]
fn u1_target_has_no_intertwiners() {
    let out = run(&[
        "intertwiners",
        "--preset",
        "halfplane_split",
        "--k",
        "u1",
        "--chi",
        &data("chi_zero_u1.json"),
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(report(&out)["results"]["dim_s"], 0);
}

#[test]
fn su2_eigenvalue_point_has_two_dim_space() {
    let out = run(&[
        "intertwiners",
        "--preset",
        "halfplane_split",
        "--k",
        "su2",
        "--chi",
        &data("chi_su2_2e1.json"),
    ]);
    assert_eq!(report(&out)["results"]["dim_s"], 2);
    let out = run(&[
        "intertwiners",
        "--preset",
        "halfplane_split",
        "--k",
        "su2",
        "--chi",
        &data("chi_su2_e1.json"),
    ]);
    assert_eq!(report(&out)["results"]["dim_s"], 0);
}

#[test]
fn halfplane_su2_has_two_strata() {
    let out = run(&["halfplane", "--k", "su2", "--format", "json"]);
    assert_eq!(out.code, 0);
    let v = report(&out);
    let strata = v["results"]["strata"].as_array().unwrap();
    assert_eq!(strata.len(), 2);
    assert_eq!(strata[0]["mu_complex_dim"], 0);
    assert_eq!(strata[1]["mu_complex_dim"], 1);
}

#[test]
fn aff1_complement_is_unsatisfiable_with_certificate() {
    let out = run(&["complement", "--preset", "aff1"]);
    assert_eq!(out.code, 3);
    let v = report(&out);
    assert_eq!(v["status"], "unsatisfiable");
    assert_eq!(v["results"]["found"], false);
    assert_eq!(v["results"]["certificate"]["verified"], true);
}

#[test]
fn seed_and_tolerance_are_echoed() {
    let out = run(&[
        "type11",
        "--preset",
        "halfplane_split",
        "--k",
        "su2",
        "--mu",
        &data("mu_su2_eigen.json"),
        "--seed",
        "42",
        "--tol",
        "1e-9",
    ]);
    let v = report(&out);
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["tol"].as_f64(), Some(1e-9));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).code, 1);
    assert_eq!(run(&["validate", "--no-such-flag"]).code, 1);
    assert_eq!(
        run(&["validate", "--format", "xml", "--preset", "aff1"]).code,
        1
    );
    assert_eq!(run(&[]).code, 1);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("holomorphic"));
}

#[test]
fn unknown_json_keys_are_validation_errors() {
    let path = scratch("extra_key.json", r#"{"matrix": [[0]], "color": "red"}"#);
    let out = run(&[
        "intertwiners",
        "--preset",
        "halfplane_split",
        "--k",
        "u1",
        "--chi",
        &path,
    ]);
    assert_eq!(out.code, 2);
    let v = report(&out);
    assert_valid(&v);
    assert_eq!(v["error"]["kind"], "Parse");
}

#[test]
fn chi_with_wrong_shape_is_rejected() {
    let out = run(&[
        "intertwiners",
        "--preset",
        "halfplane_split",
        "--k",
        "su2",
        "--chi",
        &data("chi_su2_product.json"),
    ]);
    assert_eq!(out.code, 2);
    let v = report(&out);
    assert_valid(&v);
    assert_eq!(v["error"]["kind"], "ShapeMismatch");
}

#[test]
fn non_homomorphism_chi_is_rejected() {
    // the product isotropy is abelian but [e1, e2] = e3 in su2
    let path = scratch("chi_e1_e2.json", r#"{"matrix": [[1, 0], [0, 1], [0, 0]]}"#);
    let out = run(&[
        "intertwiners",
        "--preset",
        "product_halfplane_split",
        "--k",
        "su2",
        "--chi",
        &path,
    ]);
    assert_eq!(out.code, 2);
    let v = report(&out);
    assert_valid(&v);
    assert_eq!(v["error"]["kind"], "NotAHomomorphism");
}

#[test]
fn unknown_preset_is_a_validation_error() {
    let out = run(&["validate", "--preset", "no_such_preset"]);
    assert_eq!(out.code, 2);
    let v = report(&out);
    assert_valid(&v);
    assert_eq!(v["error"]["kind"], "UnknownPreset");
}

#[test]
fn table_format_lists_paths() {
    let out = run(&["halfplane", "--k", "u1", "--format", "table"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().any(|l| l.starts_with("results.target")));
    assert!(out
        .stdout
        .lines()
        .any(|l| l.starts_with("status") && l.ends_with("\"ok\"")));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let chi = data("chi_su2_product.json");
    let args = [
        "holomorphic",
        "--preset",
        "product_halfplane_split",
        "--k",
        "su2",
        "--chi",
        &chi,
        "--seed",
        "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exported_preset_split_validates_like_the_preset() {
    let split = invmod::io::SplitJson::from_split(&invmod::presets::halfplane_split());
    let path = scratch("split.json", &serde_json::to_string(&split).unwrap());
    let from_file = report(&run(&["validate", "--split", &path]));
    let from_preset = report(&run(&["validate", "--preset", "halfplane_split"]));
    assert_eq!(from_file["status"], "ok");
    assert_eq!(
        from_file["results"]["split"],
        from_preset["results"]["split"]
    );
    assert_eq!(
        from_file["results"]["algebra"],
        from_preset["results"]["algebra"]
    );
}
