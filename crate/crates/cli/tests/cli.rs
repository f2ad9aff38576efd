//! End-to-end tests of the `sphermoments` binary: schemas, golden files,
//! exit codes and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const PEANUT_DIAG31: &str = r#"{"kind":"peanut","n":2,"A":[[3,0],[0,1]]}"#;
const PEANUT_I3: &str = r#"{"kind":"peanut","n":3,"A":[[1,0,0],[0,1,0],[0,0,1]]}"#;
const VMF3: &str = r#"{"kind":"vmf","n":3,"u":[0,0,1],"k":2}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sphermoments"));
    cmd.env_remove("SPHERMOMENTS_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap_or_else(|e| panic!("invalid JSON ({e}): {}", stdout(out)))
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn golden_outputs() {
    let cases: [(&[&str], &str); 4] = [
        (&["anisotropy", "--dist-json", PEANUT_DIAG31], "anisotropy_peanut_diag31.json"),
        (&["moments", "--dist-json", PEANUT_I3], "moments_peanut_identity.json"),
        (
            &["sweep", "--dist-json", r#"{"kind":"bimodal_vmf","n":2,"u":[1,0],"k":1}"#, "--param", "k", "--grid", "0,0.5,2,8"],
            "sweep_bimodal_k.csv",
        ),
        (&["moments", "--dist-json", r#"{"kind":"vmf","n":2,"u":[1,0],"k":-1}"#], "error_negative_k.json"),
    ];
    for (args, file) in cases {
        assert_eq!(stdout(&run(args)), golden(file), "{file}");
    }
}

#[test]
fn identity_peanut_covariance() {
    let v = json(&run(&["moments", "--dist-json", PEANUT_I3]));
    assert_eq!(v["schema"], "1");
    let cov = &v["closed_form"]["covariance"];
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 / 3.0 } else { 0.0 };
            assert!((f(&cov[i][j]) - expected).abs() < 1e-15);
        }
    }
}

#[test]
fn quadrature_oracle_agrees() {
    let out = run(&["moments", "--dist-json", VMF3, "--oracle", "quad"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(f(&v["max_abs_dev"]) < 1e-9);
    let prov = &v["oracle"]["provenance"];
    assert_eq!(prov["method"], "quadrature");
    assert_eq!(prov["resolution"], 256);
    assert_eq!(prov["converged"], true);
}

#[test]
fn odf_has_oracle_only() {
    let odf = r#"{"kind":"odf","n":3,"A":[[2,0,0],[0,1,0],[0,0,1]]}"#;
    let v = json(&run(&["moments", "--dist-json", odf, "--oracle", "mc", "--samples", "20000", "--seed", "3"]));
    assert!(v["closed_form"].is_null());
    let prov = &v["oracle"]["provenance"];
    assert_eq!(prov["method"], "monte_carlo");
    assert_eq!(prov["samples"], 20000);
    assert_eq!(prov["seed"], 3);
    assert!(prov["generator"].as_str().unwrap().contains("ChaCha8"));
    assert!(v["oracle"]["stderr"]["mean"].is_array());
    assert_eq!(run(&["moments", "--dist-json", odf]).status.code(), Some(2));
}

#[test]
fn anisotropy_examples() {
    let v = json(&run(&["anisotropy", "--dist-json", PEANUT_DIAG31]));
    assert!((f(&v["fa"]) - 0.342_997_170_285_017_7).abs() < 1e-15);
    assert!((f(&v["ratio"]) - 5.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["bounds"]["r_max"], 3);
    assert_eq!(v["bound_flags"]["peanut"], true);

    let v = json(&run(&["anisotropy", "--dist-json", r#"{"kind":"bimodal_vmf","n":3,"u":[1,0,0],"k":0}"#]));
    assert_eq!(f(&v["fa"]), 0.0);
    assert_eq!(f(&v["ratio"]), 1.0);

    let v = json(&run(&["anisotropy", "--dist-json", r#"{"kind":"bimodal_vmf","n":3,"u":[1,0,0],"k":500}"#]));
    assert!(v["ratio"] == "inf" || f(&v["ratio"]) > 400.0);

    let v = json(&run(&["anisotropy", "--dist-json", r#"{"kind":"vmf","n":5,"u":[1,0,0,0,0],"k":3}"#]));
    assert!(v["fa"].is_null());
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 5);

    let v = json(&run(&["anisotropy", "--dist-json", PEANUT_DIAG31, "--s", "2", "--mu", "4"]));
    assert!((f(&v["eigenvalues"][0]) - 0.625).abs() < 1e-15);
}

#[test]
fn bound_constants_use_twelve_digits() {
    let text = stdout(&run(&["anisotropy", "--dist-json", PEANUT_DIAG31]));
    assert!(text.contains(r#""bounds":{"fa2_max":0.632455532034,"fa3_max":0.603022689156,"r_max":3}"#));
}

#[test]
fn numbers_round_trip() {
    let text = stdout(&run(&["moments", "--dist-json", VMF3]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let u = sphermoments_core::UnitVector::basis(3, 2);
    let exact = sphermoments_core::moments::vmf_second_moment(2.0, &u).unwrap();
    let emitted = &v["closed_form"]["second_moment"];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(f(&emitted[i][j]).to_bits(), exact[(i, j)].to_bits());
        }
    }
    assert!((f(&v["closed_form"]["mean"][2]) - 0.537_314_720_727_548).abs() < 1e-15);
}

#[test]
fn sweep_limits() {
    let out = run(&[
        "sweep",
        "--dist-json",
        r#"{"kind":"bimodal_vmf","n":3,"u":[0,0,1],"k":1}"#,
        "--param",
        "k",
        "--grid",
        "log:1e-3:1e3:40",
        "--format",
        "json",
    ]);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 40);
    let fa: Vec<f64> = rows.iter().map(|r| f(&r["fa"])).collect();
    assert!(fa[0] < 0.01 && fa[39] > 0.99);
    assert!(fa.windows(2).all(|w| w[1] >= w[0]));

    let out = run(&[
        "sweep",
        "--dist-json",
        r#"{"kind":"peanut","n":2,"A":[[1,0],[0,1]]}"#,
        "--param",
        "eigen_ratio",
        "--grid",
        "log:1:1e6:25",
        "--outputs",
        "fa",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "parameter,value,fa,ratio,mean_norm,lambda_1,lambda_2");
    let fa: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    let bound = 2.0 / 10f64.sqrt();
    assert!(fa.windows(2).all(|w| w[1] >= w[0]));
    assert!(fa.iter().all(|&x| x < bound));
    assert!(bound - fa[24] < 1e-4);
}

#[test]
fn single_point_sweep_matches_anisotropy() {
    let v = json(&run(&[
        "sweep",
        "--dist-json",
        r#"{"kind":"peanut","n":2,"A":[[1,0],[0,1]]}"#,
        "--param",
        "eigen_ratio",
        "--grid",
        "3",
        "--format",
        "json",
    ]));
    let row = &v["rows"][0];
    let single = json(&run(&["anisotropy", "--dist-json", PEANUT_DIAG31]));
    assert_eq!(row["fa"], single["fa"]);
    assert_eq!(row["ratio"], single["ratio"]);
    assert_eq!(row["eigenvalues"], single["eigenvalues"]);
}

#[test]
fn sweep_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--dist-json",
        VMF3,
        "--param",
        "k",
        "--grid",
        "1,2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("parameter,value,fa,ratio,mean_norm,lambda_1,lambda_2,lambda_3\n"));
}

#[test]
fn dist_file_and_inline_share_a_parser() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, PEANUT_DIAG31).unwrap();
    let from_file = run(&["anisotropy", "--dist", &format!("@{}", path.display())]);
    let inline = run(&["anisotropy", "--dist-json", PEANUT_DIAG31]);
    assert_eq!(from_file.stdout, inline.stdout);

    std::fs::write(&path, r#"{"kind":"peanut","n":2,"A":[[3,0],[0,1]],"bogus":1}"#).unwrap();
    let out = run(&["anisotropy", "--dist", &format!("@{}", path.display())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"]["message"].as_str().unwrap().contains("bogus"));
}

#[test]
fn exit_codes() {
    // 0: success
    assert_eq!(run(&["moments", "--dist-json", VMF3]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // 2: input errors
    let input_errors: [&[&str]; 9] = [
        &["moments", "--dist-json", "not json"],
        &["moments", "--dist-json", r#"{"kind":"vmf","n":2,"u":[1,0],"k":-1}"#],
        &["moments", "--dist-json", r#"{"kind":"peanut","n":2,"A":[[2,0],[0,-1]]}"#],
        &["moments", "--dist-json", r#"{"kind":"vmf","n":3,"u":[1,0],"k":1}"#],
        &["moments", "--dist-json", VMF3, "--oracle", "mc", "--samples", "10"],
        &["moments", "--dist-json", r#"{"kind":"vmf","n":4,"u":[1,0,0,0],"k":1}"#, "--oracle", "quad"],
        &["anisotropy", "--dist-json", r#"{"kind":"odf","n":3,"A":[[1,0,0],[0,1,0],[0,0,1]]}"#],
        &["sweep", "--dist-json", VMF3, "--param", "k", "--grid", "2,1"],
        &["moments"],
    ];
    for args in input_errors {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let v = json(&out);
        assert_eq!(v["schema"], "1");
        assert_eq!(v["error"]["code"], 2);
    }
    let out = run(&["moments", "--dist-json", r#"{"kind":"peanut","n":2,"A":[[2,0],[0,-1]]}"#]);
    assert_eq!(json(&out)["error"]["violations"][0], "A not positive definite");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["moments", "--bogus-flag"]).status.code(), Some(2));
    // 3: I/O errors
    let out = run(&["moments", "--dist", "@/nonexistent/dist.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["kind"], "io");
    let out = run(&["sweep", "--dist-json", VMF3, "--param", "k", "--grid", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(3));
    // 1 is produced only by failing suites or violated bounds; see the
    // unit tests of the exit-code mapping in the commands module.
}

#[test]
fn seed_from_environment() {
    let args = ["moments", "--dist-json", VMF3, "--oracle", "mc", "--samples", "20000"];
    let env = bin().args(args).env("SPHERMOMENTS_SEED", "77").output().unwrap();
    let flag = run(&[&args[..], &["--seed", "77"]].concat());
    assert_eq!(env.stdout, flag.stdout);
    assert_eq!(json(&env)["oracle"]["provenance"]["seed"], 77);
    let other = run(&[&args[..], &["--seed", "78"]].concat());
    assert_ne!(env.stdout, other.stdout);
    let default = run(&args);
    assert_eq!(json(&default)["oracle"]["provenance"]["seed"], sphermoments_cli::DEFAULT_SEED);
}

#[test]
fn byte_identical_reruns() {
    let args = ["moments", "--dist-json", r#"{"kind":"peanut","n":5,"A":[[2,0,0,0,0],[0,1,0,0,0],[0,0,1,0,0],[0,0,0,1,0],[0,0,0,0,3]]}"#, "--oracle", "mc", "--seed", "4"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn validate_smoke_is_fast_and_deterministic() {
    let start = std::time::Instant::now();
    let a = run(&["validate", "--level", "smoke", "--seed", "12"]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["validate", "--level", "smoke", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], "1");
    let names: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["normalization", "oracle_equivalence", "bessel_identities", "anisotropy_bounds"]);
    for s in v["suites"].as_array().unwrap() {
        assert!(s["max_deviation"].is_number());
    }
}

#[test]
fn bench_csv() {
    let out = run(&["bench", "--n", "3", "--k-grid", "1,10", "--repeats", "1", "--resolution", "64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), sphermoments_cli::bench::CSV_HEADER);
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[2], "quad");
        assert!(r[8].parse::<f64>().unwrap() > 1.0);
        assert!(r[9].parse::<f64>().unwrap() < 1e-9);
    }

    let out = run(&["bench", "--n", "6", "--k-grid", "2", "--repeats", "1", "--samples", "20000"]);
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "mc");
    assert_eq!(row[4], "20000");
    assert!(row[8].parse::<f64>().unwrap().is_finite());
}

#[test]
fn help_documents_csv_columns() {
    let sweep = stdout(&run(&["sweep", "--help"]));
    assert!(sweep.contains("parameter,value,fa,ratio,mean_norm,lambda_1,...,lambda_n"));
    let bench = stdout(&run(&["bench", "--help"]));
    assert!(bench.contains(sphermoments_cli::bench::CSV_HEADER));
    let top = stdout(&run(&["--help"]));
    for cmd in ["moments", "anisotropy", "sweep", "validate", "bench"] {
        assert!(top.contains(cmd));
    }
}
