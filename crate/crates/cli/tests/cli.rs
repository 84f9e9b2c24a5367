use std::path::{Path, PathBuf};
use std::process::Command;

use nclaurent::freealg::{parse_element, ElementDoc};
use nclaurent::FreeAlgebra;
use nclaurent_cli::{run, Output, EXIT_BUDGET, EXIT_NOT_LAURENT, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    let argv = std::iter::once("nclaurent").chain(args.iter().copied());
    run(argv, None)
}

fn json(out: &Output) -> Value {
    assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("stdout is JSON")
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn assert_schema(name: &str, doc: &Value) {
    let path = crate_dir().join("schema").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(crate_dir().join("fixtures").join(name)).unwrap()
}

#[test]
fn iterate_k2_has_five_terms() {
    let doc = json(&cli(&["iterate", "--k", "2", "--target", "x"]));
    assert_eq!(doc["stats"]["term_count"], 5);
    assert_eq!(doc["terms"].as_array().unwrap().len(), 5);
    assert_eq!(doc["laurent"], true);
    assert_schema("iterate", &doc);
}

#[test]
fn iterate_matches_golden_fixtures() {
    for (k, t, file) in [
        ("1", "x", "iterate_h101_k1_x.json"),
        ("2", "x", "iterate_h101_k2_x.json"),
        ("-1", "y", "iterate_h101_km1_y.json"),
    ] {
        let out = cli(&["iterate", "--H", "1,0,1", "--k", k, "--target", t]);
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.stdout, fixture(file), "{file}");
    }
}

#[test]
fn fixtures_agree_with_hand_expansions() {
    // sigma(x) = y^-1 H(x); tau(y) = x^-1 H(y).
    let alg = FreeAlgebra::laurent();
    let cases = [
        ("iterate_h101_k1_x.json", "y^-1 + y^-1*x^2"),
        ("iterate_h101_k2_x.json", "y^-1*x^-1*y + y^-1*x^-1*y^-1 + y^-1*x^-1*y^-1*x^2 + y^-1*x*y^-1 + y^-1*x*y^-1*x^2"),
        ("iterate_h101_km1_y.json", "x^-1 + x^-1*y^2"),
    ];
    for (file, text) in cases {
        let doc: ElementDoc = serde_json::from_str(&fixture(file)).unwrap();
        assert_eq!(doc.element().unwrap(), parse_element(&alg, text).unwrap(), "{file}");
    }
}

#[test]
fn text_output_parses_back() {
    let out = cli(&["iterate", "--k", "3", "--target", "x", "--format", "text"]);
    let alg = FreeAlgebra::laurent();
    let parsed = parse_element(&alg, out.stdout.trim()).unwrap();
    let doc: ElementDoc = serde_json::from_str(&cli(&["iterate", "--k", "3", "--target", "x"]).stdout).unwrap();
    assert_eq!(parsed, doc.element().unwrap());
}

#[test]
fn iterate_range_streams_an_array() {
    let doc = json(&cli(&["iterate", "--H", "1,1,1", "--k-min", "-2", "--k-max", "2"]));
    let items = doc.as_array().unwrap();
    assert_eq!(items.len(), 10);
    for (idx, item) in items.iter().enumerate() {
        assert_eq!(item["k"], idx as i64 / 2 - 2);
        assert_eq!(item["target"], if idx % 2 == 0 { "x" } else { "y" });
        assert_schema("iterate", item);
    }
    let text = cli(&["iterate", "--H", "1,1,1", "--k-min", "-2", "--k-max", "2", "--format", "text"]).stdout;
    let alg = FreeAlgebra::laurent();
    for (line, item) in text.lines().zip(items) {
        let (_, rhs) = line.split_once(" = ").unwrap();
        let doc: ElementDoc = serde_json::from_value(item.clone()).unwrap();
        assert_eq!(parse_element(&alg, rhs).unwrap(), doc.element().unwrap(), "{line}");
    }
}

#[test]
fn iterate_k0_is_the_generator() {
    let out = cli(&["iterate", "--k", "0", "--target", "y", "--format", "text"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stdout.trim(), "y");
}

#[test]
fn repeated_root_warns_but_runs() {
    let out = cli(&["iterate", "--H", "1,2,1", "--k", "1", "--target", "x"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stderr.contains("repeated root"), "{}", out.stderr);
}

#[test]
fn invalid_h_is_a_usage_error() {
    for h in ["1,2", "2,0,2", "1", "1,a,1"] {
        let out = cli(&["iterate", "--H", h, "--k", "1"]);
        assert_eq!(out.code, EXIT_USAGE, "H = {h}");
        assert!(out.stdout.is_empty());
    }
    let out = cli(&["iterate", "--H", "1,2,0,1", "--k", "1"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli(&["verify", "--k-min", "3", "--k-max", "1"]).code, EXIT_USAGE);
}

#[test]
fn budget_exits_with_three() {
    assert_eq!(cli(&["iterate", "--k", "9"]).code, EXIT_BUDGET);
    assert_eq!(cli(&["iterate", "--k", "5", "--max-terms", "10"]).code, EXIT_BUDGET);
    assert_eq!(cli(&["iterate", "--k", "2", "--max-abs-k", "1"]).code, EXIT_BUDGET);
}

#[test]
fn non_laurent_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out =
        cli(&["iterate", "--H", "1,2,0,1", "--allow-nonreversible", "--k", "3", "--target", "x", "--out", out_dir]);
    assert_eq!(out.code, EXIT_NOT_LAURENT, "{}", out.stderr);
    let bundle: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("repro.json")).unwrap()).unwrap();
    assert_eq!(bundle["k"], 3);
    assert_eq!(bundle["target"], "x");
    assert!(!bundle["witness"].as_array().unwrap().is_empty());
    assert!(!bundle["input"].as_array().unwrap().is_empty());
}

#[test]
fn iterate_out_dir_gets_one_file_per_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["iterate", "--k", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    for t in ["x", "y"] {
        let doc: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("iterate_k2_{t}.json"))).unwrap())
                .unwrap();
        assert_schema("iterate", &doc);
    }
}

#[test]
fn verify_commutator_only() {
    let doc = json(&cli(&["verify", "--checks", "commutator", "--H", "1,1,1"]));
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "commutator");
    assert_eq!(checks[0]["status"], "pass");
    assert_eq!(doc["pass"], true);
    assert_schema("verify", &doc);
}

#[test]
fn verify_full_small_range_validates() {
    let doc = json(&cli(&["verify", "--k-min", "-2", "--k-max", "2", "--seed", "11"]));
    assert_eq!(doc["pass"], true);
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "laurent",
            "commutator",
            "inverse",
            "abelian",
            "recurrence",
            "division",
            "pit",
            "positivity",
            "toric",
            "charts"
        ]
    );
    for c in doc["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{}", c["name"]);
    }
    assert_schema("verify", &doc);
}

#[test]
fn verify_toric_for_n2() {
    let doc = json(&cli(&["verify", "--checks", "toric", "--n", "2"]));
    assert_eq!(doc["checks"][0]["status"], "pass");
}

#[test]
fn charts_control_is_informational() {
    let out = cli(&["verify", "--H", "1,2,0,1", "--allow-nonreversible", "--checks", "charts"]);
    let doc = json(&out);
    let c = &doc["checks"][0];
    assert_eq!(c["status"], "informational");
    assert_eq!(c["mandatory"], false);
    assert!(c["summary"].as_str().unwrap().starts_with("ChartMismatch"));
    assert!(out.stderr.contains("not reversible"));
}

#[test]
fn toric_report_validates() {
    let doc = json(&cli(&["toric", "--n", "2", "--i", "1"]));
    assert_eq!(doc["pass"], true);
    assert_schema("toric", &doc);
    let z1 = &doc["fans"][0];
    assert_eq!(z1["fan"]["label"], "Z1");
    let dets: Vec<i64> = z1["cones"].as_array().unwrap().iter().map(|c| c["det"].as_i64().unwrap()).collect();
    assert_eq!(dets, [-1, -1, -1, -1, -2]);
    assert_eq!(z1["singular"].as_array().unwrap().len(), 1);
    assert_eq!(z1["singular"][0]["closing"], true);
    let excluded: Vec<&str> =
        doc["pullback"]["excluded"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(excluded.iter().any(|e| e.contains("E non-toric")));
    assert!(excluded.iter().any(|e| e.contains("C non-toric")));
    for n in ["1", "4", "6"] {
        assert_eq!(json(&cli(&["toric", "--n", n]))["pass"], true, "n = {n}");
    }
    assert_eq!(cli(&["toric", "--n", "0"]).code, EXIT_USAGE);
}

#[test]
fn pit_report_validates() {
    let doc = json(&cli(&["pit", "--H", "1,0,1", "--k", "3", "--trials", "20", "--seed", "7"]));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["mismatches"], 0);
    assert_eq!(doc["reports"][0]["checks"], 40);
    assert_schema("pit", &doc);
    assert_eq!(cli(&["pit", "--prime", "15", "--k", "1"]).code, EXIT_USAGE);
}

#[test]
fn division_check_validates() {
    let doc = json(&cli(&["division-check", "--H", "1,0,1", "--k", "4"]));
    assert_eq!(doc["pass"], true);
    let steps = doc["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 4);
    for s in steps {
        assert_eq!(s["outcome"], "Solved");
        assert_eq!(s["matches_iterate"], true);
    }
    assert_schema("division", &doc);
    let back = json(&cli(&["division-check", "--H", "1,1,1", "--k", "-2"]));
    assert_eq!(back["steps"].as_array().unwrap().len(), 2);
    assert_eq!(back["pass"], true);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# small run\nH = 1,1,1\nk_min = -1\nk_max = 1\nchecks = commutator,inverse\nseed = 5\n")
        .unwrap();
    let p = path.to_str().unwrap();
    let doc = json(&cli(&["verify", "--config", p]));
    assert_eq!(doc["H"], serde_json::json!(["1", "1", "1"]));
    assert_eq!((doc["k_min"].as_i64(), doc["seed"].as_u64()), (Some(-1), Some(5)));
    assert_eq!(doc["checks"].as_array().unwrap().len(), 2);
    let doc = json(&cli(&["verify", "--config", p, "--seed", "9", "--checks", "commutator"]));
    assert_eq!(doc["seed"], 9);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 1);

    std::fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(cli(&["verify", "--config", p]).code, EXIT_USAGE);
    assert_eq!(cli(&["verify", "--config", "/nonexistent/run.conf"]).code, EXIT_USAGE);
}

#[test]
fn env_seed_is_overridden_by_flag() {
    let argv = ["nclaurent", "verify", "--checks", "commutator"];
    let doc: Value = serde_json::from_str(&run(argv, Some("42")).stdout).unwrap();
    assert_eq!(doc["seed"], 42);
    let doc: Value =
        serde_json::from_str(&run(["nclaurent", "verify", "--checks", "commutator", "--seed", "3"], Some("42")).stdout)
            .unwrap();
    assert_eq!(doc["seed"], 3);
    assert_eq!(run(argv, Some("forty-two")).code, EXIT_USAGE);
}

#[test]
fn timings_only_on_request() {
    let plain = json(&cli(&["iterate", "--k", "1", "--target", "x"]));
    assert!(plain.get("elapsed_ms").is_none());
    let timed = json(&cli(&["iterate", "--k", "1", "--target", "x", "--timings"]));
    assert!(timed["elapsed_ms"].is_number());
}

fn binary() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_nclaurent"))
}

#[test]
fn binary_reads_seed_from_environment() {
    let out = Command::new(binary())
        .args(["verify", "--checks", "commutator"])
        .env(nclaurent_cli::SEED_ENV, "17")
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["seed"], 17);
}

#[test]
fn binary_exit_codes() {
    let code = |args: &[&str]| Command::new(binary()).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["iterate", "--k", "1"]), EXIT_OK);
    assert_eq!(code(&["iterate", "--H", "1,2"]), EXIT_USAGE);
    assert_eq!(code(&["iterate", "--k", "9"]), EXIT_BUDGET);
    assert_eq!(code(&["--help"]), EXIT_OK);
}
