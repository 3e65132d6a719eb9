use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tukia"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn intro2d_certifies_with_exact_defect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let (code, stdout, _) = run(&["run", scenario("intro2d.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["certified"], true);
    assert!(report["result"]["max_defect_after"].as_f64().unwrap() <= 1e-10);
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("stage,folner_size,residual,max_defect,wall_ms\n"));
    assert_eq!(trace.lines().count(), 2);
}

#[test]
fn filiform_suite_scenario_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) =
        run(&["run", scenario("filiform3.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn missing_generators_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"name\": \"bad\",\n  \"pipeline\": \"conjugate\",\n  \"space\": {},\n  \"group\": {\"kind\": \"finite\"}\n}\n")
        .unwrap();
    let (code, _, stderr) = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("generators") && stderr.contains("line"), "{stderr}");
}

#[test]
fn bad_field_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("zaction.json")).unwrap().replace("\"pl\"", "\"plx\"");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, text).unwrap();
    let (code, _, stderr) = run(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("group.generators[0]"), "{stderr}");
}

#[test]
fn unknown_suite_and_missing_file_exit_2() {
    assert_eq!(run(&["verify", "nonsense"]).0, 2);
    assert_eq!(run(&["run", "/nonexistent/scenario.json"]).0, 2);
}

#[test]
fn truncated_schedule_is_uncertified() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&[
        "run",
        scenario("tukia_r2.json").to_str().unwrap(),
        "--max-words",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("NOT CERTIFIED"));
}

#[test]
fn reports_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<String> = ["1", "3"]
        .iter()
        .map(|t| {
            let out = dir.path().join(t);
            let (code, ..) = run(&[
                "run",
                scenario("zaction.json").to_str().unwrap(),
                "--threads",
                t,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
            std::fs::read_to_string(out.join("report.json")).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn verify_suites_pass() {
    for suite in ["metrics", "filiform", "cocycle", "hislip"] {
        let (code, stdout, _) = run(&["verify", suite, "--seed", "3"]);
        assert_eq!(code, 0, "{suite}: {stdout}");
        assert!(stdout.contains("0 failed"));
    }
}
