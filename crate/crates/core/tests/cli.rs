use std::path::Path;
use std::process::{Command, Output};

fn pedsim(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pedsim"));
    cmd.args(args).env_remove("PEDSIM_OUTPUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("PEDSIM_OUTPUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_reports_config_errors_with_exit_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good.json");
    std::fs::write(&good, r#"{"scenario":"jaywalking","episodes":100,"master_seed":7}"#).unwrap();
    let o = pedsim(&["validate", good.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let typo = tmp.path().join("typo.json");
    std::fs::write(&typo, "{\"scenario\":\"jaywalking\",\n\"episdoes\":100}").unwrap();
    let o = pedsim(&["validate", typo.to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let zero = tmp.path().join("zero.json");
    std::fs::write(&zero, r#"{"scenario":"crossing","episodes":0}"#).unwrap();
    let o = pedsim(&["validate", zero.to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("episodes"));

    let missing = tmp.path().join("missing.json");
    assert_eq!(code(&pedsim(&["validate", missing.to_str().unwrap()], None)), 3);
}

#[test]
fn run_report_and_plot_data_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let o = pedsim(
        &["run", "--scenario", "jaywalking", "--episodes", "6", "--seed", "3", "--workers", "2", "--out", run.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("scenario,mode,episodes,collision_rate"));
    assert_eq!(stdout.lines().count(), 3);

    let again = tmp.path().join("again");
    let o = pedsim(
        &["report", run.join("records_v2i.jsonl").to_str().unwrap(), "--out", again.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(run.join("report_v2i.json")).unwrap(),
        std::fs::read(again.join("report_v2i.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(run.join("report_v2i.csv")).unwrap(),
        std::fs::read(again.join("report_v2i.csv")).unwrap()
    );

    let o = pedsim(&["plot-data", run.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    let surface = std::fs::read_to_string(run.join("injury_surface.csv")).unwrap();
    assert_eq!(surface.lines().count(), 1 + 17 * 8);
    assert!(run.join("detection_histogram.csv").exists());
}

#[test]
fn environment_overrides_the_configured_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    let configured = tmp.path().join("configured");
    let from_env = tmp.path().join("from_env");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"scenario":"crossing","episodes":2,"modes":["v2i"],"output_dir":{}}}"#,
            serde_json::to_string(&configured).unwrap()
        ),
    )
    .unwrap();
    let o = pedsim(&["run", "--config", cfg.to_str().unwrap()], Some(&from_env));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(from_env.join("records_v2i.jsonl").exists());
    assert!(!configured.exists());
}

#[test]
fn bad_scenario_and_missing_records_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pedsim(&["run", "--scenario", "nowhere", "--episodes", "1", "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    let o = pedsim(&["report", tmp.path().join("none.jsonl").to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
}
