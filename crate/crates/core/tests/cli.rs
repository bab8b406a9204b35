use std::process::{Command, Output};

use gradwalk::report::{read_records, CSV_HEADER};

fn gradwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

#[test]
fn catalog_lists_every_id() {
    let o = gradwalk(&["catalog"]);
    assert!(o.status.success());
    for id in ["linear", "radial", "saddle", "hpow:k"] {
        assert!(stdout(&o).lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn value_on_linear_passes() {
    let o = gradwalk(&[
        "value",
        "--fn",
        "linear",
        "--p",
        "3",
        "--eps",
        "0.1",
        "--samples",
        "2000",
        "--x0",
        "0.2,0.1",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(last_line(&o).starts_with("PASS worst_error="));
}

#[test]
fn sweep_writes_the_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = gradwalk(&[
        "sweep",
        "--fn",
        "linear",
        "--regime",
        "eta",
        "--eps",
        "0.2,0.1,0.05",
        "--samples",
        "300",
        "--seed",
        "4",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(last_line(&o).starts_with("PASS worst_margin="));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let records = read_records(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 27);
    assert!(records.iter().all(|r| r.fn_id == "linear" && r.n_samples == 300));
}

#[test]
fn config_file_drives_the_sweep_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "fn = linear\nregime = zeroset\neps = 0.2, 0.1, 0.05\nsamples = 200\nx0 = 0.1, 0.1\n",
    )
    .unwrap();
    let o = gradwalk(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let rows: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("linear,"))
        .map(String::from)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.contains(",zeroset,") && r.contains(",1.0000000000000001e-1;1.0000000000000001e-1,")));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "fn = linear\nstep = 0.1\n").unwrap();
    let o = gradwalk(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key `step`"));
}

#[test]
fn failing_check_sets_exit_status() {
    // The radial push regime gives the same error at every one of these steps.
    let o = gradwalk(&[
        "sweep",
        "--fn",
        "radial",
        "--regime",
        "rate",
        "--samples",
        "100",
        "--x0",
        "0,0",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(last_line(&o).starts_with("FAIL"));
}

#[test]
fn residual_and_drift_checks_pass() {
    let o = gradwalk(&["residual-check", "--fn", "radial", "--p", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(last_line(&o).starts_with("PASS worst_ratio="));
    let o = gradwalk(&["drift-check", "--samples", "100", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(last_line(&o).starts_with("PASS worst_margin="));
}

#[test]
fn diffusion_reports_exit_time() {
    let o = gradwalk(&[
        "diffusion",
        "--fn",
        "linear",
        "--p",
        "2",
        "--h",
        "1e-3",
        "--samples",
        "500",
        "--x0",
        "0.1,0",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("mean_exit_time="));
}

#[test]
fn bad_inputs_are_errors() {
    assert_eq!(gradwalk(&["value", "--fn", "cubic"]).status.code(), Some(2));
    assert_eq!(gradwalk(&["value", "--regime", "fast"]).status.code(), Some(2));
    assert_eq!(gradwalk(&["value", "--eps", "0.5"]).status.code(), Some(2));
    assert_eq!(gradwalk(&["value", "--x0", "0.9,0.9"]).status.code(), Some(2));
}
