use std::process::{Command, Output};

fn initcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_initcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn lists_all_presets() {
    let o = initcorr(&["list-presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for k in 1..=14 {
        assert!(text.lines().any(|l| l.starts_with(&format!("fig{k} "))), "fig{k}");
    }
}

#[test]
fn simulate_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = initcorr(&["simulate", "fig1", "--tmax", "0.2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "t,jx_corr,jx_uncorr,jx_exact_corr,jx_exact_uncorr");
    assert_eq!(lines.len(), 52);
    assert!(stderr(&o).contains("D = "));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# two spins\nmodel = boson\nn = 2\neps = 2.5\ndelta = 0.5\ndelta0 = 0.5\njx2 = true\n")
        .unwrap();
    let o = initcorr(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--tmax",
        "0.1",
        "--dt",
        "0.01",
        "--no-corr-term",
        "--no-corr-state",
        "--quad-nodes",
        "128",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,jx_corr,jx_uncorr,jx2_corr,jx2_uncorr");
    // both toggles off: the two curves coincide
    for l in lines {
        let v: Vec<&str> = l.split(',').collect();
        assert_eq!(v[1], v[2]);
    }
}

#[test]
fn unknown_key_fails_with_tagged_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "model = boson\nn = 2\ncoupling = 3\n").unwrap();
    let o = initcorr(&["simulate", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[config]: "), "{err}");
    assert!(err.contains("valid keys"));
}

#[test]
fn unknown_scenario_is_rejected() {
    let o = initcorr(&["simulate", "fig99"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[config]: 'fig99' is neither"));
}

#[test]
fn exact_dephasing_and_compare() {
    let o = initcorr(&["exact-dephasing", "fig2", "--tmax", "0.1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("t,jx_exact_corr,jx_exact_uncorr\n"));

    let o = initcorr(&["compare", "fig1", "--tmax", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("max |jx_me - jx_exact|"));

    let o = initcorr(&["compare", "fig4", "--tmax", "0.5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[config]:"));
}

#[test]
fn sweep_emits_one_row_per_value() {
    let o = initcorr(&["sweep", "fig4", "--axis", "beta", "--values", "0.5,1", "--tmax", "0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "beta,D");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.5,"));
}

#[test]
fn negative_dt_is_rejected() {
    let o = initcorr(&["simulate", "fig1", "--dt", "-0.1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("dt: must be > 0"));
}
