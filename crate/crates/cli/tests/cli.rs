use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn hdfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdfa"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    hdfa(&args)
}

fn summary_value(path: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from {}", path.display()))
        .parse()
        .unwrap()
}

#[test]
fn reference_table_lists_six_rows() {
    let out = tempfile::tempdir().unwrap();
    let o = hdfa(&[
        "show-reference-table",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let exail = text.lines().find(|l| l.contains("[9]")).unwrap();
    assert!(
        exail.starts_with("Exail IXF-HDF-PM-8-125") && exail.ends_with("15 ± 1%"),
        "{exail}"
    );
    let rows = text.lines().filter(|l| l.ends_with('%')).count();
    assert_eq!(rows, 6);
    let tsv = fs::read_to_string(out.path().join("ion_pairing_reference.tsv")).unwrap();
    assert!(tsv.starts_with("# config_digest: "));
}

#[test]
fn zero_length_fiber_passes_signal_through() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixtures().join("nrl_2050.cfg"))
        .unwrap()
        .replace("amplifier.length = 2.5 m", "amplifier.length = 0 m")
        .replace(
            "nrl_fiber.cfg",
            fixtures().join("nrl_fiber.cfg").to_str().unwrap(),
        )
        .replace(
            "nrl_absorption.csv",
            fixtures().join("nrl_absorption.csv").to_str().unwrap(),
        );
    let cfg = dir.path().join("zero.cfg");
    fs::write(&cfg, text).unwrap();
    let o = run("simulate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = dir.path().join("simulate_summary.txt");
    assert_eq!(
        summary_value(&summary, "signal_out_mW"),
        summary_value(&summary, "signal_in_mW")
    );
    assert_eq!(summary_value(&summary, "pump_out_mW"), 1300.0);
}

#[test]
fn invert_pairing_reports_four_percent() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        "invert-pairing",
        &fixtures().join("nrl_2050.cfg"),
        out.path(),
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("k_hat = 0.04"), "{}", stdout(&o));
    let k = summary_value(&out.path().join("pairing_estimate.txt"), "k_hat_percent");
    assert!((k - 4.0).abs() < 1.5, "{k}");
}

#[test]
fn artifacts_embed_the_digest() {
    let out = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("nrl_2050.cfg");
    let digest = hdfa_cli::parse_config(&cfg).unwrap().digest;
    for command in [
        "simulate",
        "sweep-pump-power",
        "sweep-pairing",
        "invert-pairing",
    ] {
        let o = run(command, &cfg, out.path(), &["--steps", "2"]);
        assert!(o.status.success(), "{command}: {}", stderr(&o));
    }
    let mut with_steps = hdfa_cli::parse_config(&cfg).unwrap();
    with_steps.apply_overrides(None, Some(2.0)).unwrap();
    assert_ne!(with_steps.digest, digest);
    let mut count = 0;
    for entry in fs::read_dir(out.path()).unwrap() {
        let path = entry.unwrap().path();
        let first = fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(
            first,
            format!("# config_digest: {}", with_steps.digest),
            "{}",
            path.display()
        );
        count += 1;
    }
    assert_eq!(count, 7);
}

#[test]
fn exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let o = hdfa(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hdfa(&["teleport", "--config", "x.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        "simulate",
        &fixtures().join("nrl_2050.cfg"),
        out.path(),
        &["--ase", "maybe"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        "simulate",
        &fixtures().join("nrl_2050.cfg"),
        out.path(),
        &["--steps", "-1"],
    );
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        "simulate",
        Path::new("/nonexistent/run.cfg"),
        out.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/run.cfg"));
    // The length study has no invert section.
    let o = run(
        "invert-pairing",
        &fixtures().join("nrl_length_study.cfg"),
        out.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invert"), "{}", stderr(&o));
}

#[test]
fn ase_flag_changes_output_slightly() {
    let off = tempfile::tempdir().unwrap();
    let on = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("nrl_2050.cfg");
    assert!(run("simulate", &cfg, off.path(), &["--ase", "off"])
        .status
        .success());
    let o = run("simulate", &cfg, on.path(), &["--ase", "on"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = summary_value(&off.path().join("simulate_summary.txt"), "signal_out_mW");
    let b = summary_value(&on.path().join("simulate_summary.txt"), "signal_out_mW");
    assert!(a != b && ((a - b) / a).abs() < 0.05, "{a} vs {b}");
    assert!(summary_value(&on.path().join("simulate_summary.txt"), "ase_backward_mW") > 0.0);
}
