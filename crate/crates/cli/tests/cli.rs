use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn speclag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speclag"))
        .args(args)
        .env_remove("SPECLAG_JOBS")
        .env_remove("SPECLAG_DETERMINISTIC")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = speclag(&[
        "init",
        "--print-config",
        "--scenario",
        "mixture",
        "--n",
        "24",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("b_tilde = 0.0795"));
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, &text).unwrap();
    let again = speclag(&["init", "--print-config", "-c", path(&cfg)]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let odd = speclag(&["init", "--n", "15", "-o", path(&dir.path().join("f.bspf"))]);
    assert_eq!(odd.status.code(), Some(2));
    let missing = dir.path().join("missing.bspf");
    let out = speclag(&["collide", "-i", path(&missing), "-o", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.bspf"));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nsize = 3\n").unwrap();
    let out = speclag(&["init", "--print-config", "-c", path(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(speclag(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn collide_writes_artifacts_and_warns_past_nyquist() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("q");
    let out = speclag(&[
        "collide",
        "--scenario",
        "maxwellian",
        "--n",
        "8",
        "--g-tr",
        "20",
        "-o",
        path(&out_dir),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Nyquist"));
    for name in [
        "q.bspf",
        "q_projected.bspf",
        "q_x.csv",
        "diagnostics.json",
        "manifest.json",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["derived"]["dv"], 2.5);
    assert_eq!(manifest["derived"]["slice_offaxis"], 0.0);
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 1);
    let diag: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("diagnostics.json")).unwrap())
            .unwrap();
    let after = diag["moments_after"].as_array().unwrap();
    assert!(after.iter().all(|m| m.as_f64().unwrap().abs() < 1e-10));
    let csv = fs::read_to_string(out_dir.join("q_x.csv")).unwrap();
    assert!(csv.starts_with("v_x,value,abs,sign\n"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("f.bspf");
    assert!(speclag(&[
        "init",
        "--scenario",
        "mixture",
        "--n",
        "12",
        "-o",
        path(&field)
    ])
    .status
    .success());
    let mut bytes = vec![];
    for jobs in ["1", "3"] {
        let out_dir = dir.path().join(jobs);
        let out = speclag(&[
            "--jobs",
            jobs,
            "collide",
            "-i",
            path(&field),
            "-o",
            path(&out_dir),
        ]);
        assert!(out.status.success());
        bytes.push(fs::read(out_dir.join("q.bspf")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn advise_bkw_energy_method() {
    let out = speclag(&["advise", "--scenario", "bkw", "--n", "48"]);
    assert!(out.status.success());
    let advice: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((advice["k"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let c = advice["c"].as_f64().unwrap();
    assert!(c > 0.1 / 1.2 && c < 0.1 * 1.2, "c = {c}");
    assert!(advice["g_tr"].as_f64().unwrap() <= 8.0);
    assert_eq!(advice["sweep"].as_array().unwrap().len(), 60);
}

#[test]
fn kernel_probe_csv() {
    let out = speclag(&["kernel-probe", "--points", "5", "--xi-max", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "xi_norm,value");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("4,"));
}

#[test]
fn evolve_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[grid]\nn = 8\nl = 6.0\n[scenario]\nname = \"maxwellian\"\n\
         [integrator]\nkind = \"rk4\"\ndt = 0.1\nt_final = 0.3\n[outputs]\ncadence = 1\nformats = [\"bspf\"]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = speclag(&["evolve", "-c", path(&cfg), "-o", path(&out_dir)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let moments = fs::read_to_string(out_dir.join("moments.csv")).unwrap();
    assert_eq!(moments.lines().count(), 5);
    for step in 0..=3 {
        assert!(out_dir.join(format!("fields/f_{step:06}.bspf")).exists());
    }
    assert!(!out_dir.join("fields/f_000000_x.csv").exists());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["steps"], 3);
}

#[test]
fn evolve_needs_final_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = speclag(&["evolve", "--n", "8", "-o", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_final"));
}

#[test]
fn validate_exit_codes() {
    let pass = speclag(&["validate", "asymptotics"]);
    assert_eq!(pass.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&pass.stdout).contains("PASS"));
    // The cylindrical envelope does not reproduce, so this criterion fails.
    let fail = speclag(&["validate", "6"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));
}
