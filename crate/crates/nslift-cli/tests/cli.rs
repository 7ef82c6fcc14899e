//! End-to-end tests of the `nslift` binary: exit codes, artifacts, and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nslift"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nslift-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn presets_catalog_is_deterministic_and_contains_taylor_green() {
    let a = bin().arg("presets").output().unwrap();
    let b = bin().arg("presets").output().unwrap();
    run_ok(&a);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout).to_string();
    assert!(text.contains("taylor-green"));
    assert!(text.contains("random-smooth"));
}

#[test]
fn verify_jets_on_shear_reports_zero_jets() {
    let dir = tmp_dir("verify");
    let out = bin()
        .args([
            "verify-jets",
            "--preset",
            "shear",
            "--n",
            "16",
            "--cutoff",
            "4",
            "--i-star",
            "3",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("jets.json")).unwrap()).unwrap();
    assert_eq!(report["max_checked_full"], 0.0);
    assert_eq!(report["max_checked_galerkin"], 0.0);
    assert_eq!(
        report["boundary_compatibility"],
        "not applicable (periodic domain)"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn zero_preset_run_produces_zero_outputs() {
    let dir = tmp_dir("zero");
    let out = bin()
        .args([
            "run",
            "--preset",
            "zero",
            "--n",
            "8",
            "--cutoff",
            "2",
            "--i-star",
            "2",
            "--t-end",
            "0.05",
            "--dt",
            "0.005",
            "--formulation",
            "both",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let csv = std::fs::read_to_string(dir.join("diagnostics_shifted.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let l2: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(l2, 0.0);
    }
    let eq: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("equivalence.json")).unwrap())
            .unwrap();
    assert_eq!(eq["max_rel_gap"], 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_with_code_two() {
    // unknown key
    let dir = tmp_dir("cfg");
    let cfg_path = dir.join("bad.json");
    std::fs::write(&cfg_path, r#"{"preset": "shear", "unknown_key": 1}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("unknown_key"), "{err}");

    // invariant violation: cutoff above the resolved range
    let out = bin()
        .args(["run", "--preset", "shear", "--n", "16", "--cutoff", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("cutoff"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn blow_up_exits_with_code_three() {
    let dir = tmp_dir("blowup");
    // gigantic time step on stiff dynamics overflows quickly
    let out = bin()
        .args([
            "run",
            "--preset",
            "taylor-green",
            "--n",
            "8",
            "--cutoff",
            "2",
            "--i-star",
            "2",
            "--t-o",
            "10000",
            "--t-end",
            "10000",
            "--dt",
            "50",
            "--formulation",
            "direct",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // the manifest written before the run records the failure afterwards
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "error");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn internal_errors_exit_with_code_five() {
    // out dir path collides with an existing file
    let dir = tmp_dir("exit5");
    let blocker = dir.join("blocked");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = bin()
        .args([
            "run", "--preset", "shear", "--n", "8", "--cutoff", "2", "--i-star", "2",
            "--t-end", "0.01", "--dt", "0.005", "--out",
        ])
        .arg(&blocker)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn determinism_identical_config_gives_identical_csv() {
    let run = |dir: &Path| {
        let out = bin()
            .args([
                "run",
                "--preset",
                "random-smooth(5)",
                "--n",
                "16",
                "--cutoff",
                "4",
                "--i-star",
                "3",
                "--t-end",
                "0.05",
                "--dt",
                "0.005",
                "--formulation",
                "shifted",
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        run_ok(&out);
        std::fs::read(dir.join("diagnostics_shifted.csv")).unwrap()
    };
    let d1 = tmp_dir("det1");
    let d2 = tmp_dir("det2");
    let a = run(&d1);
    let b = run(&d2);
    assert_eq!(a, b, "diagnostics CSV must be bit-identical across runs");
    std::fs::remove_dir_all(&d1).ok();
    std::fs::remove_dir_all(&d2).ok();
}

#[test]
fn equivalence_subcommand_reports_small_gap() {
    let dir = tmp_dir("equiv");
    let out = bin()
        .args([
            "equivalence",
            "--preset",
            "shear",
            "--n",
            "16",
            "--cutoff",
            "4",
            "--i-star",
            "3",
            "--t-end",
            "0.1",
            "--dt",
            "0.001",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let eq: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("equivalence.json")).unwrap())
            .unwrap();
    let gap = eq["max_rel_gap"].as_f64().unwrap();
    assert!(gap <= 1e-10, "gap {gap}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn flatness_subcommand_fits_the_lift_order() {
    let dir = tmp_dir("flat");
    let out = bin()
        .args([
            "flatness",
            "--preset",
            "taylor-green",
            "--n",
            "16",
            "--cutoff",
            "4",
            "--i-star",
            "3",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("flatness.json")).unwrap())
            .unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!(slope >= 4.5, "slope {slope}");
    assert_eq!(fit["theoretical_slope"], 5);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_constants_emits_labeled_empirical_values() {
    let dir = tmp_dir("fitc");
    let out = bin()
        .args([
            "fit-constants",
            "--preset",
            "shear",
            "--n",
            "16",
            "--cutoff",
            "4",
            "--i-star",
            "3",
            "--t-end",
            "0.1",
            "--dt",
            "0.002",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);
    let c: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("constants.json")).unwrap())
            .unwrap();
    assert!(c["c2"].as_f64().unwrap() > 0.0);
    assert!(c["first_window"].as_f64().unwrap() > 0.0);
    let prov = c["provenance"].as_str().unwrap();
    assert!(prov.contains("empirical"), "{prov}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verification_failure_exits_with_code_four() {
    // Jet entries grow like amplitude^order while the vanishing tolerance is
    // linear in the data scale, so absurdly large data pushes the rounding
    // residue of the telescoping past the relative tolerance. This is the
    // intended failure mode: the certificate refuses data it cannot verify
    // in double precision.
    let dir = tmp_dir("verify4");
    let huge = dir.join("huge.txt");
    let n = 16usize;
    let grid_len = n * n * n;
    let idx_of = |k: [i64; 3]| -> usize {
        let wrap = |c: i64| (((c % n as i64) + n as i64) % n as i64) as usize;
        (wrap(k[0]) * n + wrap(k[1])) * n + wrap(k[2])
    };
    let amp = 1e8;
    let mut rows = vec!["0.0 0.0 0.0 0.0 0.0 0.0".to_string(); grid_len];
    // divergence-free modes with a rich mutual advection cascade
    rows[idx_of([0, 1, 0])] = format!("{amp} 0.0 0.0 0.0 0.0 0.0");
    rows[idx_of([0, -1, 0])] = format!("{amp} 0.0 0.0 0.0 0.0 0.0");
    rows[idx_of([1, 0, 0])] = format!("0.0 0.0 {amp} 0.0 0.0 0.0");
    rows[idx_of([-1, 0, 0])] = format!("0.0 0.0 {amp} 0.0 0.0 0.0");
    rows[idx_of([1, 1, 1])] = format!("{amp} 0.0 {} 0.0 0.0 0.0", -amp);
    rows[idx_of([-1, -1, -1])] = format!("{amp} 0.0 {} 0.0 0.0 0.0", -amp);
    let text = format!(
        "nslift-field 1\nn {n}\ndealias 2 3\nentries 1\nentry 0 1 1\n{}\n",
        rows.join("\n")
    );
    std::fs::write(&huge, text).unwrap();
    let out = bin()
        .args([
            "verify-jets",
            "--n",
            "16",
            "--cutoff",
            "4",
            "--i-star",
            "7",
            "--initial-field",
        ])
        .arg(&huge)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("does not vanish"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}
