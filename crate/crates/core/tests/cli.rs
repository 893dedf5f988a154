use std::process::Command;

use isolation_game::output::{from_csv, read_manifest, sha256_hex};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isolation-game"))
}

#[test]
fn figure_output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let st = exe()
            .args(["figure", "F4", "--seed", "42", "--runs", "5", "--populations", "500", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    for f in ["figure_F4.csv", "figure_F4.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
    let m = read_manifest(&a.path().join("figure_F4.manifest.json")).unwrap();
    assert_eq!(m.seed, 42);
    for e in &m.files {
        assert_eq!(e.sha256, sha256_hex(&std::fs::read(a.path().join(&e.name)).unwrap()));
    }
    let (cols, rows) = from_csv(&std::fs::read(a.path().join("figure_F4.csv")).unwrap()).unwrap();
    assert_eq!(cols, ["n", "isolation_fraction", "mean_total", "std_error"]);
    assert_eq!(rows.len(), 4);
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(a.path(), "1"), (b.path(), "2")] {
        assert!(exe()
            .args(["simulate", "--runs", "3", "--n", "200", "--isolation-fraction", "0.5", "--seed", seed, "--out"])
            .arg(dir)
            .output()
            .unwrap()
            .status
            .success());
    }
    assert_ne!(
        std::fs::read(a.path().join("simulate.csv")).unwrap(),
        std::fs::read(b.path().join("simulate.csv")).unwrap()
    );
}

#[test]
fn config_file_drives_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn = 120\nruns = 4\nisolation_fraction = 0.25\nseed = 3\n").unwrap();
    let out = exe()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("runs=4 n=120 isolation_fraction=0.25"), "{text}");
    let (_, rows) = from_csv(&std::fs::read(dir.path().join("simulate.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    // 25% of 120 stay home, the rest move
    assert!(rows.iter().all(|r| r[3] == 90.0));
}

#[test]
fn sustain_reports_horizon() {
    let out = exe().args(["sustain", "--R0", "100", "--U", "20", "--r", "10"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("P=10.0\nwhole_days=10\n"), "{text}");
}

#[test]
fn game_check_reports_all_home() {
    let out = exe()
        .args(["game-check", "--player", "100,500,800", "--player", "20,30,40", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["alpha_gt_beta"], true);
    assert_eq!(v["equilibrium"], serde_json::json!(["Home", "Home"]));
}

#[test]
fn exit_codes() {
    let usage = exe().args(["simulate", "--frobnicate"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("--frobnicate"));
    let domain = exe().args(["game-check", "--player", "1400,10,20"]).output().unwrap();
    assert_eq!(domain.status.code(), Some(1));
    let help = exe().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let version = exe().arg("--version").output().unwrap();
    assert_eq!(version.status.code(), Some(0));
}
