use std::fs;
use std::process::Command;

fn simuav() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simuav"))
}

#[test]
fn run_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = simuav()
        .args(["run", "--method", "ud", "--layers", "1", "--seed", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);
    assert!(sweep.lines().nth(1).unwrap().starts_with("ud,1,4,"));

    let summary = dir.path().join("summary.csv");
    let status = simuav()
        .arg("summarize")
        .arg(out.join("sweep.csv"))
        .arg("--out")
        .arg(&summary)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(summary).unwrap();
    assert!(text.starts_with("method,L,mean,std,n\nud,1,"));
    assert!(text.trim_end().ends_with(",0.0,1"));
}

#[test]
fn sweep_accepts_lists_and_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(
        &cfg,
        r#"
[network]
num_users = 3
num_uavs = 2
area_side_m = 600.0
altitude_m = 50.0
safety_distance_m = 100.0
tx_power_mw = 500.0
noise_power_dbm = -110.0

[sim]
layers = 2
atoms_per_layer = 9
wavelength_m = 0.0107
thickness_wavelengths = 5.0
atom_area_m2 = 2.862e-5
atom_spacing_m = 0.00535
"#,
    )
    .unwrap();
    let out = dir.path().join("sweep");
    let status = simuav()
        .args(["sweep", "--methods", "ao,nosim", "--layers", "1-2", "--seeds", "0,3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 2 * 2 * 2);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn dump_physics_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phys");
    let status = simuav().args(["dump-physics", "--layers", "2", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    for f in ["inter_layer.csv", "output_vector.csv", "correlation.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let out = simuav().args(["sweep", "--methods", "ao,magic"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
    let out = simuav().args(["run", "--config", "/nonexistent.toml"]).output().unwrap();
    assert!(!out.status.success());
}
