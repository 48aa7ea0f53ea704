use std::path::Path;
use std::process::{Command, Output};

use reachcloud_atlas::RunManifest;

fn reachcloud(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reachcloud"))
        .args(args)
        .current_dir(dir)
        .env_remove("REACHCLOUD_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn verify(dir: &Path, manifest: &str) -> RunManifest {
    let m = RunManifest::read(&dir.join(manifest)).unwrap();
    assert!(!m.files.is_empty());
    assert!(m.mismatches(dir).is_empty(), "{manifest}: {:?}", m.mismatches(dir));
    m
}

#[test]
fn validate_minimal_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = reachcloud(dir.path(), &["validate", "--preset", "minimal", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = reachcloud(dir.path(), &["gen", "--preset", "minimal", "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(code(&reachcloud(dir.path(), &["gen", "--preset", "minimal"])), 1);
    assert_eq!(code(&reachcloud(dir.path(), &["gen", "--out", "x.ply"])), 1);
    assert_eq!(code(&reachcloud(dir.path(), &["--help"])), 0);
}

#[test]
fn overlapping_bundles_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[[architectures]]\nalpha_deg = 0\nsigma_deg = 100\ntheta0_deg = 0\nn = 4\n",
    )
    .unwrap();
    let o = reachcloud(dir.path(), &["validate", "--config", "bad.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("architectures[0].sigma"), "{}", stdout(&o));
    let o = reachcloud(dir.path(), &["gen", "--config", "bad.toml", "--out", "c.ply"]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("c.ply").exists());
}

#[test]
fn schema_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("d.toml"),
        "preset = \"minimal\"\nomega_deg = 108\nsigma = 3\n",
    )
    .unwrap();
    let o = reachcloud(dir.path(), &["validate", "--config", "d.toml"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("sigma"), "{e}");
}

#[test]
fn gen_writes_cloud_and_manifest_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "gen",
        "--preset",
        "minimal",
        "--omega",
        "108",
        "--phi",
        "2",
        "--samples",
        "5000",
        "--seed",
        "42",
    ];
    let run = |out: &str, workers: &str| {
        let mut args = base.to_vec();
        args.extend(["--out", out, "--workers", workers]);
        let o = reachcloud(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    run("a.ply", "1");
    run("b.ply", "3");
    let a = std::fs::read(dir.path().join("a.ply")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.ply")).unwrap());
    let m = verify(dir.path(), "a.ply.manifest.json");
    assert_eq!(m.seeds, vec![42]);
    assert_eq!(m.sampler.unwrap().n_samples, 5000);
    let cloud = reachcloud_core::read_cloud(&dir.path().join("a.ply")).unwrap();
    assert!(cloud.warnings.is_empty(), "{:?}", cloud.warnings);
    assert_eq!(Some(cloud.design_digest.clone()), m.design_digest);

    run("a.csv", "1");
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("x,y,z,gamma_0,gamma_1,gamma_2\n"));
    assert_eq!(csv.lines().count(), 5001);
    verify(dir.path(), "a.csv.manifest.json");
}

#[test]
fn workers_env_default() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_reachcloud"))
        .args(["gen", "--preset", "minimal", "--samples", "100", "--out", "c.ply"])
        .current_dir(dir.path())
        .env("REACHCLOUD_WORKERS", "two")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_reachcloud"))
        .args(["gen", "--preset", "minimal", "--samples", "100", "--out", "c.ply"])
        .current_dir(dir.path())
        .env("REACHCLOUD_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn redundancy_and_hull_on_generated_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = reachcloud(
        d,
        &[
            "gen",
            "--preset",
            "redundant",
            "--omega",
            "108",
            "--phi",
            "2",
            "--samples",
            "20000",
            "--seed",
            "3",
            "--out",
            "cloud.ply",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = reachcloud(
        d,
        &[
            "redundancy",
            "--in",
            "cloud.ply",
            "--radius",
            "0.016667",
            "--subset",
            "1000",
            "--seed",
            "7",
            "--out",
            "dbar",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = verify(d, "dbar.manifest.json");
    assert!(m.files.contains_key("dbar.csv") && m.files.contains_key("dbar.ply"));
    let csv = std::fs::read_to_string(d.join("dbar.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);

    let o = reachcloud(
        d,
        &[
            "hull",
            "--in",
            "cloud.ply",
            "--out",
            "metrics.json",
            "--mesh",
            "hull.ply",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    verify(d, "metrics.json.manifest.json");
    let m: reachcloud_hull::HullMetrics =
        serde_json::from_str(&std::fs::read_to_string(d.join("metrics.json")).unwrap()).unwrap();
    assert!(m.v_concave > 0.0 && m.v_concave <= m.v_convex);
    let mesh = reachcloud_hull::TriangleMesh::read_ply(&d.join("hull.ply")).unwrap();
    assert!(mesh.is_closed());

    // α far below the point spacing keeps nothing: a numeric failure.
    let o = reachcloud(d, &["hull", "--in", "cloud.ply", "--alpha", "1e-9"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let o = reachcloud(d, &["hull", "--in", "missing.ply"]);
    assert_eq!(code(&o), 3);
    std::fs::write(d.join("junk.ply"), "ply\nformat ascii 1.0\nend_header\n").unwrap();
    assert_eq!(code(&reachcloud(d, &["hull", "--in", "junk.ply"])), 3);
}

#[test]
fn centerline_at_rest_is_straight() {
    let dir = tempfile::tempdir().unwrap();
    let o = reachcloud(
        dir.path(),
        &[
            "centerline",
            "--preset",
            "minimal",
            "--omega",
            "108",
            "--gamma",
            "0,0,0",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    verify(dir.path(), "c.csv.manifest.json");
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(text.lines().count(), 202);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(last[1].abs() < 1e-12 && last[2].abs() < 1e-12 && (last[3] - 1.0).abs() < 1e-9);
    let o = reachcloud(dir.path(), &["centerline", "--preset", "minimal", "--gamma", "-1,0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn stats_reports_distal_stations() {
    let dir = tempfile::tempdir().unwrap();
    let o = reachcloud(
        dir.path(),
        &[
            "stats",
            "--preset",
            "minimal",
            "--omega",
            "108",
            "--phi",
            "3",
            "--samples",
            "2000",
            "--out",
            "s.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    verify(dir.path(), "s.json.manifest.json");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["stations"].as_array().unwrap().len(), 6);
    let o = reachcloud(dir.path(), &["stats", "--preset", "minimal", "--stations", "1.5"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn small_atlas_exports_verified_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = reachcloud(
        dir.path(),
        &[
            "atlas",
            "--n-omega",
            "2",
            "--n-phi",
            "2",
            "--samples",
            "3000",
            "--seed",
            "5",
            "--out",
            "atlas",
            "--retain",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let root = dir.path().join("atlas");
    let m = verify(&root, "manifest.json");
    assert!(m.files.contains_key("atlas.csv"));
    assert!(m.files.contains_key("cells/omega_1_phi_1/metrics.json"));
    assert!(m.files.contains_key("cells/omega_1_phi_1/cloud.ply"));
    let rows = reachcloud_atlas::read_atlas_csv(std::io::BufReader::new(
        std::fs::File::open(root.join("atlas.csv")).unwrap(),
    ))
    .unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.v_norm.is_some() && r.n_points == 3000));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["optimum"]["v_norm"].as_f64().unwrap() > 0.0);
}
