use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use apm_spdc::biphoton::JsaMetadata;
use apm_spdc::calibration::CalibrationRecord;
use apm_spdc::polarization::EntangledDocument;
use apm_spdc::pump::RecipeDocument;

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/table1.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apm-spdc"))
        .args(args)
        .env_remove("APM_SPDC_MATERIALS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn reproduce_table1_prints_and_persists() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce-table1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for row in ["1.89", "1.35", "1.25", "3.54", "3.28", "-20.1", "-18.6"] {
        assert!(text.contains(row), "missing {row} in\n{text}");
    }
    let record: CalibrationRecord = read(&dir.path().join("calibration.json"));
    assert!(record.pass);
    assert_eq!(record.candidates_evaluated, 80);
}

#[test]
fn design_table_and_recipe_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config();
    let o = run(&["design", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("A (1e12 rad/s)") && text.contains("theta (deg)"));
    assert!(text.contains("-19.2"), "{text}");
    let doc: RecipeDocument = read(&dir.path().join("recipe.json"));
    assert_eq!(doc.branches.to_string(), "e,o,o");
    assert!((doc.c - 3.54e-9).abs() < 0.01e-9);

    let o = run(&[
        "design",
        "--config",
        cfg.to_str().unwrap(),
        "--entangled",
        "--phase",
        "-0.5",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: EntangledDocument = read(&dir.path().join("entangled.json"));
    assert_eq!(doc.phase_rad, -0.5);
    assert_eq!(doc.power_ratio, (2.22f64 / 0.16).powi(2));
    assert_eq!(doc.z.label, "HH");
    assert_eq!(doc.y.chi2_label, "yyy");
}

#[test]
fn symmetric_design_has_no_angle_or_shear() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "design",
        "--signal-omega",
        "2.2e15",
        "--idler-omega",
        "2.2e15",
        "--signal-sigma",
        "1e12",
        "--idler-sigma",
        "1e12",
        "--branches",
        "o,o,o",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: RecipeDocument = read(&dir.path().join("recipe.json"));
    assert_eq!(doc.theta_deg, 0.0);
    assert_eq!(doc.c, 0.0);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config();
    let cfg = cfg.to_str().unwrap();

    let o = run(&["jsa", "--config", cfg, "--grid-size", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = run(&[
        "design",
        "--config",
        cfg,
        "--convention",
        "4c/l",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("convention"));

    let o = run(&[
        "design",
        "--config",
        cfg,
        "--signal-omega",
        "2e15",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2), "mixed target styles");

    let o = run(&[
        "design",
        "--signal-wavelength",
        "300nm",
        "--idler-wavelength",
        "300nm",
        "--signal-coherence",
        "1mm",
        "--idler-coherence",
        "1mm",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(
        stderr(&o).contains("outside the valid range"),
        "{}",
        stderr(&o)
    );

    let o = run(&["design", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(4));

    let o = run(&["analyze", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jsa_outputs_are_deterministic_and_analyzable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config();
    for dir in [&a, &b] {
        let o = run(&[
            "jsa",
            "--config",
            cfg.to_str().unwrap(),
            "--grid-size",
            "64",
            "--overlay",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["jsa.csv", "jsa.json", "pump_overlay.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let meta: JsaMetadata = read(&a.path().join("jsa.json"));
    let k = meta.schmidt.schmidt_number;
    assert!((1.0..=1.05).contains(&k));

    let o = run(&[
        "analyze",
        a.path().join("jsa.csv").to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let analysis: serde_json::Value = read(&b.path().join("analysis.json"));
    let k2 = analysis["schmidt"]["schmidt_number"].as_f64().unwrap();
    assert!((k - k2).abs() < 1e-10);

    let overlay = fs::read_to_string(a.path().join("pump_overlay.csv")).unwrap();
    assert!(overlay.starts_with("k,omega,omega_s,omega_i,amplitude"));
    assert_eq!(overlay.lines().count(), 1 + 64 * 64);
}

#[test]
fn closed_form_mode_is_uncorrelated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let o = run(&[
        "jsa",
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "closed-form",
        "--grid-size",
        "128",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta: JsaMetadata = read(&dir.path().join("jsa.json"));
    assert!(meta.schmidt.pearson.abs() < 1e-12);
    assert!(meta.recipe.is_some());
}

#[test]
fn entangled_jsa_reports_polarization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let o = run(&[
        "jsa",
        "--config",
        cfg.to_str().unwrap(),
        "--entangled",
        "--grid-size",
        "64",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = read(&dir.path().join("polarization.json"));
    let c = report["concurrence"].as_f64().unwrap();
    assert!(c > 0.999 && c <= 1.0);
    assert!(dir.path().join("jsa_hh.csv").exists() && dir.path().join("jsa_vv.csv").exists());
}

#[test]
fn map_coords_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let o = run(&[
        "design",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recipe = dir.path().join("recipe.json");
    let doc: RecipeDocument = read(&recipe);
    let (ws, wi) = (doc.targets.omega_s + 1e12, doc.targets.omega_i - 3e11);
    let o = run(&[
        "map-coords",
        "--recipe",
        recipe.to_str().unwrap(),
        "--omega-s",
        &ws.to_string(),
        "--omega-i",
        &wi.to_string(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let values: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().nth(2).unwrap().to_string())
        .collect();
    let o = run(&[
        "map-coords",
        "--recipe",
        recipe.to_str().unwrap(),
        "--k",
        &values[0],
        "--omega",
        &values[1],
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let back: Vec<f64> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert!((back[0] - ws).abs() < 1e-6 * doc.targets.sigma_s);
    assert!((back[1] - wi).abs() < 1e-6 * doc.targets.sigma_i);
}

#[test]
fn material_database_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("db.json");
    fs::write(
        &db,
        r#"[{"name": "Glass", "source": "test fixture",
             "ordinary": {"form": "constant", "coeffs": [2.25], "range_um": [0.2, 3.0]},
             "extraordinary": {"form": "constant", "coeffs": [2.56], "range_um": [0.2, 3.0]},
             "chi2": {"yyy": 1.0, "zxx": 1.0}}]"#,
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_apm-spdc"))
        .arg("materials")
        .env("APM_SPDC_MATERIALS", &db)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("Glass"));
    let o = run(&["materials"]);
    assert!(stdout(&o).contains("BBO"));
    let o = run(&["materials", "--material", db.to_str().unwrap()]);
    assert!(stdout(&o).contains("Glass"));
}
