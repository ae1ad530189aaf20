use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wavelab"));
    c.env_remove("WAVELAB_OUT_DIR");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn run(cmd: &str, path: &Path, out: &Path) -> Output {
    bin().arg(cmd).arg(path).arg("--out-dir").arg(out).arg("--quiet").output().unwrap()
}

fn error_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    serde_json::from_str(lines[0]).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn eigensolve_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("eigensolve", &scenario("infinite_well"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("infinite_well_spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# scenario: infinite_well");
    assert!(lines[1].starts_with("# scenario_sha256: "));
    assert_eq!(lines[2], "index,eigenvalue,energy");
    assert_eq!(lines.len(), 3 + 5);
    let meta: Value =
        serde_json::from_slice(&fs::read(dir.path().join("infinite_well_eigensolve.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "eigensolve");
}

#[test]
fn cfl_violation_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run("evolve", &scenario("cfl_violation"), &out_dir);
    assert_eq!(out.status.code(), Some(2));
    let err = error_line(&out);
    assert_eq!(err["error"], "numerical");
    assert!(err["message"].as_str().unwrap().contains("CFL"));
    assert!(listing(&out_dir).is_empty(), "{:?}", listing(&out_dir));
}

#[test]
fn validation_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.toml",
        "name = \"bad\"\n[grid]\nx_min = 0.0\nx_max = 1.0\nn = 10\nboundary = \"periodic\"\nspacing = 2\n",
    );
    let out = run("eigensolve", &p, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = error_line(&out);
    assert_eq!(err["error"], "validation");
    assert_eq!(err["detail"]["key"], "spacing");

    let p = write(
        dir.path(),
        "bad2.toml",
        "name = \"bad2\"\n[grid]\nx_min = 1.0\nx_max = 0.0\nn = 10\nboundary = \"periodic\"\n\
         [equation]\nfamily = \"rel_stationary\"\n[eigensolve]\nn_states = 2\n",
    );
    let out = run("eigensolve", &p, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(error_line(&out)["detail"]["key"].as_str().unwrap().starts_with("grid"));
    assert_eq!(listing(dir.path()), vec!["bad.toml", "bad2.toml"]);
}

#[test]
fn energy_below_rest_energy_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "slow.toml",
        "name = \"slow\"\n[equation]\nfamily = \"rel_new_td\"\nenergy = 0.5\n[dispersion]\nk = [1.0]\n",
    );
    let out = run("dispersion", &p, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scenario_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("eigensolve", &dir.path().join("nope.toml"), dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"], "io");
}

#[test]
fn out_dir_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (dir.path().join("env"), dir.path().join("flag"));
    let status = bin()
        .env("WAVELAB_OUT_DIR", &env_dir)
        .args(["calibrate", "--quiet"])
        .arg(scenario("calibrate"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_dir.join("calibrate_calibration.csv").exists());
    let status = bin()
        .env("WAVELAB_OUT_DIR", &env_dir)
        .args(["calibrate", "--quiet", "--out-dir"])
        .arg(&flag_dir)
        .arg(scenario("calibrate"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(flag_dir.join("calibrate_calibration.csv").exists());
    assert_eq!(listing(&env_dir).len(), listing(&flag_dir).len());
}

#[test]
fn calibrate_reports_the_time_dependent_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("calibrate", &scenario("calibrate"), dir.path()).status.success());
    let report = fs::read_to_string(dir.path().join("calibrate_audit.md")).unwrap();
    let row = report.lines().find(|l| l.starts_with("| nonrel_time_dependent")).unwrap();
    assert!(row.contains("-8.0000000000000000e0"), "{row}");
    assert!(row.contains("-4.0000000000000000e0"), "{row}");
    assert!(row.contains("C = -2/E") && row.ends_with("| NO |"), "{row}");
}

#[test]
fn seed_flag_changes_random_draws() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("dispersion_klein_gordon");
    let read = |sub: &str, seed: Option<&str>| {
        let mut c = bin();
        c.args(["dispersion", "--quiet", "--out-dir"]).arg(dir.path().join(sub)).arg(&s);
        if let Some(seed) = seed {
            c.args(["--seed", seed]);
        }
        assert!(c.status().unwrap().success());
        fs::read(dir.path().join(sub).join("dispersion_klein_gordon_dispersion.csv")).unwrap()
    };
    let a = read("a", None);
    assert_eq!(a, read("b", Some("11")));
    assert_ne!(a, read("c", Some("12")));
}

#[test]
fn snapshots_have_fixed_names_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "tiny.toml",
        "name = \"tiny\"\n[grid]\nx_min = 0.0\nx_max = 3.141592653589793\nn = 50\nboundary = \"dirichlet\"\n\
         [equation]\nfamily = \"schrodinger_td\"\npotential = { kind = \"infinite_well\" }\n\
         [initial]\nkind = \"eigenstates\"\nstates = [0]\n\
         [stepper]\ndt = 0.1\nt_end = 0.45\nsnapshot_stride = 2\n",
    );
    let out_dir = dir.path().join("out");
    assert!(run("evolve", &p, &out_dir).status.success());
    let files = listing(&out_dir);
    for step in [0, 2, 4, 5] {
        assert!(files.contains(&format!("tiny_{step}.csv")), "{files:?}");
    }
    assert!(!files.contains(&"tiny_1.csv".to_string()));
    assert!(!files.iter().any(|f| f.ends_with(".partial")));
    let snap = fs::read_to_string(out_dir.join("tiny_5.csv")).unwrap();
    assert_eq!(snap.lines().nth(2), Some("x,re,im,abs2"));
    assert_eq!(snap.lines().count(), 3 + 50);
}

#[test]
fn first_order_family_rejects_initial_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "v.toml",
        "name = \"v\"\n[grid]\nx_min = 0.0\nx_max = 1.0\nn = 50\nboundary = \"dirichlet\"\n\
         [equation]\nfamily = \"schrodinger_td\"\n\
         [initial]\nkind = \"gaussian\"\nx0 = 0.5\nsigma = 0.1\nvelocity = { kind = \"stationary\", omega = 1.0 }\n\
         [stepper]\ndt = 0.1\nt_end = 1.0\n",
    );
    let out = run("evolve", &p, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["detail"]["key"], "initial.velocity");
}
