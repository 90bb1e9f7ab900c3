use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nanomag(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanomag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_hash(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix("# manifest_sha256: "))
        .expect("hash header")
        .to_string()
}

#[test]
fn every_command_writes_stamped_tables() {
    let cases: &[(&str, &[&str])] = &[
        ("modes", &[]),
        ("spectrum", &["--f_points=400"]),
        ("fieldmap", &["--H0_points=5", "--w_points=101"]),
        ("decay", &["--radii_nm=30", "--samples=2000"]),
        ("transfer", &["--samples=4000"]),
        ("coupling-sweep", &["--sweep_R_points=5"]),
    ];
    for (cmd, extra) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec![*cmd];
        args.extend_from_slice(extra);
        let out = nanomag(&args, dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let manifest = json(&dir.path().join("manifest.json"));
        let hash = manifest["config_sha256"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        let csvs: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        assert!(!csvs.is_empty(), "{cmd} wrote no tables");
        for p in csvs {
            assert_eq!(csv_hash(&p), hash, "{}", p.display());
        }
    }
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nanomag(&["modes", "--R_mn=30"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("R_mn") && stderr.contains("known keys"));
    let err = json(&dir.path().join("error.json"));
    assert_eq!(err["stage"], "config");
    assert_eq!(err["key"], "R_mn");
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn config_file_errors_carry_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sphere\nR_nm = 30\n\nR_nm = 40\n").unwrap();
    let out = nanomag(&["modes", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let err = json(&dir.path().join("o/error.json"));
    assert_eq!(err["key"], "R_nm");
    assert_eq!(err["line"], 4);

    fs::write(&cfg, "a_over_R = 1.2\na_nm = 40\n").unwrap();
    let out = nanomag(&["modes", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, "R_nm = -3\n").unwrap();
    let out = nanomag(&["modes", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R_nm"));
}

#[test]
fn numerical_failure_exits_3_and_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = nanomag(&["modes", "--R_nm=1e300"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = json(&dir.path().join("error.json"));
    assert_eq!(err["stage"], "modes");
    assert_eq!(err["exit_code"], 3);
}

#[test]
fn overrides_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "R_nm = 50\na_over_R = 1.5\n").unwrap();
    let out = nanomag(
        &["modes", "--config", cfg.to_str().unwrap(), "--R_nm", "70", "--a_nm=100"],
        &dir.path().join("o"),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&dir.path().join("o/manifest.json"));
    assert_eq!(m["config"]["R_nm"], "70");
    assert_eq!(m["config"]["a_nm"], "100");
    assert!(m["config"].get("a_over_R").is_none());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = nanomag(
            &["decay", "--radii_nm=30,50,70", "--samples=2000", "--solver=both", "--threads", threads],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let a = run("1");
    assert_eq!(a.len(), 4);
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
}

#[test]
fn json_format_mirrors_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = nanomag(&["modes", "--format", "json"], dir.path());
    assert!(out.status.success());
    let t = json(&dir.path().join("modes.json"));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(t["manifest_sha256"], m["config_sha256"]);
    assert_eq!(m["format"], "json");
    assert_eq!(t["columns"].as_array().unwrap().len(), t["rows"][0].as_array().unwrap().len());
}
