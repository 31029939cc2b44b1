use std::fs;
use std::path::Path;
use std::process::Command;

use uuvnav::cli::{cmd_reproduce, cmd_run, cmd_validate_config, ConfigArgs, ReproduceArgs, RunArgs, ValidateArgs};
use uuvnav::config::ConfigFile;
use uuvnav::experiments::Experiment;

fn run_args(out: &Path, overrides: &[&str], seed: Option<u64>) -> RunArgs {
    RunArgs {
        config: ConfigArgs {
            config: None,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
        },
        seed,
        out: out.to_path_buf(),
        force: false,
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn run_writes_a_deterministic_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ov = ["experiment.duration=10"];
    cmd_run(&run_args(&a, &ov, Some(42))).unwrap();
    cmd_run(&run_args(&b, &ov, Some(42))).unwrap();
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "config.toml",
            "measurements.csv",
            "metrics.csv",
            "run_log.csv",
            "series_pitch.csv",
            "series_roll.csv",
            "series_x.csv",
            "series_y.csv",
            "series_yaw.csv",
            "series_z.csv",
        ]
    );
    assert_eq!(fa, fb);

    let log = fs::read_to_string(a.join("run_log.csv")).unwrap();
    let rows = log.lines().count() - 1;
    assert!((199..=201).contains(&rows), "{rows} rows");
}

#[test]
fn non_empty_output_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = run_args(tmp.path(), &["experiment.duration=1"], None);
    cmd_run(&args).unwrap();
    let err = cmd_run(&args).err().unwrap().to_string();
    assert!(err.contains("--force"), "{err}");
    args.force = true;
    cmd_run(&args).unwrap();
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = cmd_run(&run_args(&first, &["experiment.duration=5", "usbl.Stuck probability=0.2"], Some(7))).unwrap();

    let cfg_path = first.join("config.toml");
    let reread = ConfigFile::load(&cfg_path, &[]).unwrap();
    assert_eq!(reread, out.config);
    assert_eq!(reread.to_scenario(), out.config.to_scenario());

    let second = tmp.path().join("second");
    let args = RunArgs {
        config: ConfigArgs {
            config: Some(cfg_path),
            overrides: vec![],
        },
        seed: None,
        out: second.clone(),
        force: false,
    };
    cmd_run(&args).unwrap();
    assert_eq!(read_dir_sorted(&first), read_dir_sorted(&second));
}

#[test]
fn validate_config_reports_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, "[dvl]\n\"Noise sigma\" = -0.1\n").unwrap();
    let args = ValidateArgs {
        config: ConfigArgs {
            config: Some(path),
            overrides: vec![],
        },
    };
    let err = cmd_validate_config(&args).unwrap_err().to_string();
    assert!(err.contains("dvl.Noise sigma"), "{err}");
}

#[test]
fn reproduce_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ReproduceArgs {
        tables: vec![Experiment::T4],
        config: ConfigArgs {
            config: None,
            overrides: vec!["experiment.duration=20".into()],
        },
        seeds: Some(vec![1, 2]),
        seed: None,
        out: tmp.path().to_path_buf(),
        parallel: true,
        force: false,
    };
    let reports = cmd_reproduce(&args).unwrap();
    assert_eq!(reports.len(), 1);
    let dir = tmp.path().join("T4");
    let comparison = fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 1 + 2 * 2);
    let table = fs::read_to_string(dir.join("table.txt")).unwrap();
    assert!(table.contains("IMU only") && table.contains("30 sec"));
    assert!(tmp.path().join("config.toml").exists());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uuvnav"))
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--seed", "3", "--override", "experiment.duration=2", "--out"])
        .arg(tmp.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin()
        .args(["validate-config", "--override", "usbl.Noise sigma=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usbl.Noise sigma"));

    let out = bin()
        .args(["validate-config", "--override", "imu.bogus=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = bin().args(["validate-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn shipped_default_config_matches_built_in_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    assert_eq!(ConfigFile::load(&path, &[]).unwrap(), ConfigFile::default());
}
