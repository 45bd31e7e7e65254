use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fbsim_cli::{read_csv, write_csv, ResultRow};

fn fbsim(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fbsim"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("FBSIM_THREADS", n),
        None => cmd.env_remove("FBSIM_THREADS"),
    };
    cmd.output().expect("spawn fbsim")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn smoke_run_writes_parseable_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("results");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "scheme = zf\nnt = 4\nsnr_db = 10\ntfb = 100\ntrials = 1\nb_values = 4, 10, 20\n[output]\nname = smoke\ndir = {}\n",
            out_dir.display()
        ),
    );
    let out = fbsim(&["run", &cfg], None);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = read_csv(&out_dir.join("smoke.csv")).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.b).collect::<Vec<_>>(),
        vec![4, 10, 20]
    );
    assert_eq!(
        rows.iter().map(|r| r.users).collect::<Vec<_>>(),
        vec![25, 10, 5]
    );
    assert!(rows.iter().all(|r| r.trials == 1 && r.extra.is_some()));
    let svg = fs::read_to_string(out_dir.join("smoke.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn preset_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = fbsim(
        &["preset", "tab_intro_example", "--trials", "1", "--out", dir],
        None,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = read_csv(&tmp.path().join("tab_intro_example.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(tmp.path().join("tab_intro_example.svg").exists());
}

#[test]
fn csv_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("rows.csv");
    let rows = vec![
        ResultRow {
            scheme: "zf nt=4, 10dB".into(),
            nt: 4,
            snr_db: 10.0,
            tfb: 300,
            b: 20,
            users: 15,
            mean_rate: 12.231_994_812_345_678,
            std_error: 0.1 + 0.2,
            trials: 10_000,
            extra: Some(std::f64::consts::PI),
        },
        ResultRow {
            scheme: "pu2rc".into(),
            nt: 2,
            snr_db: -3.5,
            tfb: 50,
            b: 1,
            users: 50,
            mean_rate: 1e-300,
            std_error: 0.0,
            trials: 1,
            extra: None,
        },
    ];
    write_csv(&path, &rows).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);
}

#[test]
fn overrides_are_echoed_and_applied() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "scheme = subf\nnt = 4\nsnr_db = 10\ntfb = 100\ntrials = 50\nb_values = 10\n[output]\ndir = {}\n",
            tmp.path().display()
        ),
    );
    let out = fbsim(
        &["run", &cfg, "--snr-db", "5", "--trials=3", "--name", "ovr"],
        None,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("snr_db=5 ") && stdout.contains("trials=3 "),
        "{stdout}"
    );
    let rows = read_csv(&tmp.path().join("ovr.csv")).unwrap();
    assert_eq!(rows[0].snr_db, 5.0);
    assert_eq!(rows[0].trials, 3);
}

#[test]
fn explicit_rvq_beyond_capacity_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "scheme = zf\nnt = 4\nsnr_db = 10\ntfb = 300\nquantizer = rvq_explicit\nb_values = 30\n",
    );
    let out = fbsim(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rvq_statistical"), "{}", stderr(&out));
}

#[test]
fn config_errors_exit_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scheme = zf\nnt = 4\nsnr_db = ten\n");
    let out = fbsim(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exp.cfg:3") && stderr(&out).contains("snr_db"));

    let out = fbsim(&["preset", "fig99"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown preset"));

    let out = fbsim(
        &["preset", "tab_intro_example", "--trials", "1"],
        Some("zero"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out_dir = blocker.join("sub");
    let out = fbsim(
        &[
            "preset",
            "tab_intro_example",
            "--trials",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    let missing = tmp.path().join("missing.cfg");
    let out = fbsim(&["run", missing.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let dir = tmp.path().join(threads);
        let cfg = write_config(
            tmp.path(),
            &format!(
                "scheme = zf\nnt = 4\nsnr_db = 10\ntfb = 100\ntrials = 300\nseed = 7\n[output]\nname = t\ndir = {}\n",
                dir.display()
            ),
        );
        let out = fbsim(&["run", &cfg], Some(threads));
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(fs::read(dir.join("t.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
