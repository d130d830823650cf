use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "
[scenario]
kind = cdma
users = 3
ebn0_db = 8
[algorithms]
full = full
mswf = mswf d=3
[run]
symbols = 120
training = 60
runs = 3
bin = 30
";

fn rrdsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrdsp"))
        .args(args)
        .env_remove("RRDSP_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.cfg",
        &SMALL.replace("users = 3", "userz = 3"),
    );
    let out = dir.path().join("o.csv");
    let o = rrdsp(&[
        "ber-vs-symbols",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario.userz"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    let o = rrdsp(&[
        "ber-vs-symbols",
        "--config",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("o.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.cfg"));
}

#[test]
fn command_and_sweep_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", SMALL);
    let o = rrdsp(&[
        "ber-vs-snr",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.sweep"));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", SMALL);
    let out = dir.path().join("missing-dir").join("o.csv");
    let o = rrdsp(&[
        "ber-vs-symbols",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes_and_seed_override_changes_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", SMALL);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "ber-vs-symbols",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = rrdsp(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", &["--workers", "1"]);
    let b = run("b.csv", &["--workers", "3"]);
    assert_eq!(a, b);
    assert!(a.starts_with("axis,full,mswf\n"));
    // two bins of 30 symbols after the 60 training symbols
    assert_eq!(a.lines().count(), 1 + 2);
    let c = run("c.csv", &["--seed", "99"]);
    assert_ne!(a, c);
}

#[test]
fn order_sweep_prints_selected_orders() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        SMALL.replace("training = 60", "training = 120") + "orders = 1,2,3\norder_window = 50\n";
    let cfg = write(dir.path(), "o.cfg", &text);
    let out = dir.path().join("o.csv");
    let o = rrdsp(&[
        "order-sweep",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("mswf: D = "), "{stdout}");
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 4);
}

#[test]
fn sinr_command_writes_the_bound_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.cfg",
        "[scenario]\nkind = ula\nsensors = 8\n[algorithms]\nfull = full\n[run]\nsnapshots = 40\nruns = 2\n",
    );
    let out = dir.path().join("s.csv");
    let o = rrdsp(&[
        "sinr-vs-snapshots",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("axis,full,bound\n"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn selftest_passes() {
    let o = rrdsp(&["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    for suite in ["numerics", "estimators", "dimred", "sysmodels", "harness"] {
        assert!(stdout.contains(suite), "{stdout}");
    }
    assert!(!stdout.contains("FAIL"));
}
