use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bilinpdo"));
    c.env("BILINPDO_THREADS", "1");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn lp_check_passes_and_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lp-check", "n=2", "K=6", "points=500"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("PASS lp-check"));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "radius[1/length],partial_sum[1],residual[1],T[length],N[points/axis],truncation");
    assert_eq!(csv.lines().count(), 501);
}

#[test]
fn decompose_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["decompose-check", "j0=5", "rho=0", "N=256"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    for part in ["I0", "I1", "I2", "I3", "sum", "direct"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("{part},"))), "missing {part} in\n{csv}");
    }
}

#[test]
fn eps_sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sharpness", "family=eps_s12", "s1=0.25"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("family,eps,s1,"));
    assert_eq!(csv.lines().count(), 6);
    let svg = fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("slope = "));
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lp-check", "radius=3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key `radius`"), "{}", stderr(&o));
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn config_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# split sweep\nj_min = 1\nj_max = six\n").unwrap();
    let o = bin().args(["split-check", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3, column 9"), "{}", stderr(&o));

    fs::write(&cfg, "j_min 1\n").unwrap();
    let o = bin().args(["split-check", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1, column 1"), "{}", stderr(&o));
}

#[test]
fn missing_experiment_is_a_usage_error() {
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
}

#[test]
fn tolerance_failure_exits_2_with_offending_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["split-check", "debug_corrupt=true"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let s = stdout(&o);
    assert!(s.starts_with("FAIL split-check"));
    assert!(s.contains("offending row: j="), "{s}");
}

#[test]
fn selftest_field_core_passes() {
    let o = bin().args(["selftest", "--filter=field_core"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().next().unwrap().starts_with("PASS"));
}

#[test]
fn selftest_with_corrupt_partition_fails_the_split() {
    let o = bin().args(["selftest", "--filter=partitions", "--debug-corrupt-partition"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let s = stdout(&o);
    let split = s.lines().find(|l| l.contains("split")).unwrap();
    assert!(split.starts_with("FAIL"), "{s}");
}

#[test]
fn identical_runs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["uniform-check", "n=2", "points=300", "seed=7"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("results.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    run(&["uniform-check", "n=2", "points=300", "seed=8"], c.path());
    assert_ne!(read(a.path()), read(c.path()));
}
