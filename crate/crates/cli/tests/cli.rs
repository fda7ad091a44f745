use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn khflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khflow")).args(args).output().unwrap()
}

fn run(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = config(cfg);
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    khflow(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sigma_prints_value_gradient_and_cone() {
    let o = khflow(&["sigma", "--lambda", "1,2,3", "--k", "2"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).starts_with("sigma = 11\ngrad = (5, 4, 3)\nin_gamma_k = true\n"),
        "{}",
        stdout(&o)
    );
    let o = khflow(&["sigma", "--lambda", "2,-1", "--k", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("in_gamma_k = false"));
    assert_eq!(code(&khflow(&["sigma", "--lambda", "1", "--k", "3"])), 1);
}

#[test]
fn solve_example_succeeds_and_prints_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "disk_exact.toml", dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let printed: toml::Table = stdout(&o).parse().unwrap();
    let c = printed["result"]["c"].as_float().unwrap();
    assert!(c.abs() < 1e-5, "{c}");
    let written = std::fs::read_to_string(dir.path().join("summary.toml")).unwrap();
    assert_eq!(written, stdout(&o));
    let monitor = std::fs::read_to_string(dir.path().join("monitor.csv")).unwrap();
    assert_eq!(monitor.lines().next(), Some("t,sup_ut,inf_ut,osc_u,sup_grad,margin"));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[problem\n").unwrap();
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(
        &unknown,
        "[problem]\ndomain = { kind = \"disk\", nr = 4, ntheta = 8 }\ncolour = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for path in [bad.to_str().unwrap(), unknown.to_str().unwrap(), "/nonexistent/x.toml"] {
        let o = khflow(&["solve", "--config", path, "--out", out]);
        assert_eq!(code(&o), 1, "{path}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
    assert_eq!(code(&khflow(&["solve"])), 1);
    assert_eq!(code(&khflow(&["frobnicate"])), 1);
    assert_eq!(code(&khflow(&["--help"])), 0);
}

#[test]
fn non_admissible_start_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "solve",
        "disk_exact.toml",
        dir.path(),
        &["--set", "problem.u0=-0.5*r^2"],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissible"));
}

#[test]
fn step_budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "solve",
        "psi_r2_radial.toml",
        dir.path(),
        &["--set", "tolerances.max_steps=1"],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn obstruction_is_a_result_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("check-compat", "compat_obstruction.toml", dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let t: toml::Table = stdout(&o).parse().unwrap();
    assert_eq!(t["compat"]["obstruction"].as_bool(), Some(true));
}

#[test]
fn check_sub_and_harnack_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "check-sub",
        "disk_exact.toml",
        dir.path(),
        &["--set", "problem.domain.nr=32"],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("verdict = true"));
    let o = run(
        "harnack",
        "harnack_rect.toml",
        dir.path(),
        &["--set", "problem.domain.nx=16", "--set", "problem.domain.ny=16"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("harnack.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,sup,inf,mean,amplitude"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn selftest_passes_with_the_default_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = khflow(&["selftest", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t: toml::Table = stdout(&o).parse().unwrap();
    assert_eq!(t["selftest"]["passes"].as_bool(), Some(true));
    assert_eq!(t["run"]["seed"].as_integer(), Some(42));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sets = ["--set", "problem.domain.nr=16", "--set", "problem.domain.ntheta=32"];
    assert_eq!(code(&run("solve", "psi_r2_2d.toml", a.path(), &sets)), 0);
    let mut seq = sets.to_vec();
    seq.push("--sequential");
    assert_eq!(code(&run("solve", "psi_r2_2d.toml", b.path(), &seq)), 0);
    for f in ["summary.toml", "monitor.csv", "grid.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}
