use std::path::PathBuf;

use khflow::app::{self, AppError, RunOptions};
use khflow::config::{Config, ConfigError};
use khflow::output::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str, sets: &[&str]) -> Config {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    Config::load(&configs().join(name), &sets).unwrap()
}

#[test]
fn every_shipped_config_round_trips() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let cfg = Config::load(&path, &[]).unwrap();
        let again = Config::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        cfg.problem_spec().unwrap();
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn overrides_and_rejections() {
    let cfg = load(
        "disk_exact.toml",
        &["problem.domain.nr=64", "tolerances.max_steps=7", "problem.psi=r^2"],
    );
    assert_eq!(cfg.tolerances.max_steps, 7);
    assert_eq!(cfg.problem.psi, "r^2");
    assert_eq!(cfg.seed, 42);

    let text = "[problem]\ndomain = { kind = \"disk\", nr = 4, ntheta = 8 }\nbogus = 1\n";
    assert!(matches!(Config::from_toml(text), Err(ConfigError::Parse(_))));
    assert!(matches!(
        Config::from_toml_with(
            "[problem]\ndomain = { kind = \"disk\", nr = 4, ntheta = 8 }\n",
            &["nonsense".into()]
        ),
        Err(ConfigError::Override(_))
    ));
    assert!(matches!(
        Config::load(&configs().join("disk_exact.toml"), &["problem.u0=1 +".into()]),
        Err(ConfigError::Expr { .. })
    ));
    assert!(matches!(
        Config::load(&configs().join("missing.toml"), &[]),
        Err(ConfigError::Io { .. })
    ));
}

#[test]
fn solve_writes_summary_monitor_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("psi_r2_radial.toml", &["problem.domain.nr=32"]);
    let out = app::solve(&cfg, &RunOptions::new(dir.path())).unwrap();
    let Some(Value::Float(c)) = out.summary.get("result", "c") else {
        panic!("no c");
    };
    assert!((c + (std::f64::consts::E - 1.0).ln()).abs() < 5e-3, "{c}");
    for f in [app::SUMMARY_FILE, app::MONITOR_FILE, app::GRID_FILE, app::TIMING_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let text = std::fs::read_to_string(dir.path().join(app::SUMMARY_FILE)).unwrap();
    assert_eq!(text, out.summary.to_toml());
    assert!(text.parse::<toml::Table>().is_ok());
}

#[test]
fn linear_solve_reports_the_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("linear_rect.toml", &["problem.domain.nx=8", "problem.domain.ny=8"]);
    let out = app::solve(&cfg, &RunOptions::new(dir.path())).unwrap();
    let Some(Value::Float(err)) = out.summary.get("linear", "c_error") else {
        panic!("no linear section");
    };
    assert!(err.abs() < 1e-4, "{err}");
}

#[test]
fn subcommands_on_shipped_configs() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions::new(dir.path());
    let cfg = load("disk_exact.toml", &["problem.domain.nr=32"]);
    let sub = app::check_sub(&cfg, &opts).unwrap();
    assert_eq!(sub.summary.get("subsolution", "verdict"), Some(&Value::Bool(true)));

    let obs = app::check_compat(&load("compat_obstruction.toml", &[]), &opts).unwrap();
    assert_eq!(obs.summary.get("compat", "obstruction"), Some(&Value::Bool(true)));
    let ok = app::check_compat(&load("compat_disk_exact.toml", &[]), &opts).unwrap();
    assert_eq!(ok.summary.get("compat", "obstruction"), Some(&Value::Bool(false)));

    assert!(matches!(
        app::harnack(&cfg, &opts),
        Err(AppError::MissingSection("harnack"))
    ));
    assert!(matches!(
        app::check_compat(&cfg, &opts),
        Err(AppError::MissingSection("compat"))
    ));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions::new(dir.path());
    let cfg = load(
        "psi_r2_radial.toml",
        &["problem.domain.nr=16", "tolerances.max_steps=1"],
    );
    let e = app::solve(&cfg, &opts).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let cfg = load("disk_exact.toml", &["problem.domain.nr=16", "problem.u0=-0.5*r^2"]);
    assert_eq!(app::solve(&cfg, &opts).unwrap_err().exit_code(), 1);
}

#[test]
fn sigma_text_lists_value_and_gradient() {
    let text = app::sigma_text(&[1.0, 2.0, 3.0], 2).unwrap();
    assert!(text.starts_with("sigma = 11\ngrad = (5, 4, 3)\n"), "{text}");
    assert!(app::sigma_text(&[1.0], 2).is_err());
}
