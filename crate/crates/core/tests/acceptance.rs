//! Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use khflow::app::{self, RunOptions, GRID_FILE, HARNACK_FILE, MONITOR_FILE, SUMMARY_FILE};
use khflow::config::Config;
use khflow::output::{Summary, Value};
use khflow::selftest::{self, SuiteSizes};
use tempfile::TempDir;

const EX65_C_TOL: f64 = 1e-5;
const EX65_U_TOL: f64 = 1e-4;
const EX65_RUNTIME: Duration = Duration::from_secs(60);
const EX65_2D_C_TOL: f64 = 5e-3;
const ORACLE_TOL: f64 = 1e-4;
const ORACLE_2D_TOL: f64 = 5e-3;
const LINEAR_TOL: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-12;
const SUITE_RUNTIME: Duration = Duration::from_secs(10);
const GRADIENT_TOL: f64 = 1e-6;
const CONCAVITY_SLACK: f64 = 1e-10;
const MONITOR_SLACK: f64 = 1e-6;
const OSC_BUDGET: f64 = 0.1;
const MEAN_DRIFT_TOL: f64 = 1e-10;
const DECAY_REL_TOL: f64 = 0.02;
const QUADRATURE_TOL: f64 = 1e-3;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str, set: &[&str]) -> Config {
    let set: Vec<String> = set.iter().map(|s| s.to_string()).collect();
    Config::load(&configs().join(name), &set).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Run {
    summary: Summary,
    dir: TempDir,
    elapsed: Duration,
}

impl Run {
    fn float(&self, section: &str, key: &str) -> f64 {
        match self.summary.get(section, key) {
            Some(Value::Float(v)) => *v,
            other => panic!("{section}.{key}: {other:?}"),
        }
    }

    fn int(&self, section: &str, key: &str) -> i64 {
        match self.summary.get(section, key) {
            Some(Value::Int(v)) => *v,
            other => panic!("{section}.{key}: {other:?}"),
        }
    }

    fn boolean(&self, section: &str, key: &str) -> bool {
        match self.summary.get(section, key) {
            Some(Value::Bool(v)) => *v,
            other => panic!("{section}.{key}: {other:?}"),
        }
    }

    fn csv(&self, name: &str) -> Vec<Vec<f64>> {
        let text = std::fs::read_to_string(self.dir.path().join(name)).expect("csv written");
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|f| f.parse().expect("number")).collect())
            .collect()
    }
}

type Runner = fn(&Config, &RunOptions) -> app::Result<app::RunOutcome>;

fn run(f: Runner, cfg: &Config) -> Result<Run, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let out = f(cfg, &RunOptions::new(dir.path())).map_err(|e| e.to_string())?;
    Ok(Run {
        summary: out.summary,
        dir,
        elapsed: t0.elapsed(),
    })
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn failed(e: String) -> Verdict {
    verdict(false, format!("error: {e}"))
}

/// `2∫₀¹ s e^{s²} ds` by composite Simpson on 20000 panels.
fn oracle_c() -> f64 {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |s: f64| 2.0 * s * (s * s).exp();
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    -(acc * h / 3.0).ln()
}

fn criterion_1(exact_disk: &Result<Run, String>) -> Verdict {
    let r = match exact_disk {
        Ok(r) => r,
        Err(e) => return failed(e.clone()),
    };
    let c = r.float("result", "c");
    let rows = r.csv(GRID_FILE);
    let r0 = rows[r.int("result", "anchor") as usize][0];
    let err = rows
        .iter()
        .map(|row| (row[2] - (0.5 * row[0] * row[0] - 0.5 * r0 * r0)).abs())
        .fold(0.0, f64::max);
    let two_d = run(app::solve, &config("disk_exact_2d.toml", &[]));
    let (c2, ok2) = match &two_d {
        Ok(t) => (t.float("result", "c"), t.float("result", "c").abs() <= EX65_2D_C_TOL),
        Err(e) => return failed(e.clone()),
    };
    verdict(
        c.abs() <= EX65_C_TOL && err <= EX65_U_TOL && r.elapsed <= EX65_RUNTIME && ok2,
        format!(
            "radial Nr=512: |c|={:.3e} (<= {EX65_C_TOL:e}), |u - exact|={err:.3e} (<= {EX65_U_TOL:e}), {:.2?} (<= {EX65_RUNTIME:?}); 2D 64x128: |c|={:.3e} (<= {EX65_2D_C_TOL:e})",
            c.abs(),
            r.elapsed,
            c2.abs()
        ),
    )
}

fn criterion_2() -> Verdict {
    let oracle = oracle_c();
    let radial = match run(app::solve, &config("psi_r2_radial.toml", &[])) {
        Ok(r) => r.float("result", "c"),
        Err(e) => return failed(e),
    };
    let two_d = match run(app::solve, &config("psi_r2_2d.toml", &[])) {
        Ok(r) => r.float("result", "c"),
        Err(e) => return failed(e),
    };
    let e1 = (radial - oracle).abs();
    let e2 = (two_d - radial).abs();
    verdict(
        e1 <= ORACLE_TOL && e2 <= ORACLE_2D_TOL,
        format!(
            "oracle {oracle:.10}: radial {radial:.10} (err {e1:.3e} <= {ORACLE_TOL:e}); 2D {two_d:.10} (vs radial {e2:.3e} <= {ORACLE_2D_TOL:e})"
        ),
    )
}

fn criterion_3() -> Verdict {
    // ψ = x on the unit square: ∫ψ = 1/2; φ = 1 on the east side adds 1.
    let (want_a, want_b) = (-0.5, -1.5);
    let a = match run(app::solve, &config("linear_rect.toml", &[])) {
        Ok(r) => r.float("result", "c"),
        Err(e) => return failed(e),
    };
    let b = match run(app::solve, &config("linear_rect_east.toml", &[])) {
        Ok(r) => r.float("result", "c"),
        Err(e) => return failed(e),
    };
    let (ea, eb) = ((a - want_a).abs(), (b - want_b).abs());
    verdict(
        ea <= LINEAR_TOL && eb <= LINEAR_TOL,
        format!(
            "phi=0: c={a:.10} (err {ea:.3e}); phi_east=1: c={b:.10} vs {want_b} (err {eb:.3e}); tol {LINEAR_TOL:e}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(42);
    let t0 = Instant::now();
    let id = selftest::identities(&mut rng, 10_000);
    let cone = selftest::cone(&mut rng, 10_000);
    let dt = t0.elapsed();
    verdict(
        id.passes() && id.worst <= IDENTITY_TOL && cone.passes() && dt <= SUITE_RUNTIME,
        format!(
            "identities 1e4: worst {:.3e}, failures {}; cone 1e4: worst {:.3e}, failures {}; {dt:.2?}",
            id.worst, id.failures, cone.worst, cone.failures
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(42);
    let r = selftest::mixed_bound(&mut rng, 10_000);
    verdict(
        r.samples == 10_000 && r.failures == 0,
        format!(
            "{} samples, {} failures, worst (rhs - lhs)/sum_f = {:.3e}",
            r.samples, r.failures, r.worst
        ),
    )
}

fn criterion_6() -> Verdict {
    let rep = selftest::run(42, SuiteSizes::default());
    let g = rep.suite("gradient").expect("suite");
    let c = rep.suite("concavity").expect("suite");
    let e = rep.suite("ellipticity").expect("suite");
    verdict(
        g.samples == 100 && g.worst <= GRADIENT_TOL && c.samples == 1000 && c.worst <= CONCAVITY_SLACK && e.passes(),
        format!(
            "gradient worst {:.3e} (<= {GRADIENT_TOL:e}); concavity worst {:.3e} (<= {CONCAVITY_SLACK:e}); min F^ij eigenvalue {:.3e}",
            g.worst, c.worst, e.worst
        ),
    )
}

fn criterion_7() -> Verdict {
    let steady = match run(app::solve, &config("perturbed.toml", &["tolerances.monitor_every=1"])) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    // t, sup_ut, inf_ut, osc_u, sup_grad, margin
    let rows = steady.csv(MONITOR_FILE);
    let mut sup_up: f64 = 0.0;
    let mut inf_down: f64 = 0.0;
    for w in rows.windows(2) {
        sup_up = sup_up.max(w[1][1] - w[0][1]);
        inf_down = inf_down.max(w[0][2] - w[1][2]);
    }
    let osc0 = rows[0][3];
    let osc_max = rows.iter().map(|r| r[3]).fold(f64::NEG_INFINITY, f64::max);
    let steps = steady.int("result", "steps") as usize;

    let rate = match run(app::solve, &config("psi_rate.toml", &["tolerances.monitor_every=1"])) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let rows_r = rate.csv(MONITOR_FILE);
    let ut0 = rows_r[0][1].abs().max(rows_r[0][2].abs());
    let excess = rows_r
        .iter()
        .map(|r| r[1].abs().max(r[2].abs()) - (ut0 + r[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        rows.len() == steps + 1
            && sup_up <= MONITOR_SLACK
            && inf_down <= MONITOR_SLACK
            && osc_max <= osc0 + OSC_BUDGET
            && excess <= MONITOR_SLACK,
        format!(
            "{} steps: sup_ut rise {sup_up:.3e}, inf_ut drop {inf_down:.3e} (<= {MONITOR_SLACK:e}); max osc {osc_max:.6} <= {:.6}; rate 1: max |u_t| - (sup|u_t(0)| + t) = {excess:.3e}",
            steps,
            osc0 + OSC_BUDGET
        ),
    )
}

fn criterion_8() -> Verdict {
    let r = match run(app::harnack, &config("harnack_rect.toml", &[])) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let drift = r.float("harnack", "mean_drift");
    let min_value = r.float("harnack", "min_value");
    let gamma = |t1: f64, t2: f64| -> f64 {
        let get = |k: &str| match r.summary.get("harnack", k) {
            Some(Value::Floats(v)) => v.clone(),
            other => panic!("{k}: {other:?}"),
        };
        let (a, b, g) = (get("gamma_t1"), get("gamma_t2"), get("gamma"));
        (0..g.len())
            .find(|&i| a[i] == t1 && b[i] == t2)
            .map(|i| g[i])
            .expect("pair")
    };
    let (g1, g2) = (gamma(0.1, 0.2), gamma(0.5, 0.6));
    // t, sup, inf, mean, amplitude
    let decay = r
        .csv(HARNACK_FILE)
        .iter()
        .map(|row| (row[4] / (-std::f64::consts::PI.powi(2) * row[0]).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        drift <= MEAN_DRIFT_TOL && g2 < g1 && min_value >= 0.0 && decay <= DECAY_REL_TOL,
        format!(
            "mean drift {drift:.3e} (<= {MEAN_DRIFT_TOL:e}); gamma(0.5,0.6)={g2:.6} < gamma(0.1,0.2)={g1:.6}; min u {min_value:.3e}; decay mismatch {:.3}% (<= {}%)",
            100.0 * decay,
            100.0 * DECAY_REL_TOL
        ),
    )
}

fn criterion_9(exact_disk: &Result<Run, String>) -> Verdict {
    let r = match exact_disk {
        Ok(r) => r,
        Err(e) => return failed(e.clone()),
    };
    let pi = std::f64::consts::PI;
    let int_h = r.float("compat", "int_h");
    let rhs = r.float("compat", "maclaurin_rhs");
    let obstruction = match run(app::check_compat, &config("compat_obstruction.toml", &[])) {
        Ok(o) => o.boolean("compat", "obstruction"),
        Err(e) => return failed(e),
    };
    verdict(
        (int_h - pi).abs() <= QUADRATURE_TOL && (rhs - pi).abs() <= QUADRATURE_TOL && obstruction,
        format!(
            "int h = {int_h:.12}, rhs = {rhs:.12} (pi within {QUADRATURE_TOL:e}); phi=+1 obstruction flagged: {obstruction}"
        ),
    )
}

fn same_bytes(a: &Run, b: &Run, files: &[&str]) -> Result<(), String> {
    for f in files {
        let x = std::fs::read(a.dir.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.dir.path().join(f)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{f} differs"));
        }
    }
    Ok(())
}

fn criterion_10() -> Verdict {
    let fixtures: [(&str, Runner, &[&str]); 4] = [
        ("perturbed.toml", app::solve, &[SUMMARY_FILE, MONITOR_FILE, GRID_FILE]),
        (
            "disk_exact_2d.toml",
            app::solve,
            &[SUMMARY_FILE, MONITOR_FILE, GRID_FILE],
        ),
        ("compat_obstruction.toml", app::check_compat, &[SUMMARY_FILE]),
        ("disk_exact.toml", app::check_sub, &[SUMMARY_FILE, "subsolution.csv"]),
    ];
    let mut checked = Vec::new();
    for (name, f, files) in fixtures {
        let cfg = config(name, &[]);
        let (a, b) = match (run(f, &cfg), run(f, &cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        if let Err(e) = same_bytes(&a, &b, files) {
            return verdict(false, format!("{name}: {e}"));
        }
        checked.push(name);
    }
    let s1 = selftest::run(42, SuiteSizes::default());
    let s2 = selftest::run(42, SuiteSizes::default());
    let st = app::selftest_summary(&s1).to_toml() == app::selftest_summary(&s2).to_toml();
    verdict(
        st,
        format!(
            "byte-identical outputs for {} and the selftest summary",
            checked.join(", ")
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let exact_disk = run(app::solve, &config("disk_exact.toml", &[]));
    let results: Vec<(&str, Verdict)> = vec![
        ("exact disk solution", criterion_1(&exact_disk)),
        ("radial Monge-Ampere oracle", criterion_2()),
        ("linear constant formula", criterion_3()),
        ("sigma_k identity suite", criterion_4()),
        ("two-sided eigenvalue bound suite", criterion_5()),
        ("operator gradient and concavity", criterion_6()),
        ("monitor laws", criterion_7()),
        ("harnack probe", criterion_8()),
        ("compatibility checker", criterion_9(&exact_disk)),
        ("determinism", criterion_10()),
    ];
    let mut failures = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!(
            "{} {:>2} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
        if !v.pass {
            failures += 1;
        }
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        results.len() - failures,
        results.len(),
        t0.elapsed()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
