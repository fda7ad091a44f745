//! Subcommand orchestration: builds problems from a [`Config`], runs them and
//! writes the CSV and summary files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::config::{expr, Config, ConfigError, Solver};
use crate::exec::Exec;
use crate::flow::{
    default_slack, monitor_checks, radial_reduce, run_for, run_to_convergence, Anchor, FlowError, FlowState, Mode,
    MonitorReport, MonitorSample, Problem, ProblemSpec,
};
use crate::hessfield::{
    build_domain, integrate_boundary, integrate_volume, sample_field, write_grid_csv, GridError, GridFunction,
};
use crate::output::{fmt17, write_file, write_monitor_csv, Summary, Value};
use crate::selftest::{self, SelftestReport, SuiteSizes};
use crate::symkernel::{grad_sigma, in_gamma_k, sigma, ConeOrder, EigenTuple, SymError};
use crate::verify::{
    check_c_subsolution, check_compatibility, effective_rhs, harnack_probe, CompatReport, Inequality, VerifyError,
};

pub const SUMMARY_FILE: &str = "summary.toml";
pub const MONITOR_FILE: &str = "monitor.csv";
pub const GRID_FILE: &str = "grid.csv";
pub const TIMING_FILE: &str = "timing.toml";
pub const HARNACK_FILE: &str = "harnack.csv";
pub const SUBSOLUTION_FILE: &str = "subsolution.csv";

const DEFAULT_COMPAT_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config has no [{0}] table")]
    MissingSection(&'static str),
    #[error("selftest failed: {0}")]
    SelftestFailed(String),
}

impl AppError {
    /// 2 for non-convergence, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Flow(FlowError::NotConverged { .. })
            | AppError::Verify(VerifyError::Flow(FlowError::NotConverged { .. })) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub out: PathBuf,
    pub exec: Exec,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_file(self.dir, name, bytes).map_err(|source| AppError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn grid(&mut self, name: &str, u: &GridFunction) -> Result<()> {
        let mut buf = Vec::new();
        write_grid_csv(u, &mut buf).expect("writing to memory");
        self.put(name, &buf)
    }

    fn finish(mut self, summary: Summary, started: Instant) -> Result<RunOutcome> {
        self.put(SUMMARY_FILE, summary.to_toml().as_bytes())?;
        let timing = format!("wall_seconds = {}\n", fmt17(started.elapsed().as_secs_f64()));
        self.put(TIMING_FILE, timing.as_bytes())?;
        Ok(RunOutcome {
            summary,
            files: self.files,
        })
    }
}

fn run_header(s: &mut Summary, command: &str, cfg: &Config, spec: &ProblemSpec) {
    s.section("run")
        .put("command", command)
        .put("domain", spec.domain.name())
        .put(
            "solver",
            match cfg.problem.solver {
                Solver::Grid => "grid",
                Solver::Radial => "radial",
            },
        )
        .put(
            "mode",
            match spec.mode {
                Mode::Hessian => "hessian",
                Mode::Linear => "linear",
            },
        )
        .put("k", spec.k.get())
        .put("seed", cfg.seed);
}

fn put_monitor(s: &mut Summary, m: &MonitorReport) {
    s.section("monitor")
        .put("samples", m.samples)
        .put("slack", m.slack)
        .put(
            "monotone",
            match m.monotone {
                Some(b) => Value::Bool(b),
                None => Value::Str("not-applicable".into()),
            },
        )
        .put("sup_ut_increase", m.sup_ut_increase)
        .put("inf_ut_decrease", m.inf_ut_decrease)
        .put("rate_excess", m.rate_excess)
        .put("rate_bound", m.rate_bound)
        .put("osc_growth", m.osc_growth)
        .put("osc_budget", m.osc_budget)
        .put("osc_bound", m.osc_bound)
        .put("osc_final_rate", m.osc_final_rate)
        .put("c0_excess", m.c0_excess)
        .put("c0_bound", m.c0_bound)
        .put("passes", m.passes());
}

fn put_inequality(s: &mut Summary, prefix: &str, q: &Inequality) {
    s.put(&format!("{prefix}_lhs"), q.lhs)
        .put(&format!("{prefix}_rhs"), q.rhs)
        .put(&format!("{prefix}_margin"), q.margin)
        .put(&format!("{prefix}_pass"), q.pass);
}

fn put_compat(s: &mut Summary, r: &CompatReport) {
    s.section("compat")
        .put("n", r.n)
        .put("k", r.k)
        .put("c_nk", r.c_nk)
        .put("volume", r.volume)
        .put("int_phi", r.int_phi)
        .put("int_tr_chi", r.int_tr_chi)
        .put("int_h", r.int_h)
        .put("tol", r.tol);
    put_inequality(s, "flux", &r.chi_only);
    if let Some(v) = &r.with_reference {
        put_inequality(s, "reference_flux", &v.ineq);
        s.put("stokes_discrepancy", v.stokes_discrepancy);
    }
    put_inequality(s, "maclaurin", &r.maclaurin);
    s.put("obstruction", r.obstruction);
}

fn monitor_report(history: &[MonitorSample], rate: f64, cfg: &Config) -> MonitorReport {
    monitor_checks(history, rate, default_slack(history), cfg.tolerances.osc_budget)
}

/// `−(∫ψ dV + ∫φ dS)/|M|`, the limiting constant of the heat-type flow.
pub fn linear_constant(spec: &ProblemSpec) -> Result<f64> {
    let d = build_domain(spec.domain)?;
    let psi = sample_field(&spec.psi_x, &d)?;
    let phi = spec.phi.sample(&d)?;
    Ok(-(integrate_volume(&psi) + integrate_boundary(&phi)) / d.volume())
}

fn has_identity_coeffs(spec: &ProblemSpec) -> bool {
    let v = crate::expr::Vars::cartesian(0.0, 0.0);
    [(&spec.coeffs.xx, 1.0), (&spec.coeffs.xy, 0.0), (&spec.coeffs.yy, 1.0)]
        .iter()
        .all(|(e, want)| e.is_constant() && e.eval(&v).ok() == Some(*want))
}

fn flow_spec(cfg: &Config) -> Result<ProblemSpec> {
    let spec = cfg.problem_spec()?;
    Ok(match cfg.problem.solver {
        Solver::Grid => spec,
        Solver::Radial => radial_reduce(&spec)?,
    })
}

/// Runs the flow to convergence, or to `tolerances.t_end` when set.
pub fn solve(cfg: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let spec = flow_spec(cfg)?;
    let p = Problem::with_exec(spec.clone(), opts.exec)?;
    let mut s = Summary::new();
    run_header(&mut s, "solve", cfg, &spec);
    let mut w = Writer::new(&opts.out);

    if let Some(t_end) = cfg.tolerances.t_end {
        let mut st = FlowState::new(&p)?;
        run_for(&mut st, &p, t_end)?;
        let (residual, mean) = st.residual(&p);
        s.section("result")
            .put("t", st.t)
            .put("steps", st.step)
            .put("mean_ut", mean)
            .put("residual", residual)
            .put("sup_ut", st.sup_ut)
            .put("inf_ut", st.inf_ut)
            .put("max_abs_ut", st.max_abs_ut)
            .put("margin_final", st.margin);
        put_monitor(&mut s, &monitor_report(&st.history, spec.psi_t_rate, cfg));
        let mut buf = Vec::new();
        write_monitor_csv(&st.history, &mut buf).expect("writing to memory");
        w.put(MONITOR_FILE, &buf)?;
        w.grid(GRID_FILE, &st.u)?;
        return w.finish(s, started);
    }

    let rep = run_to_convergence(&p, Anchor::Centroid)?;
    s.section("result")
        .put("c", rep.c)
        .put("steps", rep.steps)
        .put("t", rep.t)
        .put("residual", rep.residual)
        .put("posteriori", rep.posteriori)
        .put("tol_c", p.tol_c())
        .put("anchor", rep.anchor)
        .put("margin_min", rep.margin_min)
        .put("margin_final", rep.margin_final);
    put_monitor(&mut s, &monitor_report(&rep.history, 0.0, cfg));

    let d = rep.u.domain();
    match spec.mode {
        Mode::Hessian => {
            let psi = sample_field(&spec.psi_x, d)?;
            let phi = spec.phi.sample(d)?;
            let h = effective_rhs(&psi, rep.c, spec.k);
            let tol = cfg.compat.as_ref().map_or(DEFAULT_COMPAT_TOL, |c| c.tol);
            let compat = check_compatibility(&h, &spec.chi, &phi, spec.k, Some(&rep.u), tol)?;
            put_compat(&mut s, &compat);
        }
        Mode::Linear if has_identity_coeffs(&spec) => {
            let formula = linear_constant(&spec)?;
            s.section("linear")
                .put("c_formula", formula)
                .put("c_error", rep.c - formula);
        }
        Mode::Linear => {}
    }

    let mut buf = Vec::new();
    write_monitor_csv(&rep.history, &mut buf).expect("writing to memory");
    w.put(MONITOR_FILE, &buf)?;
    w.grid(GRID_FILE, &rep.u_normalized)?;
    w.finish(s, started)
}

/// Probes `[subsolution].ubar` against the level `ψ + [subsolution].level`.
pub fn check_sub(cfg: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let sub = cfg
        .subsolution
        .as_ref()
        .ok_or(AppError::MissingSection("subsolution"))?;
    let spec = cfg.problem_spec()?;
    let ubar = expr("subsolution.ubar", &sub.ubar)?;
    let d = build_domain(spec.domain)?;
    let mut level = sample_field(&spec.psi_x, &d)?;
    level.add_constant(sub.level);
    let rep = check_c_subsolution(&ubar, &spec, &level)?;

    let mut s = Summary::new();
    run_header(&mut s, "check-sub", cfg, &spec);
    s.section("subsolution")
        .put("verdict", rep.verdict)
        .put("nodes", rep.margins.len())
        .put("admissible_nodes", rep.admissible.iter().filter(|b| **b).count())
        .put("unbounded_ray_nodes", rep.rays_unbounded.iter().filter(|b| **b).count())
        .put("min_margin", rep.min_margin)
        .put(
            "min_ray_excess",
            rep.ray_excess.iter().copied().fold(f64::INFINITY, f64::min),
        )
        .put("horizon", rep.horizon)
        .put("boundary_mismatch", rep.boundary_mismatch);
    let mut w = Writer::new(&opts.out);
    w.grid(SUBSOLUTION_FILE, &GridFunction::from_interior(&d, &rep.margins)?)?;
    w.finish(s, started)
}

/// Evaluates the compatibility integrals for `h = (e^{ψ+c})^{1/k}`. An
/// obstruction is a result, not an error.
pub fn check_compat(cfg: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let cc = cfg.compat.as_ref().ok_or(AppError::MissingSection("compat"))?;
    let spec = cfg.problem_spec()?;
    let d = build_domain(spec.domain)?;
    let psi = sample_field(&spec.psi_x, &d)?;
    let phi = spec.phi.sample(&d)?;
    let h = effective_rhs(&psi, cc.c, spec.k);
    let reference = match &cc.reference {
        Some(text) => {
            let mut u = sample_field(&expr("compat.reference", text)?, &d)?;
            u.fill_ghosts(&phi)?;
            Some(u)
        }
        None => None,
    };
    let rep = check_compatibility(&h, &spec.chi, &phi, spec.k, reference.as_ref(), cc.tol)?;
    let mut s = Summary::new();
    run_header(&mut s, "check-compat", cfg, &spec);
    s.section("input").put("c", cc.c);
    put_compat(&mut s, &rep);
    Writer::new(&opts.out).finish(s, started)
}

/// Heat-type evolution with zero Neumann data and Harnack ratio probes.
pub fn harnack(cfg: &Config, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let hc = cfg.harnack.as_ref().ok_or(AppError::MissingSection("harnack"))?;
    let spec = cfg.problem_spec()?;
    let rep = harnack_probe(
        spec.domain,
        &spec.coeffs,
        &spec.u0,
        &hc.times,
        spec.tolerances,
        opts.exec,
    )?;
    let mut s = Summary::new();
    run_header(&mut s, "harnack", cfg, &spec);
    s.section("harnack")
        .put("theta", rep.theta)
        .put(
            "mean_drift",
            rep.mean_drift.map_or(Value::Str("not-applicable".into()), Value::Float),
        )
        .put("min_value", rep.min_value)
        .put("steps", rep.steps)
        .put("gamma_t1", rep.gamma.iter().map(|g| g.0).collect::<Vec<_>>())
        .put("gamma_t2", rep.gamma.iter().map(|g| g.1).collect::<Vec<_>>())
        .put("gamma", rep.gamma.iter().map(|g| g.2).collect::<Vec<_>>());
    let mut csv = String::from("t,sup,inf,mean,amplitude\n");
    for i in 0..rep.times.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(rep.times[i]),
            fmt17(rep.sup[i]),
            fmt17(rep.inf[i]),
            fmt17(rep.mean[i]),
            fmt17(rep.amplitude[i])
        ));
    }
    let mut w = Writer::new(&opts.out);
    w.put(HARNACK_FILE, csv.as_bytes())?;
    w.finish(s, started)
}

pub fn selftest_summary(rep: &SelftestReport) -> Summary {
    let mut s = Summary::new();
    s.section("run").put("command", "selftest").put("seed", rep.seed);
    s.section("selftest").put("passes", rep.passes());
    for suite in &rep.suites {
        s.section(&format!("selftest.{}", suite.name))
            .put("samples", suite.samples)
            .put("failures", suite.failures)
            .put("worst", suite.worst)
            .put("tol", suite.tol);
    }
    s
}

/// Runs the randomized suites; fails after writing the summary if any
/// suite records a failure.
pub fn selftest(seed: u64, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let rep = selftest::run(seed, SuiteSizes::default());
    let out = Writer::new(&opts.out).finish(selftest_summary(&rep), started)?;
    if !rep.passes() {
        let failed: Vec<&str> = rep.suites.iter().filter(|s| !s.passes()).map(|s| s.name).collect();
        return Err(AppError::SelftestFailed(failed.join(", ")));
    }
    Ok(out)
}

/// `σ_k`, its gradient and cone membership for a literal tuple, as text.
pub fn sigma_text(lambda: &[f64], k: usize) -> Result<String> {
    let lam = EigenTuple::new(lambda.to_vec())?;
    let k = ConeOrder::new(k)?;
    let v = sigma(k, &lam)?;
    let g = grad_sigma(k, &lam)?;
    let cone = in_gamma_k(&lam, k)?;
    let g: Vec<String> = g.iter().map(|x| x.to_string()).collect();
    Ok(format!(
        "sigma = {v}\ngrad = ({})\nin_gamma_k = {}\nmargin = {}\n",
        g.join(", "),
        cone.inside,
        cone.margin
    ))
}
