use super::problem::{Problem, ProblemSpec};
use super::state::{evaluate, step, step_capped, FlowState, MonitorSample};
use super::{FlowError, Result};
use crate::exec::Exec;
use crate::expr::{Expression, Vars};
use crate::hessfield::{DomainSpec, GridFunction};

/// Node whose value is subtracted to normalize the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    /// Node nearest the domain centroid, lowest index on ties.
    #[default]
    Centroid,
    Node(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub c: f64,
    pub u_normalized: GridFunction,
    pub u: GridFunction,
    pub anchor: usize,
    pub steps: u64,
    pub t: f64,
    pub residual: f64,
    /// `sup |F − ψ − c|` recomputed from the final state.
    pub posteriori: f64,
    pub margin_min: f64,
    pub margin_final: f64,
    pub history: Vec<MonitorSample>,
}

/// Steps until `sup |u_t − mean(u_t)| < tol_c` and reads `c = mean(u_t)`.
pub fn run_to_convergence(p: &Problem, anchor: Anchor) -> Result<SolveReport> {
    if p.spec.psi_t_rate != 0.0 {
        return Err(FlowError::InvalidSpec(
            "convergence runs need a time-independent psi (psi_t_rate = 0)".into(),
        ));
    }
    let n_nodes = p.domain.len();
    let anchor = match anchor {
        Anchor::Centroid => p.domain.centroid_node(),
        Anchor::Node(n) if n < n_nodes => n,
        Anchor::Node(n) => {
            return Err(FlowError::InvalidSpec(format!(
                "anchor node {n} is outside 0..{n_nodes}"
            )))
        }
    };
    let tol_c = p.tol_c;
    let max_steps = p.spec.tolerances.max_steps;
    let mut st = FlowState::new(p)?;
    let mut margin_min = st.margin;
    let (residual, c) = loop {
        let (res, mean) = st.residual(p);
        if res < tol_c {
            break (res, mean);
        }
        if st.step >= max_steps {
            return Err(FlowError::NotConverged {
                max_steps,
                residual: res,
            });
        }
        step(&mut st, p)?;
        margin_min = margin_min.min(st.margin);
    };
    st.record();

    let fresh = evaluate(&st.u, st.t, st.step, p)?;
    let posteriori = fresh.ut.iter().map(|v| (v - c).abs()).fold(0.0, f64::max);
    let bound = 10.0 * tol_c;
    if !(posteriori <= bound) {
        return Err(FlowError::PosterioriFailed {
            residual: posteriori,
            bound,
        });
    }
    let mut u_normalized = st.u.clone();
    u_normalized.add_constant(-st.u.get(anchor));
    Ok(SolveReport {
        c,
        u_normalized,
        u: st.u,
        anchor,
        steps: st.step,
        t: st.t,
        residual,
        posteriori,
        margin_min,
        margin_final: st.margin,
        history: st.history,
    })
}

/// Advances exactly `n` steps.
pub fn run_steps(state: &mut FlowState, p: &Problem, n: u64) -> Result<()> {
    for _ in 0..n {
        step(state, p)?;
    }
    state.record();
    Ok(())
}

/// Advances until `state.t` reaches `t_end`, shortening the last step.
pub fn run_for(state: &mut FlowState, p: &Problem, t_end: f64) -> Result<()> {
    let eps = 1e-12 * t_end.abs().max(1.0);
    while t_end - state.t > eps {
        if state.step >= p.spec.tolerances.max_steps {
            let (residual, _) = state.residual(p);
            return Err(FlowError::NotConverged {
                max_steps: p.spec.tolerances.max_steps,
                residual,
            });
        }
        let cap = t_end - state.t;
        step_capped(state, p, cap)?;
    }
    state.record();
    Ok(())
}

fn check_radial(name: &str, e: &Expression, radii: &[f64]) -> Result<()> {
    for &r in radii {
        let v0 = e.eval(&Vars::polar(r, 0.0)).map_err(|x| FlowError::Grid(x.into()))?;
        for th in crate::hessfield::Domain::radial_probe_angles() {
            let v = e.eval(&Vars::polar(r, th)).map_err(|x| FlowError::Grid(x.into()))?;
            if (v - v0).abs() > 1e-12 * (1.0 + v0.abs()) {
                return Err(FlowError::NotRadial(format!(
                    "{name} = `{e}` differs between theta = 0 and {th} at r = {r}"
                )));
            }
        }
    }
    Ok(())
}

fn check_radial_tensor(name: &str, c: &crate::hessfield::ChiSpec, radii: &[f64]) -> Result<()> {
    for &r in radii {
        let m0 = c.eval(r, 0.0)?;
        for th in crate::hessfield::Domain::radial_probe_angles() {
            let m = c.eval(r * th.cos(), r * th.sin())?.rotated_into(th);
            let d = m.sub(&m0);
            let scale = 1e-12 * (1.0 + m0.a11.abs() + m0.a12.abs() + m0.a22.abs());
            if d.a11.abs().max(d.a12.abs()).max(d.a22.abs()) > scale {
                return Err(FlowError::NotRadial(format!(
                    "{name} has polar components that vary with theta at r = {r}"
                )));
            }
        }
    }
    Ok(())
}

/// Checks that the data is radially symmetric and returns the same problem
/// on the one-dimensional radial grid.
pub fn radial_reduce(spec: &ProblemSpec) -> Result<ProblemSpec> {
    let nr = match spec.domain {
        DomainSpec::Disk { nr, .. } | DomainSpec::Radial { nr } => nr,
        DomainSpec::Rect { .. } => return Err(FlowError::InvalidSpec("radial solve needs a disk domain".into())),
    };
    let mut radii: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) / nr as f64).collect();
    radii.push(1.0);
    check_radial("psi", &spec.psi_x, &radii)?;
    check_radial("u0", &spec.u0, &radii)?;
    check_radial("phi", &spec.phi.default, &[1.0])?;
    check_radial_tensor("chi", &spec.chi, &radii)?;
    if spec.mode == super::Mode::Linear {
        check_radial_tensor("coeffs", &spec.coeffs, &radii)?;
    }
    let mut s = spec.clone();
    s.domain = DomainSpec::Radial { nr };
    Ok(s)
}

/// One-dimensional solve with `λ = (u″, u′/r)` for radially symmetric data
/// on the unit disk.
pub fn radial_solve(spec: &ProblemSpec, exec: Exec, anchor: Anchor) -> Result<SolveReport> {
    let p = Problem::with_exec(radial_reduce(spec)?, exec)?;
    run_to_convergence(&p, anchor)
}
