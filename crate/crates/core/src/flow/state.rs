use super::problem::{Mode, Problem};
use super::{FlowError, Result};
use crate::hessfield::{node_hessian, GridFunction};
use crate::symkernel::log_sigma_pair;

/// Retries with halved Δt after an admissibility loss.
pub const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub step: u64,
    pub t: f64,
    /// Step size that produced this state (0 for the initial sample).
    pub dt: f64,
    pub sup_ut: f64,
    pub inf_ut: f64,
    pub osc_u: f64,
    pub sup_grad: f64,
    pub margin: f64,
    pub sup_abs_u: f64,
    /// `sup |u_t|` over every step up to `t`, not only sampled ones.
    pub max_abs_ut: f64,
}

/// Right-hand side at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsEval {
    pub ut: Vec<f64>,
    pub sup_ut: f64,
    pub inf_ut: f64,
    /// Minimum Γ_k margin (hessian) or smallest eigenvalue of `a^{ij}`.
    pub margin: f64,
    /// Largest `Σ F^{ii}` (or `tr a`) over nodes.
    pub max_trace: f64,
    pub sup_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: GridFunction,
    pub t: f64,
    pub step: u64,
    /// Last right-hand side, in node order.
    pub ut: Vec<f64>,
    pub sup_ut: f64,
    pub inf_ut: f64,
    pub margin: f64,
    pub max_trace: f64,
    pub sup_grad: f64,
    pub dt_last: f64,
    pub max_abs_ut: f64,
    pub history: Vec<MonitorSample>,
}

struct NodeEval {
    ut: f64,
    margin: f64,
    trace: f64,
    grad_sq: f64,
}

pub(crate) fn evaluate(u: &GridFunction, t: f64, step: u64, p: &Problem) -> Result<RhsEval> {
    let d = &p.domain;
    let pad = u.padded();
    let shift = p.spec.psi_t_rate * t;
    let per = match p.spec.mode {
        Mode::Hessian => p.exec.map_nodes(d.len(), |n| {
            let nh = node_hessian(d, pad, n);
            let lam = nh.h.add(&p.chi.at(n)).eigenvalues();
            match log_sigma_pair(p.k, lam) {
                Ok(pe) => NodeEval {
                    ut: pe.value - p.psi[n] - shift,
                    margin: pe.margin,
                    trace: pe.trace(),
                    grad_sq: nh.grad_sq,
                },
                Err(_) => NodeEval {
                    ut: f64::NAN,
                    margin: cone_margin(p.k, lam),
                    trace: f64::INFINITY,
                    grad_sq: nh.grad_sq,
                },
            }
        }),
        Mode::Linear => p.exec.map_nodes(d.len(), |n| {
            let nh = node_hessian(d, pad, n);
            let (margin, trace) = p.coeff_bounds[n];
            NodeEval {
                ut: p.coeffs[n].contract(&nh.h) - p.psi[n] - shift,
                margin,
                trace,
                grad_sq: nh.grad_sq,
            }
        }),
    };
    let mut out = RhsEval {
        ut: Vec::with_capacity(per.len()),
        sup_ut: f64::NEG_INFINITY,
        inf_ut: f64::INFINITY,
        margin: f64::INFINITY,
        max_trace: 0.0,
        sup_grad: 0.0,
    };
    for (n, e) in per.into_iter().enumerate() {
        if !(e.margin > 0.0) || !e.ut.is_finite() {
            return Err(FlowError::AdmissibilityLost {
                step,
                node: n,
                margin: e.margin,
            });
        }
        out.ut.push(e.ut);
        out.sup_ut = out.sup_ut.max(e.ut);
        out.inf_ut = out.inf_ut.min(e.ut);
        out.margin = out.margin.min(e.margin);
        out.max_trace = out.max_trace.max(e.trace);
        out.sup_grad = out.sup_grad.max(e.grad_sq);
    }
    out.sup_grad = out.sup_grad.sqrt();
    Ok(out)
}

fn cone_margin(k: usize, lam: [f64; 2]) -> f64 {
    let s1 = lam[0] + lam[1];
    if k == 1 {
        s1
    } else {
        s1.min(lam[0] * lam[1])
    }
}

/// `u_t` at the current state, recomputed from `state.u`.
pub fn rhs(state: &FlowState, p: &Problem) -> Result<RhsEval> {
    evaluate(&state.u, state.t, state.step, p)
}

/// Forward Euler stability bound for the linearized operator.
pub fn stable_dt(state: &FlowState, p: &Problem) -> Result<f64> {
    let (d1, d2) = p.cfl_spacings();
    let tol = &p.spec.tolerances;
    let dt = tol.dt_safety / (state.max_trace * (1.0 / (d1 * d1) + 1.0 / (d2 * d2)));
    if !(dt >= tol.dt_min) {
        return Err(FlowError::CflUnderflow { dt, dt_min: tol.dt_min });
    }
    Ok(dt)
}

impl FlowState {
    /// Samples `u₀`, fills ghosts and checks admissibility.
    pub fn new(p: &Problem) -> Result<Self> {
        let u = p.initial_field()?;
        let ev = evaluate(&u, 0.0, 0, p).map_err(|e| match e {
            FlowError::AdmissibilityLost { node, margin, .. } => FlowError::NotAdmissible { node, margin },
            e => e,
        })?;
        let mut s = Self::from_eval(u, 0.0, 0, ev, 0.0);
        s.max_abs_ut = s.sup_abs_ut();
        s.record();
        Ok(s)
    }

    fn from_eval(u: GridFunction, t: f64, step: u64, ev: RhsEval, dt: f64) -> Self {
        Self {
            u,
            t,
            step,
            ut: ev.ut,
            sup_ut: ev.sup_ut,
            inf_ut: ev.inf_ut,
            margin: ev.margin,
            max_trace: ev.max_trace,
            sup_grad: ev.sup_grad,
            dt_last: dt,
            max_abs_ut: 0.0,
            history: Vec::new(),
        }
    }

    fn sup_abs_ut(&self) -> f64 {
        self.sup_ut.abs().max(self.inf_ut.abs())
    }

    /// The last right-hand side as a grid field.
    pub fn ut_field(&self) -> GridFunction {
        GridFunction::from_interior(self.u.domain(), &self.ut).expect("ut matches the grid")
    }

    pub fn sample(&self) -> MonitorSample {
        MonitorSample {
            step: self.step,
            t: self.t,
            dt: self.dt_last,
            sup_ut: self.sup_ut,
            inf_ut: self.inf_ut,
            osc_u: self.u.sup() - self.u.inf(),
            sup_grad: self.sup_grad,
            margin: self.margin,
            sup_abs_u: self.u.sup_abs(),
            max_abs_ut: self.max_abs_ut,
        }
    }

    /// Appends the current sample unless this step is already recorded.
    pub fn record(&mut self) {
        if self.history.last().is_none_or(|h| h.step != self.step) {
            let s = self.sample();
            self.history.push(s);
        }
    }

    /// `sup |u_t − mean(u_t)|` of the applied increment, and its mean.
    pub fn residual(&self, p: &Problem) -> (f64, f64) {
        let filtered;
        let inc = if p.filter.is_some() {
            filtered = p.increment(&self.ut);
            &filtered
        } else {
            &self.ut
        };
        let mean = p.mean(inc);
        let r = inc.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        (r, mean)
    }
}

/// One forward Euler step at the stable Δt.
pub fn step(state: &mut FlowState, p: &Problem) -> Result<()> {
    step_capped(state, p, f64::INFINITY).map(|_| ())
}

/// One step with `Δt ≤ dt_cap`; returns the Δt used.
pub fn step_capped(state: &mut FlowState, p: &Problem, dt_cap: f64) -> Result<f64> {
    let dt_min = p.spec.tolerances.dt_min;
    let mut dt = stable_dt(state, p)?.min(dt_cap);
    let filtered;
    let inc = if p.filter.is_some() {
        filtered = p.increment(&state.ut);
        &filtered
    } else {
        &state.ut
    };
    let mut halvings = 0;
    loop {
        let mut u = state.u.clone();
        u.axpy_interior(dt, inc);
        u.fill_ghosts(&p.phi)?;
        match evaluate(&u, state.t + dt, state.step + 1, p) {
            Ok(ev) => {
                state.u = u;
                state.t += dt;
                state.step += 1;
                state.ut = ev.ut;
                state.sup_ut = ev.sup_ut;
                state.inf_ut = ev.inf_ut;
                state.margin = ev.margin;
                state.max_trace = ev.max_trace;
                state.sup_grad = ev.sup_grad;
                state.dt_last = dt;
                state.max_abs_ut = state.max_abs_ut.max(state.sup_abs_ut());
                if state.step.is_multiple_of(p.spec.tolerances.monitor_every) {
                    state.record();
                }
                return Ok(dt);
            }
            Err(FlowError::AdmissibilityLost { .. }) if halvings < MAX_HALVINGS => {
                halvings += 1;
                dt *= 0.5;
                if dt < dt_min {
                    return Err(FlowError::CflUnderflow { dt, dt_min });
                }
            }
            Err(e) => return Err(e),
        }
    }
}
