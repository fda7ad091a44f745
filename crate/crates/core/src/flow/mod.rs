//! Explicit time integration of `u_t = log σ_k(λ(χ + ∇²u)) − ψ` (or the
//! linear operator `a^{ij}u_ij − ψ`) under Neumann data, and extraction of
//! the limiting constant `c`.

mod filter;
mod monitor;
mod problem;
mod solve;
mod state;

use thiserror::Error;

use crate::hessfield::GridError;
use crate::symkernel::SymError;

pub use filter::PoleFilter;
pub use monitor::{default_slack, monitor_checks, MonitorReport};
pub use problem::{Mode, Problem, ProblemSpec, Tolerances};
pub use solve::{radial_reduce, radial_solve, run_for, run_steps, run_to_convergence, Anchor, SolveReport};
pub use state::{rhs, stable_dt, step, step_capped, FlowState, MonitorSample, RhsEval, MAX_HALVINGS};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("initial data is not admissible at node {node} (margin {margin:e})")]
    NotAdmissible { node: usize, margin: f64 },
    #[error("admissibility lost at step {step}, node {node} (margin {margin:e})")]
    AdmissibilityLost { step: u64, node: usize, margin: f64 },
    #[error("time step {dt:e} fell below dt_min = {dt_min:e}")]
    CflUnderflow { dt: f64, dt_min: f64 },
    #[error("not converged after {max_steps} steps (residual {residual:e})")]
    NotConverged { max_steps: u64, residual: f64 },
    #[error("a posteriori residual {residual:e} exceeds {bound:e}")]
    PosterioriFailed { residual: f64, bound: f64 },
    #[error("data is not radially symmetric: {0}")]
    NotRadial(String),
}

pub type Result<T> = std::result::Result<T, FlowError>;
