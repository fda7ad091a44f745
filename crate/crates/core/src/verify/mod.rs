//! Offline checks of the structural conditions: C-subsolution probing,
//! compatibility integrals, and the empirical Harnack ratio.

mod compat;
mod harnack;
mod reflect;
mod subsolution;

use thiserror::Error;

use crate::flow::FlowError;
use crate::hessfield::{GridError, Side};

pub use compat::{check_compatibility, effective_rhs, maclaurin_constant, CompatReport, Inequality, ReferenceVariant};
pub use harnack::{harnack_probe, HarnackReport};
pub use reflect::reflection_extend;
pub use subsolution::{check_c_subsolution, SubsolutionReport, PROBE_HORIZON};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("initial data is negative at node {node} ({value:e})")]
    NegativeData { node: usize, value: f64 },
    #[error("coefficients are not elliptic at node {node} (smallest eigenvalue {margin:e})")]
    NotElliptic { node: usize, margin: f64 },
    #[error("reflection needs zero Neumann data on the {side:?} side, found {value:e}")]
    NonzeroFlux { side: Side, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, VerifyError>;
