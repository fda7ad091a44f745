//! Structured grids, sampled fields with ghost layers, discrete Hessians in
//! local orthonormal frames, and midpoint quadrature.

mod domain;
mod field;
mod hessian;
mod quadrature;

use thiserror::Error;

pub use domain::{build_domain, Domain, DomainSpec, Face, NodeGeom, Side};
pub use field::{
    fill_neumann_ghosts, sample_field, sample_field_with_ghosts, BoundaryData, BoundaryExpr, GridFunction,
};
pub use hessian::{
    assemble_hessian, assemble_hessian_with, node_hessian, ChiField, ChiSpec, HessianFrameField, NodeHessian,
};
pub use quadrature::{integrate_boundary, integrate_volume, integrate_volume_on, write_grid_csv};

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T> = std::result::Result<T, GridError>;
