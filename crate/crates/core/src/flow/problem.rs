use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::filter::PoleFilter;
use super::{FlowError, Result};
use crate::exec::Exec;
use crate::expr::Expression;
use crate::hessfield::{
    build_domain, sample_field, BoundaryData, BoundaryExpr, ChiField, ChiSpec, Domain, DomainSpec, GridFunction,
};
use crate::symkernel::{ConeOrder, SymMatrix2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Hessian,
    /// `u_t = a^{ij}u_ij − ψ`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `None` picks 1e-8 on radial grids and 1e-6 otherwise.
    pub tol_c: Option<f64>,
    pub dt_safety: f64,
    pub dt_min: f64,
    pub max_steps: u64,
    /// Monitor sampling period in steps.
    pub monitor_every: u64,
    /// Band-limit increments near the pole of the disk grid so the angular
    /// CFL restriction uses Δr instead of r₀Δθ.
    pub pole_filter: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_c: None,
            dt_safety: 0.4,
            dt_min: 1e-12,
            max_steps: 10_000_000,
            monitor_every: 100,
            pole_filter: false,
        }
    }
}

impl Tolerances {
    pub fn tol_c_for(&self, domain: &DomainSpec) -> f64 {
        self.tol_c.unwrap_or(match domain {
            DomainSpec::Radial { .. } => 1e-8,
            _ => 1e-6,
        })
    }
}

/// One instance of the initial/boundary value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub k: ConeOrder,
    pub chi: ChiSpec,
    pub psi_x: Expression,
    pub psi_t_rate: f64,
    pub phi: BoundaryExpr,
    pub u0: Expression,
    pub mode: Mode,
    /// `a^{ij}` for linear mode, Cartesian components.
    pub coeffs: ChiSpec,
    pub tolerances: Tolerances,
}

impl ProblemSpec {
    /// Hessian-mode problem with `χ = 0` and default tolerances.
    pub fn new(domain: DomainSpec, k: usize, psi: &str, phi: &str, u0: &str) -> Result<Self> {
        let parse = |s: &str| Expression::parse(s).map_err(|e| FlowError::Grid(e.into()));
        Ok(Self {
            domain,
            k: ConeOrder::new(k)?,
            chi: ChiSpec::zero(),
            psi_x: parse(psi)?,
            psi_t_rate: 0.0,
            phi: BoundaryExpr::uniform(parse(phi)?),
            u0: parse(u0)?,
            mode: Mode::Hessian,
            coeffs: identity_coeffs(),
            tolerances: Tolerances::default(),
        })
    }

    pub fn linear(domain: DomainSpec, psi: &str, phi: &str, u0: &str) -> Result<Self> {
        let mut s = Self::new(domain, 1, psi, phi, u0)?;
        s.mode = Mode::Linear;
        Ok(s)
    }

    pub fn tol_c(&self) -> f64 {
        self.tolerances.tol_c_for(&self.domain)
    }
}

pub(crate) fn identity_coeffs() -> ChiSpec {
    ChiSpec {
        xx: Expression::constant(1.0),
        xy: Expression::constant(0.0),
        yy: Expression::constant(1.0),
    }
}

/// A [`ProblemSpec`] with every field sampled on its grid.
#[derive(Debug)]
pub struct Problem {
    pub(crate) spec: ProblemSpec,
    pub(crate) domain: Arc<Domain>,
    pub(crate) chi: ChiField,
    /// `a^{ij}` per node in the node frame (linear mode only).
    pub(crate) coeffs: Vec<SymMatrix2>,
    /// Smallest eigenvalue and trace of `a^{ij}` per node.
    pub(crate) coeff_bounds: Vec<(f64, f64)>,
    pub(crate) psi: Vec<f64>,
    pub(crate) phi: BoundaryData,
    pub(crate) k: usize,
    pub(crate) exec: Exec,
    pub(crate) filter: Option<PoleFilter>,
    pub(crate) tol_c: f64,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        Self::with_exec(spec, Exec::default())
    }

    pub fn with_exec(spec: ProblemSpec, exec: Exec) -> Result<Self> {
        let t = &spec.tolerances;
        if !(t.dt_safety > 0.0 && t.dt_min > 0.0 && t.monitor_every > 0) {
            return Err(FlowError::InvalidSpec(
                "dt_safety, dt_min and monitor_every must be positive".into(),
            ));
        }
        let tol_c = spec.tol_c();
        if !(tol_c > 0.0) {
            return Err(FlowError::InvalidSpec(format!("tol_c must be positive, got {tol_c}")));
        }
        if !spec.psi_t_rate.is_finite() {
            return Err(FlowError::InvalidSpec("psi_t_rate must be finite".into()));
        }
        let k = spec.k.check(2)?;
        let domain = build_domain(spec.domain)?;
        let chi = spec.chi.sample(&domain)?;
        let coeffs = match spec.mode {
            Mode::Linear => {
                let a = spec.coeffs.sample(&domain)?;
                (0..domain.len()).map(|n| a.at(n)).collect()
            }
            Mode::Hessian => Vec::new(),
        };
        let coeff_bounds = coeffs.iter().map(|a| (a.eigenvalues()[1], a.trace())).collect();
        let psi = sample_field(&spec.psi_x, &domain)?.interior();
        let phi = spec.phi.sample(&domain)?;
        let filter = match (spec.tolerances.pole_filter, spec.domain) {
            (true, DomainSpec::Disk { nr, ntheta }) => Some(PoleFilter::new(nr, ntheta)),
            _ => None,
        };
        Ok(Self {
            spec,
            domain,
            chi,
            coeffs,
            coeff_bounds,
            psi,
            phi,
            k,
            exec,
            filter,
            tol_c,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn phi(&self) -> &BoundaryData {
        &self.phi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn tol_c(&self) -> f64 {
        self.tol_c
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    /// Initial field with ghosts filled.
    pub fn initial_field(&self) -> Result<GridFunction> {
        let mut u = sample_field(&self.spec.u0, &self.domain)?;
        u.fill_ghosts(&self.phi)?;
        Ok(u)
    }

    /// Increment actually applied by a step: `u_t`, band-limited near the
    /// pole when the filter is enabled.
    pub fn increment(&self, ut: &[f64]) -> Vec<f64> {
        let mut inc = ut.to_vec();
        if let Some(f) = &self.filter {
            f.apply(&mut inc);
        }
        inc
    }

    /// `(Δ₁, Δ₂)` entering the CFL bound.
    pub(crate) fn cfl_spacings(&self) -> (f64, f64) {
        let (a, b) = self.domain.spacings();
        match self.spec.domain {
            DomainSpec::Disk { .. } if self.filter.is_some() => (a, a),
            DomainSpec::Disk { .. } => (a, self.domain.nodes()[0].r * b),
            // no angular direction: only the radial term constrains Δt
            DomainSpec::Radial { .. } => (a, f64::INFINITY),
            DomainSpec::Rect { .. } => (a, b),
        }
    }

    /// Volume-weighted mean of a nodal array.
    pub fn mean(&self, v: &[f64]) -> f64 {
        let nodes = self.domain.nodes();
        let s: f64 = v.iter().zip(nodes).map(|(x, g)| x * g.measure).sum();
        s / self.domain.volume()
    }
}
