use super::Result;
use crate::hessfield::{assemble_hessian, integrate_boundary, integrate_volume, BoundaryData, ChiSpec, GridFunction};
use crate::symkernel::ConeOrder;

/// Dimension of the solver's domains.
const N: usize = 2;

/// `lhs < rhs` (strict) or `lhs ≤ rhs + tol`, with `margin = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Inequality {
    fn strict(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs < rhs,
        }
    }

    fn within(lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: rhs - lhs >= -tol,
        }
    }
}

/// Flux inequality with `χ` replaced by `χ + ∇²u_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceVariant {
    /// `0 < ∫ tr(χ + ∇²u_ref) dV`.
    pub ineq: Inequality,
    /// `∫ Δu_ref dV + ∫ φ dS`, zero when `u_ref` carries the same data.
    pub stokes_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub n: usize,
    pub k: usize,
    pub c_nk: f64,
    pub volume: f64,
    pub int_phi: f64,
    pub int_tr_chi: f64,
    pub int_h: f64,
    /// `∫ φ dS < ∫ tr χ dV`.
    pub chi_only: Inequality,
    pub with_reference: Option<ReferenceVariant>,
    /// `∫ h dV ≤ c(n,k)(∫ tr χ dV − ∫ φ dS)`, up to `tol`.
    pub maclaurin: Inequality,
    pub tol: f64,
    pub obstruction: bool,
}

/// `C(n,k)^{1/k}/n`, the constant in `σ_k^{1/k} ≤ C(n,k)^{1/k}·σ₁/n`.
pub fn maclaurin_constant(n: usize, k: usize) -> f64 {
    let k = k.min(n);
    let binom = (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
    binom.powf(1.0 / k as f64) / n as f64
}

/// `h = (e^{ψ + c})^{1/k}` nodewise.
pub fn effective_rhs(psi: &GridFunction, c: f64, k: ConeOrder) -> GridFunction {
    let kk = k.get() as f64;
    let vals: Vec<f64> = psi.interior().iter().map(|p| ((p + c) / kk).exp()).collect();
    GridFunction::from_interior(psi.domain(), &vals).expect("same grid")
}

/// Evaluates the flux and Maclaurin-Stokes integral conditions.
///
/// `reference`, when given, must have its ghosts filled for `phi`.
pub fn check_compatibility(
    h: &GridFunction,
    chi: &ChiSpec,
    phi: &BoundaryData,
    k: ConeOrder,
    reference: Option<&GridFunction>,
    tol: f64,
) -> Result<CompatReport> {
    let d = h.domain();
    h.same_domain(phi.domain())?;
    let kk = k.check(N).map_err(crate::flow::FlowError::from)?;
    let c_nk = maclaurin_constant(N, kk);
    let volume = d.volume();
    let int_phi = integrate_boundary(phi);
    let chi_field = chi.sample(d)?;
    let int_tr_chi: f64 = d
        .nodes()
        .iter()
        .enumerate()
        .map(|(n, g)| chi_field.at(n).trace() * g.measure)
        .sum();
    let int_h = integrate_volume(h);
    let with_reference = match reference {
        Some(u) => {
            u.same_domain(d)?;
            let hf = assemble_hessian(u, chi)?;
            let zero = assemble_hessian(u, &ChiSpec::zero())?;
            let (mut total, mut lap) = (0.0, 0.0);
            for (n, g) in d.nodes().iter().enumerate() {
                total += hf.matrix(n).trace() * g.measure;
                lap += zero.matrix(n).trace() * g.measure;
            }
            Some(ReferenceVariant {
                ineq: Inequality::strict(0.0, total),
                stokes_discrepancy: lap + int_phi,
            })
        }
        None => None,
    };
    let chi_only = Inequality::strict(int_phi, int_tr_chi);
    let maclaurin = Inequality::within(int_h, c_nk * (int_tr_chi - int_phi), tol);
    Ok(CompatReport {
        n: N,
        k: kk,
        c_nk,
        volume,
        int_phi,
        int_tr_chi,
        int_h,
        chi_only,
        with_reference,
        maclaurin,
        tol,
        obstruction: !(chi_only.pass && maclaurin.pass),
    })
}
