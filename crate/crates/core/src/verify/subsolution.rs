use super::Result;
use crate::expr::Expression;
use crate::flow::ProblemSpec;
use crate::hessfield::{assemble_hessian, build_domain, sample_field_with_ghosts, GridFunction};
use crate::symkernel::{log_sigma_pair, SymMatrix2};

/// Ray length used to decide that `F` exceeds the level along `U + t·eᵢ⊗eᵢ`.
pub const PROBE_HORIZON: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionReport {
    pub admissible: Vec<bool>,
    pub margins: Vec<f64>,
    /// Every coordinate ray at the node exceeds the level within the horizon.
    pub rays_unbounded: Vec<bool>,
    /// `min_i F(U + T·eᵢ⊗eᵢ) − level` per node (`-inf` when outside Γ_k).
    pub ray_excess: Vec<f64>,
    pub min_margin: f64,
    /// `sup |ū_ν − φ|` over boundary faces, for information.
    pub boundary_mismatch: f64,
    pub horizon: f64,
    pub verdict: bool,
}

fn log_sigma(k: usize, m: SymMatrix2) -> f64 {
    log_sigma_pair(k, m.eigenvalues()).map_or(f64::NEG_INFINITY, |p| p.value)
}

fn margin(k: usize, lam: [f64; 2]) -> f64 {
    let s1 = lam[0] + lam[1];
    if k == 1 {
        s1
    } else {
        s1.min(lam[0] * lam[1])
    }
}

/// Probes `ubar` as an elliptic C-subsolution of `log σ_k(χ + ∇²u) = level`.
///
/// `level` must live on the grid of `spec.domain`. The ray test is a
/// sufficient check: along `U + t·eᵢ⊗eᵢ` inside Γ_k, σ_k grows affinely.
pub fn check_c_subsolution(ubar: &Expression, spec: &ProblemSpec, level: &GridFunction) -> Result<SubsolutionReport> {
    let d = build_domain(spec.domain)?;
    level.same_domain(&d)?;
    let k = spec.k.check(2).map_err(crate::flow::FlowError::from)?;
    let u = sample_field_with_ghosts(ubar, &d)?;
    let h = assemble_hessian(&u, &spec.chi)?;
    let mut rep = SubsolutionReport {
        admissible: Vec::with_capacity(d.len()),
        margins: Vec::with_capacity(d.len()),
        rays_unbounded: Vec::with_capacity(d.len()),
        ray_excess: Vec::with_capacity(d.len()),
        min_margin: f64::INFINITY,
        boundary_mismatch: 0.0,
        horizon: PROBE_HORIZON,
        verdict: true,
    };
    for n in 0..d.len() {
        let m = h.matrix(n);
        let mg = margin(k, h.eigenvalues(n));
        let lv = level.get(n);
        let excess = [
            SymMatrix2::new(m.a11 + PROBE_HORIZON, m.a12, m.a22),
            SymMatrix2::new(m.a11, m.a12, m.a22 + PROBE_HORIZON),
        ]
        .into_iter()
        .map(|a| log_sigma(k, a) - lv)
        .fold(f64::INFINITY, f64::min);
        let ok = mg > 0.0;
        let rays = excess > 0.0;
        rep.admissible.push(ok);
        rep.margins.push(mg);
        rep.rays_unbounded.push(rays);
        rep.ray_excess.push(excess);
        rep.min_margin = rep.min_margin.min(mg);
        rep.verdict &= ok && rays;
    }
    let phi = spec.phi.sample(&d)?;
    let du = u.normal_derivative();
    rep.boundary_mismatch = du
        .values()
        .iter()
        .zip(phi.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(rep)
}
