use super::{Result, VerifyError};
use crate::exec::Exec;
use crate::expr::{Expression, Vars};
use crate::flow::{step_capped, FlowError, FlowState, Problem, ProblemSpec, Tolerances};
use crate::hessfield::{sample_field, BoundaryExpr, ChiSpec, DomainSpec};
use crate::symkernel::ConeOrder;

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    pub times: Vec<f64>,
    pub sup: Vec<f64>,
    pub inf: Vec<f64>,
    pub mean: Vec<f64>,
    /// `(sup − inf)(t) / (sup − inf)(0)` at each requested time.
    pub amplitude: Vec<f64>,
    /// `(t₁, t₂, sup u(·,t₁) / inf u(·,t₂))` for every requested pair `t₁ < t₂`.
    pub gamma: Vec<(f64, f64, f64)>,
    /// Ellipticity constant: `θ I ≤ a ≤ θ⁻¹ I` at every node.
    pub theta: f64,
    /// `max |mean u(t) − mean u₀|` over every step; only for `a = I`.
    pub mean_drift: Option<f64>,
    /// Smallest nodal value over every step.
    pub min_value: f64,
    pub steps: u64,
}

impl HarnackReport {
    pub fn gamma_at(&self, t1: f64, t2: f64) -> Option<f64> {
        self.gamma.iter().find(|g| g.0 == t1 && g.1 == t2).map(|g| g.2)
    }
}

fn is_identity(a: &ChiSpec) -> bool {
    let v = Vars::cartesian(0.0, 0.0);
    [(&a.xx, 1.0), (&a.xy, 0.0), (&a.yy, 1.0)]
        .iter()
        .all(|(e, want)| e.is_constant() && e.eval(&v).ok() == Some(*want))
}

/// Evolves `u_t = a^{ij}u_ij` with zero Neumann data and records
/// sup/inf ratios at the requested times.
pub fn harnack_probe(
    domain: DomainSpec,
    coeffs: &ChiSpec,
    u0: &Expression,
    times: &[f64],
    tolerances: Tolerances,
    exec: Exec,
) -> Result<HarnackReport> {
    if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VerifyError::InvalidInput(
            "times must be positive and strictly increasing".into(),
        ));
    }
    let spec = ProblemSpec {
        domain,
        k: ConeOrder::new(1).map_err(FlowError::from)?,
        chi: ChiSpec::zero(),
        psi_x: Expression::constant(0.0),
        psi_t_rate: 0.0,
        phi: BoundaryExpr::uniform(Expression::constant(0.0)),
        u0: u0.clone(),
        mode: crate::flow::Mode::Linear,
        coeffs: coeffs.clone(),
        tolerances,
    };
    let p = Problem::with_exec(spec, exec)?;
    let d = p.domain().clone();
    let init = sample_field(u0, &d)?;
    for n in 0..d.len() {
        if init.get(n) < 0.0 {
            return Err(VerifyError::NegativeData {
                node: n,
                value: init.get(n),
            });
        }
    }
    let a = coeffs.sample(&d)?;
    let mut theta = f64::INFINITY;
    for n in 0..d.len() {
        let [hi, lo] = a.at(n).eigenvalues();
        if !(lo > 0.0) {
            return Err(VerifyError::NotElliptic { node: n, margin: lo });
        }
        theta = theta.min(lo).min(1.0 / hi);
    }

    let mut st = FlowState::new(&p)?;
    let mean0 = p.mean(&st.u.interior());
    let amp0 = st.u.sup() - st.u.inf();
    let track_mean = is_identity(coeffs);
    let mut drift: f64 = 0.0;
    let mut min_value = st.u.inf();
    let mut rep = HarnackReport {
        times: times.to_vec(),
        sup: Vec::new(),
        inf: Vec::new(),
        mean: Vec::new(),
        amplitude: Vec::new(),
        gamma: Vec::new(),
        theta,
        mean_drift: None,
        min_value: 0.0,
        steps: 0,
    };
    let max_steps = p.spec().tolerances.max_steps;
    for &t_end in times {
        let eps = 1e-12 * t_end.max(1.0);
        while t_end - st.t > eps {
            if st.step >= max_steps {
                return Err(FlowError::NotConverged {
                    max_steps,
                    residual: st.residual(&p).0,
                }
                .into());
            }
            let cap = t_end - st.t;
            step_capped(&mut st, &p, cap)?;
            let vals = st.u.interior();
            min_value = vals.iter().copied().fold(min_value, f64::min);
            if track_mean {
                drift = drift.max((p.mean(&vals) - mean0).abs());
            }
        }
        st.record();
        let (s, i) = (st.u.sup(), st.u.inf());
        rep.sup.push(s);
        rep.inf.push(i);
        rep.mean.push(p.mean(&st.u.interior()));
        rep.amplitude.push(if amp0 > 0.0 { (s - i) / amp0 } else { 0.0 });
    }
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let g = if rep.inf[j] > 0.0 {
                rep.sup[i] / rep.inf[j]
            } else {
                f64::INFINITY
            };
            rep.gamma.push((times[i], times[j], g));
        }
    }
    rep.mean_drift = track_mean.then_some(drift);
    rep.min_value = min_value;
    rep.steps = st.step;
    Ok(rep)
}
