use std::sync::Arc;

use super::domain::{Domain, DomainSpec};
use super::field::GridFunction;
use super::Result;
use crate::exec::Exec;
use crate::expr::{Expression, Vars};
use crate::symkernel::{EigenTuple, SymMatrix2};

/// Background tensor `χ` given by Cartesian component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSpec {
    pub xx: Expression,
    pub xy: Expression,
    pub yy: Expression,
}

impl ChiSpec {
    pub fn zero() -> Self {
        Self {
            xx: Expression::constant(0.0),
            xy: Expression::constant(0.0),
            yy: Expression::constant(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        [&self.xx, &self.xy, &self.yy]
            .iter()
            .all(|e| e.is_constant() && e.eval(&Vars::cartesian(0.0, 0.0)).ok() == Some(0.0))
    }

    /// Cartesian value at a point.
    pub fn eval(&self, x: f64, y: f64) -> Result<SymMatrix2> {
        let v = Vars::cartesian(x, y);
        Ok(SymMatrix2::new(self.xx.eval(&v)?, self.xy.eval(&v)?, self.yy.eval(&v)?))
    }

    /// Samples at every node and rotates into the node frame.
    pub fn sample(&self, domain: &Arc<Domain>) -> Result<ChiField> {
        if self.is_zero() {
            return Ok(ChiField::Zero);
        }
        let vals = domain
            .nodes()
            .iter()
            .map(|n| Ok(self.eval(n.x, n.y)?.rotated_into(n.frame_angle)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChiField::Nodes(vals))
    }
}

/// `χ` in node frames.
#[derive(Debug, Clone, PartialEq)]
pub enum ChiField {
    Zero,
    Nodes(Vec<SymMatrix2>),
}

impl ChiField {
    #[inline]
    pub fn at(&self, n: usize) -> SymMatrix2 {
        match self {
            Self::Zero => SymMatrix2::default(),
            Self::Nodes(v) => v[n],
        }
    }
}

/// Discrete Hessian at one node in its frame, plus the squared gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeHessian {
    pub h: SymMatrix2,
    pub grad_sq: f64,
}

/// Second-order central Hessian of the padded field at interior node `n`.
///
/// Polar frames use `(e_r, e_θ)`:
/// `H_rr = u_rr`, `H_θθ = u_r/r + u_θθ/r²`, `H_rθ = u_rθ/r − u_θ/r²`.
#[inline]
pub fn node_hessian(domain: &Domain, p: &[f64], n: usize) -> NodeHessian {
    let node = &domain.nodes()[n];
    match *domain.spec() {
        DomainSpec::Radial { nr } => {
            // 1/Δr = nr exactly
            let idr = nr as f64;
            let i = n + 1;
            let (c, rp, rm) = (p[i], p[i + 1], p[i - 1]);
            let ur = 0.5 * (rp - rm) * idr;
            let urr = (rp - 2.0 * c + rm) * (idr * idr);
            NodeHessian {
                h: SymMatrix2::diag(urr, ur / node.r),
                grad_sq: ur * ur,
            }
        }
        DomainSpec::Disk { nr, ntheta: nt } => {
            let idr = nr as f64;
            let idth = nt as f64 / std::f64::consts::TAU;
            let (i, j) = (n / nt, n % nt);
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            let row = (i + 1) * nt;
            let up = row + nt;
            let dn = row - nt;
            let c = p[row + j];
            let ur = 0.5 * (p[up + j] - p[dn + j]) * idr;
            let urr = (p[up + j] - 2.0 * c + p[dn + j]) * (idr * idr);
            let ut = 0.5 * (p[row + jp] - p[row + jm]) * idth;
            let utt = (p[row + jp] - 2.0 * c + p[row + jm]) * (idth * idth);
            let urt = 0.25 * (p[up + jp] - p[up + jm] - p[dn + jp] + p[dn + jm]) * (idr * idth);
            let ir = 1.0 / node.r;
            NodeHessian {
                h: SymMatrix2::new(urr, (urt - ut * ir) * ir, (ur + utt * ir) * ir),
                grad_sq: ur * ur + (ut * ir) * (ut * ir),
            }
        }
        DomainSpec::Rect { nx, ny, x0, x1, y0, y1 } => {
            let idx = nx as f64 / (x1 - x0);
            let idy = ny as f64 / (y1 - y0);
            let w = ny + 2;
            let q = domain.pad(n);
            let c = p[q];
            let (e, wv, nn, s) = (p[q + w], p[q - w], p[q + 1], p[q - 1]);
            let ux = 0.5 * (e - wv) * idx;
            let uy = 0.5 * (nn - s) * idy;
            let uxx = (e - 2.0 * c + wv) * (idx * idx);
            let uyy = (nn - 2.0 * c + s) * (idy * idy);
            let uxy = 0.25 * (p[q + w + 1] - p[q + w - 1] - p[q - w + 1] + p[q - w - 1]) * (idx * idy);
            NodeHessian {
                h: SymMatrix2::new(uxx, uxy, uyy),
                grad_sq: ux * ux + uy * uy,
            }
        }
    }
}

/// `U = χ + ∇²u` per node with its eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianFrameField {
    domain: Arc<Domain>,
    u: Vec<SymMatrix2>,
    eigs: Vec<[f64; 2]>,
    grad_sq: Vec<f64>,
}

impl HessianFrameField {
    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn matrix(&self, n: usize) -> SymMatrix2 {
        self.u[n]
    }

    pub fn matrices(&self) -> &[SymMatrix2] {
        &self.u
    }

    /// Eigenvalues at node `n`, nonincreasing.
    pub fn eigenvalues(&self, n: usize) -> [f64; 2] {
        self.eigs[n]
    }

    pub fn eigen_tuple(&self, n: usize) -> EigenTuple {
        EigenTuple::new(self.eigs[n].to_vec()).expect("finite eigenvalues")
    }

    pub fn grad_sq(&self, n: usize) -> f64 {
        self.grad_sq[n]
    }
}

/// Samples `chi` and assembles with the default execution policy.
pub fn assemble_hessian(u: &GridFunction, chi: &ChiSpec) -> Result<HessianFrameField> {
    let cf = chi.sample(u.domain())?;
    Ok(assemble_hessian_with(u, &cf, Exec::default()))
}

/// Assembles `U` from a field whose ghosts are already filled.
pub fn assemble_hessian_with(u: &GridFunction, chi: &ChiField, exec: Exec) -> HessianFrameField {
    let d = Arc::clone(u.domain());
    let p = u.padded();
    let per = exec.map_nodes(d.len(), |n| {
        let nh = node_hessian(&d, p, n);
        let m = nh.h.add(&chi.at(n));
        (m, m.eigenvalues(), nh.grad_sq)
    });
    let mut um = Vec::with_capacity(per.len());
    let mut eigs = Vec::with_capacity(per.len());
    let mut grad_sq = Vec::with_capacity(per.len());
    for (m, e, g) in per {
        um.push(m);
        eigs.push(e);
        grad_sq.push(g);
    }
    HessianFrameField {
        domain: d,
        u: um,
        eigs,
        grad_sq,
    }
}
