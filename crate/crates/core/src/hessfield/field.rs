use std::sync::Arc;

use super::domain::{Domain, Side};
use super::{GridError, Result};
use crate::expr::{Expression, Vars};

/// Scalar samples on the interior nodes plus the ghost layer.
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: Arc<Domain>,
    data: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.data == other.data
    }
}

impl GridFunction {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self {
            domain: Arc::clone(domain),
            data: vec![0.0; domain.padded_len()],
        }
    }

    /// Interior values in node order; ghosts start at zero.
    pub fn from_interior(domain: &Arc<Domain>, values: &[f64]) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(GridError::DomainMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                domain.len()
            )));
        }
        let mut g = Self::zeros(domain);
        for (n, &v) in values.iter().enumerate() {
            let p = domain.pad(n);
            g.data[p] = v;
        }
        Ok(g)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// Wraps a full padded array (interior and ghosts).
    pub fn from_padded(domain: &Arc<Domain>, data: Vec<f64>) -> Result<Self> {
        if data.len() != domain.padded_len() {
            return Err(GridError::DomainMismatch(format!(
                "{} padded values for {} slots",
                data.len(),
                domain.padded_len()
            )));
        }
        Ok(Self {
            domain: Arc::clone(domain),
            data,
        })
    }

    pub fn same_domain(&self, other: &Arc<Domain>) -> Result<()> {
        if Arc::ptr_eq(&self.domain, other) || *self.domain == **other {
            Ok(())
        } else {
            Err(GridError::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.domain.spec(),
                other.spec()
            )))
        }
    }

    #[inline]
    pub fn get(&self, node: usize) -> f64 {
        self.data[self.domain.pad(node)]
    }

    #[inline]
    pub fn set(&mut self, node: usize, v: f64) {
        let p = self.domain.pad(node);
        self.data[p] = v;
    }

    pub fn padded(&self) -> &[f64] {
        &self.data
    }

    pub fn padded_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn interior(&self) -> Vec<f64> {
        (0..self.domain.len()).map(|n| self.get(n)).collect()
    }

    /// Adds `scale * incr[n]` to each interior node.
    pub fn axpy_interior(&mut self, scale: f64, incr: &[f64]) {
        debug_assert_eq!(incr.len(), self.domain.len());
        for (n, &d) in incr.iter().enumerate() {
            let p = self.domain.pad(n);
            self.data[p] += scale * d;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for v in &mut self.data {
            *v += c;
        }
    }

    pub fn sup(&self) -> f64 {
        (0..self.domain.len())
            .map(|n| self.get(n))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        (0..self.domain.len())
            .map(|n| self.get(n))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        (0..self.domain.len()).map(|n| self.get(n).abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        (0..self.domain.len()).all(|n| self.get(n).is_finite())
    }

    /// Fills the ghost layer so that the inner-normal derivative equals `phi`.
    pub fn fill_ghosts(&mut self, phi: &BoundaryData) -> Result<()> {
        phi.same_domain(&self.domain)?;
        let d = Arc::clone(&self.domain);
        for (f, &g) in d.faces().iter().zip(&phi.values) {
            // inner normal ν: (u_ghost - u_adjacent)/Δ = -u_ν = -φ
            self.data[f.ghost] = self.data[f.adjacent] - f.spacing * g;
        }
        for &(ghost, src) in d.pole_pairs() {
            self.data[ghost] = self.data[src];
        }
        for &(c, a, b, m) in d.corners() {
            self.data[c] = self.data[a] + self.data[b] - self.data[m];
        }
        Ok(())
    }

    /// Largest `|u_ghost - (u_adjacent - Δ·φ)|` over all faces.
    pub fn neumann_residual(&self, phi: &BoundaryData) -> Result<f64> {
        phi.same_domain(&self.domain)?;
        Ok(self
            .domain
            .faces()
            .iter()
            .zip(&phi.values)
            .map(|(f, &g)| (self.data[f.ghost] - (self.data[f.adjacent] - f.spacing * g)).abs())
            .fold(0.0, f64::max))
    }

    /// Discrete inner-normal derivative `(u_adjacent - u_ghost)/Δ` per face.
    pub fn normal_derivative(&self) -> BoundaryData {
        let values = self
            .domain
            .faces()
            .iter()
            .map(|f| (self.data[f.adjacent] - self.data[f.ghost]) / f.spacing)
            .collect();
        BoundaryData {
            domain: Arc::clone(&self.domain),
            values,
        }
    }
}

/// Returns a copy of `u` with its ghost layer filled for Neumann data `phi`.
pub fn fill_neumann_ghosts(u: &GridFunction, phi: &BoundaryData) -> Result<GridFunction> {
    let mut out = u.clone();
    out.fill_ghosts(phi)?;
    Ok(out)
}

/// Samples an expression at the interior nodes.
pub fn sample_field(expr: &Expression, domain: &Arc<Domain>) -> Result<GridFunction> {
    let mut g = GridFunction::zeros(domain);
    for (n, node) in domain.nodes().iter().enumerate() {
        let v = Vars {
            x: node.x,
            y: node.y,
            r: node.r,
            theta: node.theta,
            t: 0.0,
        };
        g.set(n, expr.eval(&v)?);
    }
    Ok(g)
}

/// Samples an expression at the interior nodes and at the ghost cells, so
/// the ghosts hold the exact smooth extension of the field.
pub fn sample_field_with_ghosts(expr: &Expression, domain: &Arc<Domain>) -> Result<GridFunction> {
    let mut g = sample_field(expr, domain)?;
    for &(p, x, y) in domain.ghost_points() {
        g.data[p] = expr.eval(&Vars::cartesian(x, y))?;
    }
    Ok(g)
}

/// Values on the boundary faces, in face order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl BoundaryData {
    pub fn constant(domain: &Arc<Domain>, value: f64) -> Self {
        Self {
            domain: Arc::clone(domain),
            values: vec![value; domain.faces().len()],
        }
    }

    pub fn from_values(domain: &Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.faces().len() {
            return Err(GridError::DomainMismatch(format!(
                "{} boundary values for {} faces",
                values.len(),
                domain.faces().len()
            )));
        }
        Ok(Self {
            domain: Arc::clone(domain),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    fn same_domain(&self, other: &Arc<Domain>) -> Result<()> {
        if Arc::ptr_eq(&self.domain, other) || *self.domain == **other {
            Ok(())
        } else {
            Err(GridError::DomainMismatch(format!(
                "boundary data on {:?}, field on {:?}",
                self.domain.spec(),
                other.spec()
            )))
        }
    }
}

/// Neumann data: one expression for the whole boundary with optional
/// per-side overrides on the rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryExpr {
    pub default: Expression,
    pub west: Option<Expression>,
    pub east: Option<Expression>,
    pub south: Option<Expression>,
    pub north: Option<Expression>,
}

impl BoundaryExpr {
    pub fn uniform(default: Expression) -> Self {
        Self {
            default,
            west: None,
            east: None,
            south: None,
            north: None,
        }
    }

    pub fn for_side(&self, side: Side) -> &Expression {
        let o = match side {
            Side::Outer => None,
            Side::West => self.west.as_ref(),
            Side::East => self.east.as_ref(),
            Side::South => self.south.as_ref(),
            Side::North => self.north.as_ref(),
        };
        o.unwrap_or(&self.default)
    }

    /// Evaluates at the face midpoints.
    pub fn sample(&self, domain: &Arc<Domain>) -> Result<BoundaryData> {
        let values = domain
            .faces()
            .iter()
            .map(|f| self.for_side(f.side).eval(&Vars::cartesian(f.x, f.y)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(BoundaryData {
            domain: Arc::clone(domain),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hessfield::{build_domain, DomainSpec};

    fn ex(s: &str) -> Expression {
        Expression::parse(s).unwrap()
    }

    #[test]
    fn sampling() {
        let d = build_domain(DomainSpec::disk(4, 8)).unwrap();
        let g = sample_field(&ex("r^2"), &d).unwrap();
        for (n, node) in d.nodes().iter().enumerate() {
            assert_eq!(g.get(n), node.r * node.r);
        }
        let a = sample_field(&ex("0.5*(x^2+y^2)"), &d).unwrap();
        let b = sample_field(&ex("0.5*r^2"), &d).unwrap();
        for n in 0..d.len() {
            assert!((a.get(n) - b.get(n)).abs() < 1e-15);
        }
        let d = build_domain(DomainSpec::unit_square(5, 3)).unwrap();
        let g = sample_field(&ex("x"), &d).unwrap();
        for (n, node) in d.nodes().iter().enumerate() {
            assert_eq!(g.get(n), node.x);
        }
        assert!(matches!(sample_field(&ex("log(x - 2)"), &d), Err(GridError::Expr(_))));
    }

    #[test]
    fn half_r_squared_ghost_matches_exact_value() {
        for nr in [4, 16, 64] {
            let d = build_domain(DomainSpec::disk(nr, 8)).unwrap();
            let mut u = sample_field(&ex("0.5*r^2"), &d).unwrap();
            let phi = BoundaryData::constant(&d, -1.0);
            u.fill_ghosts(&phi).unwrap();
            let dr = 1.0 / nr as f64;
            let exact = 0.5 * (1.0 + 0.5 * dr).powi(2);
            for f in d.faces() {
                assert!((u.padded()[f.ghost] - exact).abs() < 1e-14);
            }
            assert!(u.neumann_residual(&phi).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn zero_flux_ghosts_mirror() {
        let d = build_domain(DomainSpec::unit_square(6, 4)).unwrap();
        let mut u = sample_field(&ex("2.5"), &d).unwrap();
        u.fill_ghosts(&BoundaryData::constant(&d, 0.0)).unwrap();
        assert!(u.padded().iter().all(|&v| v == 2.5));

        let mut u = sample_field(&ex("cos(pi*x)*cos(pi*y)"), &d).unwrap();
        u.fill_ghosts(&BoundaryData::constant(&d, 0.0)).unwrap();
        for f in d.faces() {
            assert_eq!(u.padded()[f.ghost], u.padded()[f.adjacent]);
        }
    }

    #[test]
    fn rect_sides_follow_inner_normal() {
        // u = x has u_ν = +1 on the west side and -1 on the east side
        let d = build_domain(DomainSpec::unit_square(8, 8)).unwrap();
        let exact = sample_field_with_ghosts(&ex("x + 0.3*y"), &d).unwrap();
        let mut phi = BoundaryExpr::uniform(ex("0"));
        phi.west = Some(ex("1"));
        phi.east = Some(ex("-1"));
        phi.south = Some(ex("0.3"));
        phi.north = Some(ex("-0.3"));
        let phi = phi.sample(&d).unwrap();
        let mut u = exact.clone();
        u.fill_ghosts(&phi).unwrap();
        for (a, b) in u.padded().iter().zip(exact.padded()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pole_ghost_ring_pairs_opposite_angles() {
        let d = build_domain(DomainSpec::disk(5, 12)).unwrap();
        let exact = sample_field_with_ghosts(&ex("x + 2*y + x*y"), &d).unwrap();
        let mut u = exact.clone();
        u.fill_ghosts(&BoundaryData::constant(&d, 0.0)).unwrap();
        for j in 0..12 {
            assert!((u.padded()[j] - exact.padded()[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = build_domain(DomainSpec::disk(4, 8)).unwrap();
        let b = build_domain(DomainSpec::disk(8, 8)).unwrap();
        let mut u = GridFunction::zeros(&a);
        assert!(matches!(
            u.fill_ghosts(&BoundaryData::constant(&b, 0.0)),
            Err(GridError::DomainMismatch(_))
        ));
    }
}
