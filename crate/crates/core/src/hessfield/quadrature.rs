use std::io::{self, Write};
use std::sync::Arc;

use super::domain::{Domain, DomainSpec};
use super::field::{BoundaryData, GridFunction};
use super::Result;
use crate::output::fmt17;

/// Midpoint rule `Σ f·(cell measure)` over interior nodes.
pub fn integrate_volume(f: &GridFunction) -> f64 {
    f.domain()
        .nodes()
        .iter()
        .enumerate()
        .map(|(n, g)| f.get(n) * g.measure)
        .sum()
}

/// As [`integrate_volume`], rejecting a field sampled on another grid.
pub fn integrate_volume_on(domain: &Arc<Domain>, f: &GridFunction) -> Result<f64> {
    f.same_domain(domain)?;
    Ok(integrate_volume(f))
}

/// `Σ g·(face measure)` over boundary faces.
pub fn integrate_boundary(g: &BoundaryData) -> f64 {
    g.domain()
        .faces()
        .iter()
        .zip(g.values())
        .map(|(f, v)| v * f.measure)
        .sum()
}

/// Writes interior values as CSV, one row per node in node order.
pub fn write_grid_csv<W: Write>(u: &GridFunction, mut w: W) -> io::Result<()> {
    let d = u.domain();
    let polar = !matches!(d.spec(), DomainSpec::Rect { .. });
    writeln!(w, "{}", if polar { "r,theta,value" } else { "x,y,value" })?;
    for (n, g) in d.nodes().iter().enumerate() {
        let (a, b) = if polar { (g.r, g.theta) } else { (g.x, g.y) };
        writeln!(w, "{},{},{}", fmt17(a), fmt17(b), fmt17(u.get(n)))?;
    }
    Ok(())
}
