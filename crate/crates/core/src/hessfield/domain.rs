use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GridError, Result};

/// Grid shape. The disk and radial grids cover the unit disk; the rectangle
/// defaults to the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        nr: usize,
        ntheta: usize,
    },
    Radial {
        nr: usize,
    },
    Rect {
        nx: usize,
        ny: usize,
        #[serde(default)]
        x0: f64,
        #[serde(default = "one")]
        x1: f64,
        #[serde(default)]
        y0: f64,
        #[serde(default = "one")]
        y1: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn disk(nr: usize, ntheta: usize) -> Self {
        Self::Disk { nr, ntheta }
    }

    pub fn radial(nr: usize) -> Self {
        Self::Radial { nr }
    }

    pub fn unit_square(nx: usize, ny: usize) -> Self {
        Self::Rect {
            nx,
            ny,
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Disk { .. } => "disk",
            Self::Radial { .. } => "radial",
            Self::Rect { .. } => "rect",
        }
    }
}

/// Which boundary a face lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The circle `r = 1`.
    Outer,
    West,
    East,
    South,
    North,
}

/// Geometry of one interior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeom {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub theta: f64,
    /// Angle of the local orthonormal frame relative to Cartesian axes.
    pub frame_angle: f64,
    /// Cell measure used by midpoint quadrature.
    pub measure: f64,
}

/// A boundary face: midpoint, length, and the ghost/interior pair whose
/// difference realizes the normal derivative there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub x: f64,
    pub y: f64,
    pub side: Side,
    pub measure: f64,
    /// Padded index of the ghost cell across this face.
    pub ghost: usize,
    /// Padded index of the interior cell adjacent to the face.
    pub adjacent: usize,
    /// Distance between the two cell centers.
    pub spacing: f64,
}

/// Structured grid with a ghost layer of width one.
///
/// Storage is padded:
/// * radial: `nr + 2` entries, index `i + 1` for ring `i ∈ -1..=nr`;
/// * disk: `(nr + 2) × ntheta`, ring-major; ring `-1` is the pole ghost
///   ring, whose entry `j` mirrors ring 0 at angle `θ_j + π`;
/// * rect: `(nx + 2) × (ny + 2)`, x-major, corners included.
///
/// Interior nodes are numbered ring-then-angle (disk) or x-then-y (rect).
#[derive(Debug)]
pub struct Domain {
    spec: DomainSpec,
    nodes: Vec<NodeGeom>,
    faces: Vec<Face>,
    /// `(ghost, source)`: ghosts that copy an interior value (pole pairing).
    pole_pairs: Vec<(usize, usize)>,
    /// `(corner, a, b, c)`: rect corner ghosts set to `a + b - c`.
    corners: Vec<(usize, usize, usize, usize)>,
    /// Padded index and Cartesian position of every ghost cell.
    ghost_points: Vec<(usize, f64, f64)>,
    padded_len: usize,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// Builds and caches the node geometry of a grid.
pub fn build_domain(spec: DomainSpec) -> Result<Arc<Domain>> {
    Domain::build(spec).map(Arc::new)
}

impl Domain {
    pub fn build(spec: DomainSpec) -> Result<Self> {
        match spec {
            DomainSpec::Disk { nr, ntheta } => Self::build_disk(nr, ntheta),
            DomainSpec::Radial { nr } => Self::build_radial(nr),
            DomainSpec::Rect { nx, ny, x0, x1, y0, y1 } => Self::build_rect(nx, ny, [x0, x1, y0, y1]),
        }
    }

    fn build_disk(nr: usize, nt: usize) -> Result<Self> {
        if nr == 0 || nt == 0 {
            return Err(GridError::InvalidDomain(format!(
                "disk needs positive cell counts, got nr = {nr}, ntheta = {nt}"
            )));
        }
        if !nt.is_multiple_of(2) || nt < 4 {
            return Err(GridError::InvalidDomain(format!(
                "disk needs an even ntheta >= 4 for the pole pairing, got {nt}"
            )));
        }
        let dr = 1.0 / nr as f64;
        let dth = TAU / nt as f64;
        let mut nodes = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..nt {
                let th = j as f64 * dth;
                let (s, c) = th.sin_cos();
                nodes.push(NodeGeom {
                    x: r * c,
                    y: r * s,
                    r,
                    theta: th,
                    frame_angle: th,
                    measure: r * dr * dth,
                });
            }
        }
        let pad = |i: isize, j: usize| ((i + 1) as usize) * nt + j;
        let mut faces = Vec::with_capacity(nt);
        let mut pole_pairs = Vec::with_capacity(nt);
        let mut ghost_points = Vec::with_capacity(2 * nt);
        let r0 = 0.5 * dr;
        let r_out = 1.0 + 0.5 * dr;
        for j in 0..nt {
            let th = j as f64 * dth;
            let (s, c) = th.sin_cos();
            faces.push(Face {
                x: c,
                y: s,
                side: Side::Outer,
                measure: dth,
                ghost: pad(nr as isize, j),
                adjacent: pad(nr as isize - 1, j),
                spacing: dr,
            });
            pole_pairs.push((pad(-1, j), pad(0, (j + nt / 2) % nt)));
            ghost_points.push((pad(-1, j), -r0 * c, -r0 * s));
            ghost_points.push((pad(nr as isize, j), r_out * c, r_out * s));
        }
        Ok(Self {
            spec: DomainSpec::Disk { nr, ntheta: nt },
            nodes,
            faces,
            pole_pairs,
            corners: Vec::new(),
            ghost_points,
            padded_len: (nr + 2) * nt,
        })
    }

    fn build_radial(nr: usize) -> Result<Self> {
        if nr == 0 {
            return Err(GridError::InvalidDomain("radial grid needs nr > 0".into()));
        }
        let dr = 1.0 / nr as f64;
        let nodes = (0..nr)
            .map(|i| {
                let r = (i as f64 + 0.5) * dr;
                NodeGeom {
                    x: r,
                    y: 0.0,
                    r,
                    theta: 0.0,
                    frame_angle: 0.0,
                    measure: TAU * r * dr,
                }
            })
            .collect();
        let faces = vec![Face {
            x: 1.0,
            y: 0.0,
            side: Side::Outer,
            measure: TAU,
            ghost: nr + 1,
            adjacent: nr,
            spacing: dr,
        }];
        Ok(Self {
            spec: DomainSpec::Radial { nr },
            nodes,
            faces,
            pole_pairs: vec![(0, 1)],
            corners: Vec::new(),
            ghost_points: vec![(0, -0.5 * dr, 0.0), (nr + 1, 1.0 + 0.5 * dr, 0.0)],
            padded_len: nr + 2,
        })
    }

    fn build_rect(nx: usize, ny: usize, b: [f64; 4]) -> Result<Self> {
        let [x0, x1, y0, y1] = b;
        if nx == 0 || ny == 0 {
            return Err(GridError::InvalidDomain(format!(
                "rect needs positive cell counts, got {nx} x {ny}"
            )));
        }
        if !(x1 > x0 && y1 > y0) || b.iter().any(|v| !v.is_finite()) {
            return Err(GridError::InvalidDomain(format!(
                "rect bounds must be finite and increasing, got {b:?}"
            )));
        }
        let dx = (x1 - x0) / nx as f64;
        let dy = (y1 - y0) / ny as f64;
        let cx = |i: isize| x0 + (i as f64 + 0.5) * dx;
        let cy = |j: isize| y0 + (j as f64 + 0.5) * dy;
        let w = ny + 2;
        let pad = |i: isize, j: isize| ((i + 1) as usize) * w + (j + 1) as usize;

        let mut nodes = Vec::with_capacity(nx * ny);
        for i in 0..nx as isize {
            for j in 0..ny as isize {
                let (x, y) = (cx(i), cy(j));
                let mut theta = y.atan2(x);
                if theta < 0.0 {
                    theta += TAU;
                }
                nodes.push(NodeGeom {
                    x,
                    y,
                    r: x.hypot(y),
                    theta,
                    frame_angle: 0.0,
                    measure: dx * dy,
                });
            }
        }

        let (nxi, nyi) = (nx as isize, ny as isize);
        let mut faces = Vec::with_capacity(2 * (nx + ny));
        for j in 0..nyi {
            faces.push(Face {
                x: x0,
                y: cy(j),
                side: Side::West,
                measure: dy,
                ghost: pad(-1, j),
                adjacent: pad(0, j),
                spacing: dx,
            });
        }
        for j in 0..nyi {
            faces.push(Face {
                x: x1,
                y: cy(j),
                side: Side::East,
                measure: dy,
                ghost: pad(nxi, j),
                adjacent: pad(nxi - 1, j),
                spacing: dx,
            });
        }
        for i in 0..nxi {
            faces.push(Face {
                x: cx(i),
                y: y0,
                side: Side::South,
                measure: dx,
                ghost: pad(i, -1),
                adjacent: pad(i, 0),
                spacing: dy,
            });
        }
        for i in 0..nxi {
            faces.push(Face {
                x: cx(i),
                y: y1,
                side: Side::North,
                measure: dx,
                ghost: pad(i, nyi),
                adjacent: pad(i, nyi - 1),
                spacing: dy,
            });
        }

        let corners = [
            (-1, -1, 0, 0),
            (-1, nyi, 0, nyi - 1),
            (nxi, -1, nxi - 1, 0),
            (nxi, nyi, nxi - 1, nyi - 1),
        ]
        .iter()
        .map(|&(gi, gj, ii, jj)| (pad(gi, gj), pad(gi, jj), pad(ii, gj), pad(ii, jj)))
        .collect();

        let mut ghost_points = Vec::new();
        for i in -1..=nxi {
            for j in -1..=nyi {
                if i == -1 || j == -1 || i == nxi || j == nyi {
                    ghost_points.push((pad(i, j), cx(i), cy(j)));
                }
            }
        }

        Ok(Self {
            spec: DomainSpec::Rect { nx, ny, x0, x1, y0, y1 },
            nodes,
            faces,
            pole_pairs: Vec::new(),
            corners,
            ghost_points,
            padded_len: (nx + 2) * w,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeGeom] {
        &self.nodes
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    pub(crate) fn pole_pairs(&self) -> &[(usize, usize)] {
        &self.pole_pairs
    }

    pub(crate) fn corners(&self) -> &[(usize, usize, usize, usize)] {
        &self.corners
    }

    pub(crate) fn ghost_points(&self) -> &[(usize, f64, f64)] {
        &self.ghost_points
    }

    /// Padded storage index of interior node `n`.
    #[inline]
    pub fn pad(&self, n: usize) -> usize {
        match self.spec {
            DomainSpec::Radial { .. } => n + 1,
            DomainSpec::Disk { ntheta, .. } => n + ntheta,
            DomainSpec::Rect { ny, .. } => {
                let (i, j) = (n / ny, n % ny);
                (i + 1) * (ny + 2) + j + 1
            }
        }
    }

    /// Total measure of the domain (π for the disk grids).
    pub fn volume(&self) -> f64 {
        self.nodes.iter().map(|n| n.measure).sum()
    }

    /// Total measure of the boundary.
    pub fn perimeter(&self) -> f64 {
        self.faces.iter().map(|f| f.measure).sum()
    }

    /// `(Δr, Δθ)` for polar grids (`Δθ = 2π` on the radial grid) and
    /// `(Δx, Δy)` for the rectangle.
    pub fn spacings(&self) -> (f64, f64) {
        match self.spec {
            DomainSpec::Disk { nr, ntheta } => (1.0 / nr as f64, TAU / ntheta as f64),
            DomainSpec::Radial { nr } => (1.0 / nr as f64, TAU),
            DomainSpec::Rect { nx, ny, x0, x1, y0, y1 } => ((x1 - x0) / nx as f64, (y1 - y0) / ny as f64),
        }
    }

    pub fn is_polar(&self) -> bool {
        !matches!(self.spec, DomainSpec::Rect { .. })
    }

    /// Node nearest the centroid, lowest index on ties.
    pub fn centroid_node(&self) -> usize {
        let (cx, cy) = match self.spec {
            DomainSpec::Rect { x0, x1, y0, y1, .. } => (0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            _ => (0.0, 0.0),
        };
        let mut best = (f64::INFINITY, 0);
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n.x - cx).hypot(n.y - cy);
            // ties are detected up to rounding in the node coordinates
            if d < best.0 - 1e-12 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Angles at which inputs are sampled to confirm radial symmetry.
    pub fn radial_probe_angles() -> [f64; 4] {
        [0.0, 0.5 * PI, 2.0, 4.0]
    }
}
