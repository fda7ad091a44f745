use super::{Result, VerifyError};
use crate::hessfield::{build_domain, BoundaryData, DomainSpec, GridFunction, Side};

/// Even extension of a rect field across one face with zero Neumann data.
///
/// The doubled grid keeps the cell size; ghosts of the result are copied
/// from the matching ghosts of `u`.
pub fn reflection_extend(u: &GridFunction, phi: &BoundaryData, side: Side) -> Result<GridFunction> {
    let d = u.domain();
    let DomainSpec::Rect { nx, ny, x0, x1, y0, y1 } = *d.spec() else {
        return Err(VerifyError::InvalidInput("reflection needs a rect domain".into()));
    };
    if side == Side::Outer {
        return Err(VerifyError::InvalidInput("reflection needs a rect side".into()));
    }
    u.same_domain(phi.domain())?;
    for (f, v) in d.faces().iter().zip(phi.values()) {
        if f.side == side && v.abs() > 1e-14 {
            return Err(VerifyError::NonzeroFlux { side, value: *v });
        }
    }
    let (lx, ly) = (x1 - x0, y1 - y0);
    let (spec, nx2, ny2) = match side {
        Side::West => (
            DomainSpec::Rect {
                nx: 2 * nx,
                ny,
                x0: x0 - lx,
                x1,
                y0,
                y1,
            },
            2 * nx,
            ny,
        ),
        Side::East => (
            DomainSpec::Rect {
                nx: 2 * nx,
                ny,
                x0,
                x1: x1 + lx,
                y0,
                y1,
            },
            2 * nx,
            ny,
        ),
        Side::South => (
            DomainSpec::Rect {
                nx,
                ny: 2 * ny,
                x0,
                x1,
                y0: y0 - ly,
                y1,
            },
            nx,
            2 * ny,
        ),
        Side::North => (
            DomainSpec::Rect {
                nx,
                ny: 2 * ny,
                x0,
                x1,
                y0,
                y1: y1 + ly,
            },
            nx,
            2 * ny,
        ),
        Side::Outer => unreachable!(),
    };
    let ext = build_domain(spec)?;
    let (nxi, nyi) = (nx as isize, ny as isize);
    // source index along the doubled axis; both ranges include the ghosts
    let src_x = |i: isize| match side {
        Side::West if i >= nxi => i - nxi,
        Side::West => nxi - 1 - i,
        Side::East if i >= nxi => 2 * nxi - 1 - i,
        _ => i,
    };
    let src_y = |j: isize| match side {
        Side::South if j >= nyi => j - nyi,
        Side::South => nyi - 1 - j,
        Side::North if j >= nyi => 2 * nyi - 1 - j,
        _ => j,
    };
    let w_old = ny + 2;
    let w_new = ny2 + 2;
    let old = u.padded();
    let mut data = vec![0.0; ext.padded_len()];
    for i in -1..=nx2 as isize {
        for j in -1..=ny2 as isize {
            let (si, sj) = (src_x(i), src_y(j));
            let q_new = (i + 1) as usize * w_new + (j + 1) as usize;
            let q_old = (si + 1) as usize * w_old + (sj + 1) as usize;
            data[q_new] = old[q_old];
        }
    }
    Ok(GridFunction::from_padded(&ext, data)?)
}
