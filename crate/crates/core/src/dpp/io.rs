//! Flat little-endian layout: box `min.x, min.y, min.z, max.x, max.y, max.z`
//! and spacings `h_xy, h_z` as `f64`, dims `nx, ny, nz` as `u64`, then
//! the node values (`x` fastest). The axisymmetric grid is tagged by
//! `nz = 0` and stores `(ρ_min, -π/2, 0, ρ_max, π/2, 0)`, spacings
//! `(h_ρ, h_φ)` and dims `(n_ρ, n_φ, 0)`, values `ρ` fastest.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::hgroup::Point;

use super::grid::{AxiGrid, BoxGrid, Grid, GridField};

const HEADER_LEN: usize = 8 * 11;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_binary<W: Write>(field: &GridField, mut w: W) -> Result<()> {
    let (bx, h, dims): ([f64; 6], [f64; 2], [u64; 3]) = match &field.grid {
        Grid::Box(b) => {
            let max = |o: f64, h: f64, n: usize| o + (n - 1) as f64 * h;
            (
                [
                    b.origin.x,
                    b.origin.y,
                    b.origin.z,
                    max(b.origin.x, b.h[0], b.dims[0]),
                    max(b.origin.y, b.h[1], b.dims[1]),
                    max(b.origin.z, b.h[2], b.dims[2]),
                ],
                [b.h[0], b.h[2]],
                [b.dims[0] as u64, b.dims[1] as u64, b.dims[2] as u64],
            )
        }
        Grid::Axisymmetric(a) => (
            [a.rho_min, -FRAC_PI_2, 0.0, a.rho_min + (a.n_rho - 1) as f64 * a.h_rho, FRAC_PI_2, 0.0],
            [a.h_rho, a.h_phi],
            [a.n_rho as u64, a.n_phi as u64, 0],
        ),
    };
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * field.values.len());
    for v in bx.iter().chain(h.iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for d in dims {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridField> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(io_err)?;
    if buf.len() < HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    let word = |i: usize| -> [u8; 8] { buf[8 * i..8 * i + 8].try_into().expect("8 bytes") };
    let f = |i: usize| f64::from_le_bytes(word(i));
    let u = |i: usize| u64::from_le_bytes(word(i)) as usize;
    let (nx, ny, nz) = (u(8), u(9), u(10));
    let grid = if nz == 0 {
        if nx < 1 || ny < 3 {
            return Err(Error::Format("degenerate axisymmetric dims".into()));
        }
        Grid::Axisymmetric(AxiGrid { rho_min: f(0), h_rho: f(6), n_rho: nx, h_phi: f(7), n_phi: ny })
    } else {
        Grid::Box(BoxGrid { origin: Point::new(f(0), f(1), f(2)), h: [f(6), f(6), f(7)], dims: [nx, ny, nz] })
    };
    let n = grid.len();
    if buf.len() != HEADER_LEN + 8 * n {
        return Err(Error::Format(format!("expected {} value bytes, found {}", 8 * n, buf.len() - HEADER_LEN)));
    }
    let values = (0..n).map(|i| f(11 + i)).collect();
    GridField::new(grid, values)
}

/// `x,y,z,value` rows with a header, one per node.
pub fn write_csv<W: Write>(field: &GridField, mut w: W) -> Result<()> {
    writeln!(w, "x,y,z,value").map_err(io_err)?;
    for (p, v) in field.node_points() {
        writeln!(w, "{},{},{},{}", p.x, p.y, p.z, v).map_err(io_err)?;
    }
    Ok(())
}
