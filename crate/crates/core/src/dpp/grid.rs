use std::f64::consts::FRAC_PI_2;

use crate::domains::{BoundingBox, Domain};
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::Point;

/// Relative distance to a node below which a coordinate snaps onto it, so
/// that interpolation at nodes returns the stored value exactly.
const SNAP: f64 = 1e-9;

/// Default number of latitude nodes of the axisymmetric grid.
pub const DEFAULT_PHI_NODES: usize = 49;

/// Discretization of the solver's computational region.
///
/// `Box` is a tensor grid on a Euclidean box with spacing `h_xy` in `x`
/// and `y` and `h_z` in `z`. `Axisymmetric` is meant for domains and data
/// invariant under rotations about the `z`-axis: it stores values on the
/// half-plane `y = 0, x ≥ 0` in gauge-polar coordinates
/// `(ρ, φ) = (|q|_K, atan2(4z, |q_h|²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridSpec {
    Box { bbox: BoundingBox, h_xy: f64, h_z: f64 },
    Axisymmetric { rho_min: f64, rho_max: f64, h_rho: f64, n_phi: usize },
}

impl GridSpec {
    /// Box grid covering the domain's bounding box inflated by a collar
    /// that contains every point reachable in one step of reach `reach`
    /// from inside, plus two cells. Defaults: `h_xy = ε/4`, `h_z = h_xy²/4`.
    pub fn box_for<D: Domain + ?Sized>(
        dom: &D,
        eps: f64,
        reach: f64,
        h_xy: Option<f64>,
        h_z: Option<f64>,
    ) -> Result<Self> {
        ensure_positive("eps", eps)?;
        let h_xy = h_xy.unwrap_or(0.25 * eps);
        let h_z = h_z.unwrap_or(0.25 * h_xy * h_xy);
        ensure_positive("h_xy", h_xy)?;
        ensure_positive("h_z", h_z)?;
        let b = dom.bounding_box();
        let m = b.max_hor_norm();
        let dxy = reach + 2.0 * h_xy;
        let dz = 0.25 * reach * reach + 0.5 * reach * (m + reach + 2.0 * h_xy) + 3.0 * h_z;
        Ok(GridSpec::Box { bbox: b.inflate(dxy, dz), h_xy, h_z })
    }

    /// Gauge-polar grid for an axisymmetric domain, covering the gauge
    /// range of the domain widened by `reach` plus two cells.
    pub fn axisymmetric_for<D: Domain + ?Sized>(
        dom: &D,
        eps: f64,
        reach: f64,
        h_rho: Option<f64>,
        n_phi: Option<usize>,
    ) -> Result<Self> {
        ensure_positive("eps", eps)?;
        let (lo, hi) = dom.axisymmetric_gauge_range().ok_or_else(|| {
            Error::ConfigInvalid("axisymmetric grid needs a domain symmetric about the z-axis".into())
        })?;
        let h_rho = h_rho.unwrap_or(0.25 * eps);
        ensure_positive("h_rho", h_rho)?;
        let pad = reach + 2.0 * h_rho;
        Ok(GridSpec::Axisymmetric {
            rho_min: (lo - pad).max(0.0),
            rho_max: hi + pad,
            h_rho,
            n_phi: n_phi.unwrap_or(DEFAULT_PHI_NODES),
        })
    }

    pub fn build(&self) -> Result<Grid> {
        match *self {
            GridSpec::Box { bbox, h_xy, h_z } => {
                ensure_positive("h_xy", h_xy)?;
                ensure_positive("h_z", h_z)?;
                let n = |lo: f64, hi: f64, h: f64| ((hi - lo) / h - SNAP).ceil().max(1.0) as usize + 1;
                let dims =
                    [n(bbox.min.x, bbox.max.x, h_xy), n(bbox.min.y, bbox.max.y, h_xy), n(bbox.min.z, bbox.max.z, h_z)];
                let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
                match total {
                    Some(t) if t <= MAX_NODES => {}
                    _ => {
                        return Err(Error::ConfigInvalid(format!(
                            "box grid with dims {dims:?} exceeds {MAX_NODES} nodes"
                        )))
                    }
                }
                Ok(Grid::Box(BoxGrid { origin: bbox.min, h: [h_xy, h_xy, h_z], dims }))
            }
            GridSpec::Axisymmetric { rho_min, rho_max, h_rho, n_phi } => {
                ensure_positive("h_rho", h_rho)?;
                if rho_min < 0.0 || rho_max <= rho_min {
                    return Err(Error::ConfigInvalid(format!("gauge range [{rho_min}, {rho_max}] is empty")));
                }
                if n_phi < 3 {
                    return Err(Error::ConfigInvalid("axisymmetric grid needs n_phi >= 3".into()));
                }
                let n_rho = ((rho_max - rho_min) / h_rho - SNAP).ceil().max(1.0) as usize + 1;
                Ok(Grid::Axisymmetric(AxiGrid {
                    rho_min,
                    h_rho,
                    n_rho,
                    h_phi: 2.0 * FRAC_PI_2 / (n_phi - 1) as f64,
                    n_phi,
                }))
            }
        }
    }
}

/// Upper bound on grid size.
pub const MAX_NODES: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxGrid {
    pub origin: Point,
    pub h: [f64; 3],
    pub dims: [usize; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiGrid {
    pub rho_min: f64,
    pub h_rho: f64,
    pub n_rho: usize,
    pub h_phi: f64,
    pub n_phi: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Box(BoxGrid),
    Axisymmetric(AxiGrid),
}

/// Interpolation weights: `value = u[idx[0]] + Σ_{m≥1} w[m]·(u[idx[m]] - u[idx[0]])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub idx: [usize; 8],
    pub w: [f64; 8],
    pub len: usize,
}

impl Stencil {
    pub fn apply(&self, u: &[f64]) -> f64 {
        let b = u[self.idx[0]];
        let mut acc = 0.0;
        for m in 1..self.len {
            acc += self.w[m] * (u[self.idx[m]] - b);
        }
        b + acc
    }
}

/// Cell index and fraction along one axis, snapping to nodes.
fn locate(t: f64, n: usize) -> Option<(usize, f64)> {
    let r = t.round();
    let t = if (t - r).abs() <= SNAP { r } else { t };
    if !(t >= 0.0 && t <= (n - 1) as f64) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let i = (t.floor() as usize).min(n - 2);
    Some((i, t - i as f64))
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Box(b) => b.dims[0] * b.dims[1] * b.dims[2],
            Grid::Axisymmetric(a) => a.n_rho * a.n_phi,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Corners per interpolation stencil.
    pub fn stencil_len(&self) -> usize {
        match self {
            Grid::Box(_) => 8,
            Grid::Axisymmetric(_) => 4,
        }
    }

    /// Representative point of a node. For the axisymmetric grid this is
    /// `(ρ√cos φ, 0, ρ² sin φ / 4)`.
    pub fn node_point(&self, idx: usize) -> Point {
        match self {
            Grid::Box(b) => {
                let [nx, ny, _] = b.dims;
                let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
                Point::new(
                    b.origin.x + i as f64 * b.h[0],
                    b.origin.y + j as f64 * b.h[1],
                    b.origin.z + k as f64 * b.h[2],
                )
            }
            Grid::Axisymmetric(a) => {
                let (i, j) = (idx % a.n_rho, idx / a.n_rho);
                let rho = a.rho_min + i as f64 * a.h_rho;
                let phi = -FRAC_PI_2 + j as f64 * a.h_phi;
                Point::new(rho * phi.cos().max(0.0).sqrt(), 0.0, 0.25 * rho * rho * phi.sin())
            }
        }
    }

    /// Interpolation stencil at `q`.
    pub fn stencil(&self, q: Point) -> Result<Stencil> {
        let out = || Error::OutsideGrid { x: q.x, y: q.y, z: q.z };
        match self {
            Grid::Box(b) => {
                let [nx, ny, nz] = b.dims;
                let (i, fx) = locate((q.x - b.origin.x) / b.h[0], nx).ok_or_else(out)?;
                let (j, fy) = locate((q.y - b.origin.y) / b.h[1], ny).ok_or_else(out)?;
                let (k, fz) = locate((q.z - b.origin.z) / b.h[2], nz).ok_or_else(out)?;
                let base = i + nx * (j + ny * k);
                let (sx, sy, sz) = (1.min(nx - 1), nx * 1.min(ny - 1), nx * ny * 1.min(nz - 1));
                let mut s = Stencil { idx: [base; 8], w: [0.0; 8], len: 8 };
                for c in 0..8 {
                    let (bx, by, bz) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                    s.idx[c] = base + bx * sx + by * sy + bz * sz;
                    s.w[c] = (if bx == 1 { fx } else { 1.0 - fx })
                        * (if by == 1 { fy } else { 1.0 - fy })
                        * (if bz == 1 { fz } else { 1.0 - fz });
                }
                Ok(s)
            }
            Grid::Axisymmetric(a) => {
                let rho = q.gauge();
                let phi = if rho > 0.0 { (4.0 * q.z).atan2(q.hor_norm_sq()) } else { 0.0 };
                let (i, fr) = locate((rho - a.rho_min) / a.h_rho, a.n_rho).ok_or_else(out)?;
                let (j, fp) = locate((phi + FRAC_PI_2) / a.h_phi, a.n_phi).ok_or_else(out)?;
                let base = i + a.n_rho * j;
                let sr = 1.min(a.n_rho - 1);
                let sp = a.n_rho * 1.min(a.n_phi - 1);
                let mut s = Stencil { idx: [base; 8], w: [0.0; 8], len: 4 };
                for c in 0..4 {
                    let (br, bp) = (c & 1, (c >> 1) & 1);
                    s.idx[c] = base + br * sr + bp * sp;
                    s.w[c] = (if br == 1 { fr } else { 1.0 - fr }) * (if bp == 1 { fp } else { 1.0 - fp });
                }
                Ok(s)
            }
        }
    }

    /// Flat index of `(i, j, k)` for box grids; `k` is ignored by the
    /// axisymmetric grid, where `(i, j)` index `(ρ, φ)`.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        match self {
            Grid::Box(b) => i + b.dims[0] * (j + b.dims[1] * k),
            Grid::Axisymmetric(a) => i + a.n_rho * j,
        }
    }
}

/// Node values on a grid with multilinear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(GridField { grid, values })
    }

    /// Interpolated value; an error outside the grid or where a corner
    /// value is not available (NaN).
    pub fn interpolate(&self, q: Point) -> Result<f64> {
        let s = self.grid.stencil(q)?;
        let v = s.apply(&self.values);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OutsideGrid { x: q.x, y: q.y, z: q.z })
        }
    }

    pub fn node_points(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.grid.node_point(i), v))
    }
}

/// A grid field seen as a scalar field (interpolation; NaN outside).
impl crate::calculus::ScalarField for GridField {
    fn value(&self, q: Point) -> f64 {
        self.interpolate(q).unwrap_or(f64::NAN)
    }
}
