use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::averaging::{candidate_net, Dpp3Params, DppVariant};
use crate::calculus::ScalarField;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::hgroup::{group_mul, Point};

use super::grid::Grid;
use super::DppConfig;

type Row = Vec<(isize, f64)>;

/// Stencils shared by every node of a box-grid column, or owned by one
/// node of the axisymmetric grid. Offsets are flat index deltas from the
/// node.
#[derive(Debug, Default)]
struct Template {
    /// Averaging row of `𝒜₃(u, ε)` at the node.
    a_row: Option<Row>,
    a_dk: (i64, i64),
    /// Interpolation corners (stride = stencil length) of the candidate
    /// points `q*ρ_{γε}(σ_k)` in the averaged field.
    cands: Option<Row>,
    c_dk: (i64, i64),
    /// Per-candidate ellipsoid averaging rows for the third variant.
    ell_rows: Option<Vec<Row>>,
    e_dk: (i64, i64),
}

enum Scheme {
    Minmax { gamma: f64 },
    Ellipsoid { params: Dpp3Params },
}

/// The discrete operator `T u = d_ε S u + (1 - d_ε) F` on a fixed grid, with
/// all stencils precomputed. `S` uses one shared set of quadrature offsets
/// and one shared candidate net at every node, so `T` is a fixed monotone
/// map.
pub struct DiscreteOperator {
    grid: Grid,
    eps: f64,
    scheme: Scheme,
    f: Vec<f64>,
    d: Vec<f64>,
    interior: Vec<usize>,
    a_nodes: Vec<usize>,
    templates: Vec<Template>,
    stride: usize,
}

impl DiscreteOperator {
    pub fn new<D, F>(dom: &D, data: &F, cfg: &DppConfig, grid: Grid) -> Result<Self>
    where
        D: Domain + ?Sized,
        F: ScalarField + ?Sized,
    {
        cfg.validate()?;
        if matches!(grid, Grid::Axisymmetric(_)) && !dom.is_axisymmetric() {
            return Err(Error::ConfigInvalid("the axisymmetric grid needs a domain symmetric about the z-axis".into()));
        }
        let eps = cfg.eps;
        let scheme = match cfg.variant {
            DppVariant::Dpp2 => Scheme::Minmax { gamma: crate::averaging::gamma_p(cfg.p)? },
            DppVariant::Dpp3(params) => Scheme::Ellipsoid { params },
            DppVariant::Dpp1 => {
                return Err(Error::ConfigInvalid("the solver supports the dpp2 and dpp3 variants".into()))
            }
        };
        let n = grid.len();
        let points: Vec<Point> = (0..n).map(|i| grid.node_point(i)).collect();
        let f = points.par_iter().map(|&q| data.eval(q)).collect::<Result<Vec<f64>>>()?;
        let d: Vec<f64> = points.par_iter().map(|&q| dom.dist_capped(q, eps) / eps).collect();
        let interior: Vec<usize> = (0..n).filter(|&i| d[i] > 0.0).collect();

        let offsets = cfg.quad.ball_nodes()?;
        let net: Vec<Point> =
            candidate_net(cfg.search.candidate_count, cfg.search.seed).iter().map(|c| c.point()).collect();

        let keys = template_keys(&grid);
        let templates: Vec<Template> =
            keys.par_iter().map(|&r| build_template(&grid, r, eps, &scheme, &offsets, &net)).collect();

        let mut op = DiscreteOperator {
            stride: grid.stencil_len(),
            grid,
            eps,
            scheme,
            f,
            d,
            interior,
            a_nodes: Vec::new(),
            templates,
        };
        op.check_and_collect()?;
        Ok(op)
    }

    fn template_of(&self, node: usize) -> (&Template, i64, i64) {
        match &self.grid {
            Grid::Box(b) => {
                let layer = b.dims[0] * b.dims[1];
                (&self.templates[node % layer], (node / layer) as i64, b.dims[2] as i64)
            }
            Grid::Axisymmetric(_) => (&self.templates[node], 0, 1),
        }
    }

    /// Confirms every interior node has its stencils inside the grid and
    /// collects the nodes at which the averaged field is needed.
    fn check_and_collect(&mut self) -> Result<()> {
        let collar = |node: usize| {
            let q = self.grid.node_point(node);
            Error::ConfigInvalid(format!(
                "averaging stencil at ({}, {}, {}) leaves the grid; enlarge the collar",
                q.x, q.y, q.z
            ))
        };
        let fits = |(lo, hi): (i64, i64), k: i64, nz: i64| k + lo >= 0 && k + hi < nz;
        let mut need = vec![false; self.grid.len()];
        for &node in &self.interior {
            let (t, k, nz) = self.template_of(node);
            match self.scheme {
                Scheme::Minmax { .. } => {
                    if t.cands.is_none() || !fits(t.c_dk, k, nz) {
                        return Err(collar(node));
                    }
                    need[node] = true;
                    for &(delta, _) in t.cands.as_ref().unwrap() {
                        need[(node as isize + delta) as usize] = true;
                    }
                }
                Scheme::Ellipsoid { .. } => {
                    if t.ell_rows.is_none() || !fits(t.e_dk, k, nz) {
                        return Err(collar(node));
                    }
                }
            }
        }
        let a_nodes: Vec<usize> = (0..need.len()).filter(|&i| need[i]).collect();
        for &node in &a_nodes {
            let (t, k, nz) = self.template_of(node);
            if t.a_row.is_none() || !fits(t.a_dk, k, nz) {
                return Err(collar(node));
            }
        }
        self.a_nodes = a_nodes;
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Data values at the nodes.
    pub fn data(&self) -> &[f64] {
        &self.f
    }

    /// `d_ε` at the nodes.
    pub fn d_eps(&self) -> &[f64] {
        &self.d
    }

    /// Nodes with `d_ε > 0`.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    fn avg_row(u: &[f64], node: usize, row: &Row) -> f64 {
        let b = u[node];
        let mut acc = 0.0;
        for &(delta, w) in row {
            acc += w * (u[(node as isize + delta) as usize] - b);
        }
        b + acc
    }

    fn a_at(&self, u: &[f64], node: usize) -> f64 {
        let (t, _, _) = self.template_of(node);
        Self::avg_row(u, node, t.a_row.as_ref().expect("checked at construction"))
    }

    /// `𝒜₃(u, ε)` at the nodes that need it (NaN elsewhere).
    fn a_field_needed(&self, u: &[f64]) -> Vec<f64> {
        let vals: Vec<f64> = self.a_nodes.par_iter().map(|&j| self.a_at(u, j)).collect();
        let mut a = vec![f64::NAN; u.len()];
        for (&j, v) in self.a_nodes.iter().zip(vals) {
            a[j] = v;
        }
        a
    }

    /// `𝒜₃(u, ε)` at every node whose averaging stencil fits in the grid.
    pub fn a_field(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len())
            .into_par_iter()
            .map(|j| {
                let (t, k, nz) = self.template_of(j);
                match &t.a_row {
                    Some(row) if k + t.a_dk.0 >= 0 && k + t.a_dk.1 < nz => Self::avg_row(u, j, row),
                    _ => f64::NAN,
                }
            })
            .collect()
    }

    fn s_at(&self, u: &[f64], a: &[f64], node: usize) -> f64 {
        let (t, _, _) = self.template_of(node);
        match self.scheme {
            Scheme::Minmax { .. } => {
                let a0 = a[node];
                let cands = t.cands.as_ref().expect("checked at construction");
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for c in cands.chunks_exact(self.stride) {
                    let i0 = (node as isize + c[0].0) as usize;
                    let b = a[i0];
                    let mut v = 0.0;
                    for &(delta, w) in &c[1..] {
                        v += w * (a[(node as isize + delta) as usize] - b);
                    }
                    let v = b + v;
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
                a0 + ((mn - a0) + (mx - a0)) / 3.0
            }
            Scheme::Ellipsoid { .. } => {
                let rows = t.ell_rows.as_ref().expect("checked at construction");
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for row in rows {
                    let v = Self::avg_row(u, node, row);
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
                let b = u[node];
                b + 0.5 * ((mn - b) + (mx - b))
            }
        }
    }

    /// `S u` at the interior nodes, in the order of [`Self::interior`].
    pub fn apply_s(&self, u: &[f64]) -> Vec<f64> {
        let a = match self.scheme {
            Scheme::Minmax { .. } => self.a_field_needed(u),
            Scheme::Ellipsoid { .. } => Vec::new(),
        };
        self.interior.par_iter().map(|&n| self.s_at(u, &a, n)).collect()
    }

    /// `T u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let s = self.apply_s(u);
        let mut out = self.f.clone();
        for (&n, sv) in self.interior.iter().zip(s) {
            out[n] = self.f[n] + self.d[n] * (sv - self.f[n]);
        }
        out
    }

    /// `sup |u - T u|` over the interior nodes.
    pub fn residual(&self, u: &[f64]) -> f64 {
        let t = self.apply(u);
        self.interior.iter().map(|&n| (u[n] - t[n]).abs()).fold(0.0, f64::max)
    }
}

/// Reference node of every template: one per column for box grids (taken
/// in the middle layer), one per node for the axisymmetric grid.
fn template_keys(grid: &Grid) -> Vec<usize> {
    match grid {
        Grid::Box(b) => {
            let layer = b.dims[0] * b.dims[1];
            let mid = b.dims[2] / 2;
            (0..layer).map(|c| c + layer * mid).collect()
        }
        Grid::Axisymmetric(_) => (0..grid.len()).collect(),
    }
}

fn layer_of(grid: &Grid, idx: usize) -> i64 {
    match grid {
        Grid::Box(b) => (idx / (b.dims[0] * b.dims[1])) as i64,
        Grid::Axisymmetric(_) => 0,
    }
}

/// Merged averaging row of `points`, as deltas from `node`.
fn merged_row(grid: &Grid, node: usize, points: impl Iterator<Item = Point>) -> Option<(Row, (i64, i64))> {
    let k0 = layer_of(grid, node);
    let mut acc: BTreeMap<isize, f64> = BTreeMap::new();
    let mut count = 0usize;
    let mut dk = (0i64, 0i64);
    for p in points {
        let s = grid.stencil(p).ok()?;
        for m in 0..s.len {
            if s.w[m] != 0.0 {
                *acc.entry(s.idx[m] as isize - node as isize).or_insert(0.0) += s.w[m];
                let k = layer_of(grid, s.idx[m]) - k0;
                dk = (dk.0.min(k), dk.1.max(k));
            }
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    let inv = 1.0 / count as f64;
    Some((acc.into_iter().map(|(d, w)| (d, w * inv)).collect(), dk))
}

fn build_template(grid: &Grid, node: usize, eps: f64, scheme: &Scheme, offsets: &[Point], net: &[Point]) -> Template {
    let q = grid.node_point(node);
    let mut t = Template::default();
    let k0 = layer_of(grid, node);
    match scheme {
        Scheme::Minmax { gamma } => {
            if let Some((row, dk)) = merged_row(grid, node, offsets.iter().map(|&w| group_mul(q, w.dilate(eps)))) {
                t.a_row = Some(row);
                t.a_dk = dk;
            }
            let stride = grid.stencil_len();
            let mut cands = Vec::with_capacity(net.len() * stride);
            let mut dk = (0i64, 0i64);
            let mut ok = true;
            for &s in net {
                match grid.stencil(group_mul(q, s.dilate(gamma * eps))) {
                    Ok(st) => {
                        for m in 0..stride {
                            cands.push((st.idx[m] as isize - node as isize, st.w[m]));
                            let k = layer_of(grid, st.idx[m]) - k0;
                            dk = (dk.0.min(k), dk.1.max(k));
                        }
                    }
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                t.cands = Some(cands);
                t.c_dk = dk;
            }
        }
        Scheme::Ellipsoid { params } => {
            let mut rows = Vec::with_capacity(net.len());
            let mut dk = (0i64, 0i64);
            for &s in net {
                let c = group_mul(q, s.dilate(eps));
                let row = match params.shape_at(q, c, eps) {
                    Ok(Some(shape)) => merged_row(grid, node, offsets.iter().map(|&w| shape.place(c, w))),
                    Ok(None) => merged_row(grid, node, offsets.iter().map(|&w| group_mul(c, w.dilate(params.s * eps)))),
                    Err(_) => None,
                };
                match row {
                    Some((r, d)) => {
                        dk = (dk.0.min(d.0), dk.1.max(d.1));
                        rows.push(r);
                    }
                    None => return t,
                }
            }
            t.ell_rows = Some(rows);
            t.e_dk = dk;
        }
    }
    t
}
