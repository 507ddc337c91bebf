//! Bounded domains with Korányi distance to the complement.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{dist, group_mul, sample_ball, Point};
use crate::rng;

/// Axis-aligned Euclidean box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn contains(&self, q: Point) -> bool {
        (self.min.x..=self.max.x).contains(&q.x)
            && (self.min.y..=self.max.y).contains(&q.y)
            && (self.min.z..=self.max.z).contains(&q.z)
    }

    /// Euclidean box of `B_r(center)`.
    pub fn of_ball(center: Point, r: f64) -> Self {
        let dz = 0.25 * r * r + 0.5 * r * center.hor_norm();
        BoundingBox {
            min: Point::new(center.x - r, center.y - r, center.z - dz),
            max: Point::new(center.x + r, center.y + r, center.z + dz),
        }
    }

    pub fn inflate(&self, dxy: f64, dz: f64) -> Self {
        BoundingBox {
            min: Point::new(self.min.x - dxy, self.min.y - dxy, self.min.z - dz),
            max: Point::new(self.max.x + dxy, self.max.y + dxy, self.max.z + dz),
        }
    }

    /// Largest `|q_h|` over the box.
    pub fn max_hor_norm(&self) -> f64 {
        let ax = self.min.x.abs().max(self.max.x.abs());
        let ay = self.min.y.abs().max(self.max.y.abs());
        ax.hypot(ay)
    }
}

/// A bounded open set in the Heisenberg group.
///
/// Implementations must be safe to call from several threads.
pub trait Domain: Send + Sync {
    fn contains(&self, q: Point) -> bool;

    /// Korányi distance from `q` to the complement; zero outside. When
    /// [`Domain::is_exact`] is false this is a lower bound.
    fn dist_to_complement(&self, q: Point) -> f64;

    /// `min(cap, dist_to_complement(q))`, possibly cheaper.
    fn dist_capped(&self, q: Point, cap: f64) -> f64 {
        self.dist_to_complement(q).min(cap)
    }

    fn bounding_box(&self) -> BoundingBox;

    fn is_exact(&self) -> bool;

    /// For domains invariant under rotations about the `z`-axis through
    /// the origin: the range of `|q|_K` over the domain.
    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        None
    }

    fn is_axisymmetric(&self) -> bool {
        self.axisymmetric_gauge_range().is_some()
    }
}

impl<T: Domain + ?Sized> Domain for &T {
    fn contains(&self, q: Point) -> bool {
        (**self).contains(q)
    }
    fn dist_to_complement(&self, q: Point) -> f64 {
        (**self).dist_to_complement(q)
    }
    fn dist_capped(&self, q: Point, cap: f64) -> f64 {
        (**self).dist_capped(q, cap)
    }
    fn bounding_box(&self) -> BoundingBox {
        (**self).bounding_box()
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        (**self).axisymmetric_gauge_range()
    }
}

impl<T: Domain + ?Sized> Domain for Box<T> {
    fn contains(&self, q: Point) -> bool {
        (**self).contains(q)
    }
    fn dist_to_complement(&self, q: Point) -> f64 {
        (**self).dist_to_complement(q)
    }
    fn dist_capped(&self, q: Point, cap: f64) -> f64 {
        (**self).dist_capped(q, cap)
    }
    fn bounding_box(&self) -> BoundingBox {
        (**self).bounding_box()
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        (**self).axisymmetric_gauge_range()
    }
}

const SPHERE_GRID_U: usize = 41;
const SPHERE_GRID_THETA: usize = 64;
const SPHERE_SEEDS: usize = 4;

/// Latitude chart `u ∈ [-1, 1] ↦ β` with `π/2 - |β| = (π/2)(1 - |u|)²`,
/// so that the horizontal radius `√cos β` is Lipschitz in `u` at the poles.
fn chart_beta(u: f64) -> f64 {
    let a = 1.0 - u.abs().min(1.0);
    0.5 * PI * u.signum() * (1.0 - a * a)
}

fn chart_point(u: f64, theta: f64) -> [f64; 3] {
    let b = chart_beta(u);
    let h = b.cos().max(0.0).sqrt();
    [h * theta.cos(), h * theta.sin(), 0.25 * b.sin()]
}

fn sphere_table() -> &'static [[f64; 3]] {
    static TABLE: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(SPHERE_GRID_U * SPHERE_GRID_THETA);
        for i in 0..SPHERE_GRID_U {
            let u = -1.0 + 2.0 * i as f64 / (SPHERE_GRID_U - 1) as f64;
            for j in 0..SPHERE_GRID_THETA {
                t.push(chart_point(u, 2.0 * PI * j as f64 / SPHERE_GRID_THETA as f64));
            }
        }
        t
    })
}

/// Korányi distance from `q` to the sphere `{p : d(center, p) = r}`.
///
/// `r - d(center, q)` is only a lower bound for the Korányi metric, so the
/// sphere is searched directly: the problem is moved to `center = 0`,
/// rotated so that `q_h` lies on the positive `x`-axis, and `|q⁻¹p|⁴` is
/// minimized over the sphere. A grid scan on a latitude/longitude chart
/// picks the best local minima; each is refined by a short pattern search
/// and then by Newton's method on the Lagrange system, with every iterate
/// projected back to the sphere along the dilation curve. The result is the
/// smallest value seen at a point of the sphere, so it is never below the
/// true distance.
pub fn dist_to_sphere(q: Point, center: Point, r: f64) -> f64 {
    let w = group_mul(center.inv(), q);
    let prob = SphereProblem { rho0: w.hor_norm(), z0: w.z, r };
    let obj = |u: f64, theta: f64| prob.g(prob.scale(chart_point(u.clamp(-1.0, 1.0), theta)));

    let (nu, nt) = (SPHERE_GRID_U, SPHERE_GRID_THETA);
    let vals: Vec<f64> = sphere_table().iter().map(|&p| prob.g(prob.scale(p))).collect();
    let v = |i: usize, j: usize| vals[i * nt + j % nt];
    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..nu {
        for j in 0..nt {
            let c = v(i, j);
            let local = c <= v(i, j + 1)
                && c <= v(i, j + nt - 1)
                && (i == 0 || c <= v(i - 1, j))
                && (i + 1 == nu || c <= v(i + 1, j));
            if local {
                seeds.push((c, i, j));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let du = 2.0 / (nu - 1) as f64;
    let dt = 2.0 * PI / nt as f64;
    let mut best = f64::INFINITY;
    for &(v0, i, j) in seeds.iter().take(SPHERE_SEEDS) {
        let (mut bv, mut u, mut t) = (v0, -1.0 + i as f64 * du, j as f64 * dt);
        let (mut su, mut st) = (0.5 * du, 0.5 * dt);
        while su > 1e-4 {
            for _ in 0..16 {
                let mut moved = false;
                for (cu, ct) in [(u + su, t), (u - su, t), (u, t + st), (u, t - st)] {
                    let cu = cu.clamp(-1.0, 1.0);
                    let c = obj(cu, ct);
                    if c < bv {
                        (bv, u, t) = (c, cu, ct);
                        moved = true;
                    }
                }
                if !moved {
                    break;
                }
            }
            su *= 0.5;
            st *= 0.5;
        }
        let p0 = prob.scale(chart_point(u.clamp(-1.0, 1.0), t));
        best = best.min(bv).min(prob.newton(p0));
    }
    best.sqrt().sqrt()
}

/// `min |w⁻¹p|⁴` over `|p|_K = r` with `w = (rho0, 0, z0)`.
struct SphereProblem {
    rho0: f64,
    z0: f64,
    r: f64,
}

impl SphereProblem {
    fn scale(&self, p: [f64; 3]) -> [f64; 3] {
        [self.r * p[0], self.r * p[1], self.r * self.r * p[2]]
    }

    /// `w⁻¹p`.
    fn rel(&self, p: [f64; 3]) -> [f64; 3] {
        [p[0] - self.rho0, p[1], p[2] - self.z0 - 0.5 * self.rho0 * p[1]]
    }

    fn g(&self, p: [f64; 3]) -> f64 {
        let [a, b, c] = self.rel(p);
        let h = a * a + b * b;
        h * h + 16.0 * c * c
    }

    /// Dilation onto the sphere.
    fn project(&self, p: [f64; 3]) -> Option<[f64; 3]> {
        let g = Point::new(p[0], p[1], p[2]).gauge();
        if !(g > 0.0 && g.is_finite()) {
            return None;
        }
        let s = self.r / g;
        Some([s * p[0], s * p[1], s * s * p[2]])
    }

    /// Gradient and Hessian of `(a²+b²)² + 16c²` in the variables `(a,b,c)`.
    fn quartic_derivs(v: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let [a, b, c] = v;
        let h = a * a + b * b;
        (
            [4.0 * a * h, 4.0 * b * h, 32.0 * c],
            [
                [4.0 * (3.0 * a * a + b * b), 8.0 * a * b, 0.0],
                [8.0 * a * b, 4.0 * (a * a + 3.0 * b * b), 0.0],
                [0.0, 0.0, 32.0],
            ],
        )
    }

    /// Newton iteration on `∇G = λ∇N`, `N = r⁴`; returns the smallest `G`
    /// met on the sphere.
    fn newton(&self, p0: [f64; 3]) -> f64 {
        let mut p = p0;
        let mut best = self.g(p);
        // ∂(a, b, c)/∂p
        let jac = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -0.5 * self.rho0, 1.0]];
        let (gn, _) = Self::quartic_derivs(p);
        let (gg0, _) = Self::quartic_derivs(self.rel(p));
        let gg0 = mat_t_vec(&jac, gg0);
        let nn = gn[0] * gn[0] + gn[1] * gn[1] + gn[2] * gn[2];
        let mut lambda = if nn > 0.0 { (gg0[0] * gn[0] + gg0[1] * gn[1] + gg0[2] * gn[2]) / nn } else { 0.0 };
        for _ in 0..40 {
            let (dg, hg) = Self::quartic_derivs(self.rel(p));
            let dg = mat_t_vec(&jac, dg);
            let hg = mat_t_mat_mat(&jac, &hg);
            let (dn, hn) = Self::quartic_derivs(p);
            let nval = {
                let h = p[0] * p[0] + p[1] * p[1];
                h * h + 16.0 * p[2] * p[2]
            };
            let r4 = self.r.powi(4);
            let mut m = [[0.0; 5]; 4];
            for i in 0..3 {
                for k in 0..3 {
                    m[i][k] = hg[i][k] - lambda * hn[i][k];
                }
                m[i][3] = -dn[i];
                m[i][4] = -(dg[i] - lambda * dn[i]);
            }
            m[3][..3].copy_from_slice(&dn);
            m[3][4] = -(nval - r4);
            let Some(step) = solve4(m) else { break };
            let cand = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let Some(cand) = self.project(cand) else { break };
            lambda += step[3];
            let moved = (cand[0] - p[0]).abs() + (cand[1] - p[1]).abs() + (cand[2] - p[2]).abs();
            p = cand;
            best = best.min(self.g(p));
            if moved <= 1e-15 * self.r.max(1.0) {
                break;
            }
        }
        best
    }
}

fn mat_t_vec(j: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|k| j[k][i] * v[k]).sum();
    }
    out
}

/// `Jᵀ H J`.
fn mat_t_mat_mat(j: &[[f64; 3]; 3], h: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut hj = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            hj[i][k] = (0..3).map(|l| h[i][l] * j[l][k]).sum();
        }
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            out[i][k] = (0..3).map(|l| j[l][i] * hj[l][k]).sum();
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on a 4×4 augmented system.
fn solve4(mut m: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        let pivot_row = m[col];
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (v, &pv) in row.iter_mut().zip(&pivot_row).skip(col) {
                *v -= f * pv;
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][4] - s) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// The Korányi ball `B_R(center)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallDomain {
    pub center: Point,
    pub radius: f64,
}

pub fn make_ball_domain(center: Point, radius: f64) -> Result<BallDomain> {
    ensure_positive("ball radius", radius)?;
    Ok(BallDomain { center, radius })
}

impl Domain for BallDomain {
    fn contains(&self, q: Point) -> bool {
        dist(self.center, q) < self.radius
    }

    fn dist_to_complement(&self, q: Point) -> f64 {
        if !self.contains(q) {
            return 0.0;
        }
        dist_to_sphere(q, self.center, self.radius)
    }

    fn dist_capped(&self, q: Point, cap: f64) -> f64 {
        let lb = self.radius - dist(self.center, q);
        if lb <= 0.0 {
            0.0
        } else if lb >= cap {
            cap
        } else {
            dist_to_sphere(q, self.center, self.radius).min(cap)
        }
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_ball(self.center, self.radius)
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        (self.center == Point::default()).then_some((0.0, self.radius))
    }
}

/// `B_{R3}(center)` minus the closed ball `B̄_{R1}(center)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusDomain {
    pub center: Point,
    pub inner: f64,
    pub outer: f64,
}

pub fn make_annulus_domain(center: Point, inner: f64, outer: f64) -> Result<AnnulusDomain> {
    ensure_positive("inner radius", inner)?;
    if !(outer > inner && outer.is_finite()) {
        return Err(Error::invalid(format!("annulus radii must satisfy 0 < R1 < R3, got R1 = {inner}, R3 = {outer}")));
    }
    Ok(AnnulusDomain { center, inner, outer })
}

impl Domain for AnnulusDomain {
    fn contains(&self, q: Point) -> bool {
        let d = dist(self.center, q);
        d > self.inner && d < self.outer
    }

    fn dist_to_complement(&self, q: Point) -> f64 {
        if !self.contains(q) {
            return 0.0;
        }
        dist_to_sphere(q, self.center, self.outer).min(dist_to_sphere(q, self.center, self.inner))
    }

    fn dist_capped(&self, q: Point, cap: f64) -> f64 {
        let d = dist(self.center, q);
        let (lo, hi) = (d - self.inner, self.outer - d);
        if lo <= 0.0 || hi <= 0.0 {
            return 0.0;
        }
        let mut out = cap;
        if hi < cap {
            out = out.min(dist_to_sphere(q, self.center, self.outer));
        }
        if lo < cap {
            out = out.min(dist_to_sphere(q, self.center, self.inner));
        }
        out
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_ball(self.center, self.outer)
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        (self.center == Point::default()).then_some((self.inner, self.outer))
    }
}

/// `{|q_h|^{1+α} > z}` intersected with `B_2(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspDomain {
    pub alpha: f64,
}

pub const CUSP_BOUNDING_RADIUS: f64 = 2.0;

pub fn make_cusp_domain(alpha: f64) -> Result<CuspDomain> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("cusp exponent must lie in [0, 1), got {alpha}")));
    }
    Ok(CuspDomain { alpha })
}

impl CuspDomain {
    fn in_cusp(&self, q: Point) -> bool {
        q.hor_norm().powf(1.0 + self.alpha) > q.z
    }

    /// Largest `δ` with `(|q_h| - δ)^{1+α} > z + δ²/4 + |q_h|δ/2`: every
    /// `q*w` with `|w|_K < δ` then stays below the cusp surface.
    fn cusp_margin(&self, q: Point) -> f64 {
        let h = q.hor_norm();
        let ok = |d: f64| (h - d).max(0.0).powf(1.0 + self.alpha) > q.z + 0.25 * d * d + 0.5 * h * d;
        if !ok(0.0) {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, h.max(2.0 * q.z.abs().sqrt()) + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        lo
    }
}

impl Domain for CuspDomain {
    fn contains(&self, q: Point) -> bool {
        self.in_cusp(q) && q.gauge() < CUSP_BOUNDING_RADIUS
    }

    fn dist_to_complement(&self, q: Point) -> f64 {
        if !self.contains(q) {
            return 0.0;
        }
        self.cusp_margin(q).min(CUSP_BOUNDING_RADIUS - q.gauge())
    }

    fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_ball(Point::default(), CUSP_BOUNDING_RADIUS)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn axisymmetric_gauge_range(&self) -> Option<(f64, f64)> {
        Some((0.0, CUSP_BOUNDING_RADIUS))
    }
}

/// Sampling budget for [`corkscrew_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeSpec {
    pub candidates: usize,
    pub verify_samples: usize,
    pub seed: u64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec { candidates: 2000, verify_samples: 4000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorkscrewReport {
    pub radius: f64,
    pub found: bool,
    pub witness: Option<Point>,
}

pub const BOUNDARY_TOL: f64 = 1e-9;

/// Checks that `q0` lies on `∂D`: within [`BOUNDARY_TOL`] of the complement
/// and with points of `D` in every small ball around it (sampled).
pub fn check_boundary_point<D: Domain + ?Sized>(dom: &D, q0: Point, seed: u64) -> Result<()> {
    let d = dom.dist_to_complement(q0);
    if d > BOUNDARY_TOL {
        return Err(Error::NotOnBoundary { dist: d });
    }
    let mut r = rng::stream(seed, 0xADE5);
    for k in 0..6 {
        let rad = 10f64.powi(-3 - k);
        if !(0..4000).any(|_| dom.contains(sample_ball(q0, rad, &mut r))) {
            return Err(Error::NotOnBoundary { dist: d });
        }
    }
    Ok(())
}

/// Searches, for each radius `r`, a ball `B_{μr}(p0) ⊂ B_r(q0) \ D` by
/// sampling centers in `B_{(1-μ)r}(q0)` and verifying candidate balls by
/// sampling. Failure only means no witness was found.
pub fn corkscrew_probe<D: Domain + ?Sized>(
    dom: &D,
    q0: Point,
    mu: f64,
    radii: &[f64],
    spec: &ProbeSpec,
) -> Result<Vec<CorkscrewReport>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::invalid(format!("corkscrew ratio must lie in (0, 1), got {mu}")));
    }
    check_boundary_point(dom, q0, spec.seed)?;
    let mut out = Vec::with_capacity(radii.len());
    for (i, &rad) in radii.iter().enumerate() {
        ensure_positive("probe radius", rad)?;
        let mut r = rng::stream(spec.seed, 1 + i as u64);
        let mut witness = None;
        for _ in 0..spec.candidates {
            let p0 = sample_ball(q0, (1.0 - mu) * rad, &mut r);
            if dom.contains(p0) {
                continue;
            }
            let clear = (0..spec.verify_samples).all(|k| {
                let w = if k % 4 == 0 {
                    // boundary of the candidate ball
                    let b: f64 = r.random_range(-0.5 * PI..0.5 * PI);
                    let t: f64 = r.random_range(0.0..2.0 * PI);
                    group_mul(p0, crate::hgroup::sphere_point(b, t).dilate(mu * rad))
                } else {
                    sample_ball(p0, mu * rad, &mut r)
                };
                !dom.contains(w)
            });
            if clear {
                witness = Some(p0);
                break;
            }
        }
        out.push(CorkscrewReport { radius: rad, found: witness.is_some(), witness });
    }
    Ok(out)
}
