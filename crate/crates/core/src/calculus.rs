//! Horizontal calculus: the fields `X = ∂x - (y/2)∂z`, `Y = ∂y + (x/2)∂z`,
//! `Z = ∂z`, the symmetrized horizontal Hessian and the sub-Laplacians built
//! from them.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{group_mul, Point};

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_FD_STEP_SECOND: f64 = 1e-3;
pub const GRADIENT_FLOOR: f64 = 1e-10;

/// Value, horizontal gradient `(Xv, Yv)`, `Zv` and the symmetrized
/// horizontal Hessian `½(∇²v + (∇²v)ᵀ)` at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HorizontalJet {
    pub value: f64,
    pub grad_h: [f64; 2],
    pub z_deriv: f64,
    pub hess_h: [[f64; 2]; 2],
}

impl HorizontalJet {
    /// Builds a jet, symmetrizing the Hessian.
    pub fn new(value: f64, grad_h: [f64; 2], z_deriv: f64, hess: [[f64; 2]; 2]) -> Self {
        let off = 0.5 * (hess[0][1] + hess[1][0]);
        HorizontalJet { value, grad_h, z_deriv, hess_h: [[hess[0][0], off], [off, hess[1][1]]] }
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_h[0].hypot(self.grad_h[1])
    }

    /// `Δ_ℍ v`, the trace of the horizontal Hessian.
    pub fn delta_h(&self) -> f64 {
        self.hess_h[0][0] + self.hess_h[1][1]
    }

    /// `⟨H g, g⟩` for the horizontal Hessian `H` and the vector `g`.
    pub fn hess_quadratic(&self, g: [f64; 2]) -> f64 {
        let h = &self.hess_h;
        h[0][0] * g[0] * g[0] + 2.0 * h[0][1] * g[0] * g[1] + h[1][1] * g[1] * g[1]
    }

    /// Entrywise `(a, b)` flattened to `[value, Xv, Yv, Zv, h11, h12, h22]`.
    pub fn to_vec(&self) -> [f64; 7] {
        [
            self.value,
            self.grad_h[0],
            self.grad_h[1],
            self.z_deriv,
            self.hess_h[0][0],
            self.hess_h[0][1],
            self.hess_h[1][1],
        ]
    }
}

/// A real function on the Heisenberg group.
///
/// Implementations must be callable concurrently from several threads.
/// `value` may return a non-finite number to signal a failed evaluation;
/// [`ScalarField::eval`] turns that into an error.
pub trait ScalarField: Send + Sync {
    fn value(&self, q: Point) -> f64;

    /// Closed-form jet, when one is available.
    fn analytic_jet(&self, _q: Point) -> Option<Result<HorizontalJet>> {
        None
    }

    fn fd_step(&self) -> f64 {
        DEFAULT_FD_STEP
    }

    fn eval(&self, q: Point) -> Result<f64> {
        let v = self.value(q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x: q.x, y: q.y, z: q.z })
        }
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn value(&self, q: Point) -> f64 {
        (**self).value(q)
    }
    fn analytic_jet(&self, q: Point) -> Option<Result<HorizontalJet>> {
        (**self).analytic_jet(q)
    }
    fn fd_step(&self) -> f64 {
        (**self).fd_step()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn value(&self, q: Point) -> f64 {
        (**self).value(q)
    }
    fn analytic_jet(&self, q: Point) -> Option<Result<HorizontalJet>> {
        (**self).analytic_jet(q)
    }
    fn fd_step(&self) -> f64 {
        (**self).fd_step()
    }
}

/// Field given by a closure, without an analytic jet.
pub struct FnField<F> {
    f: F,
    fd_step: f64,
}

impl<F: Fn(Point) -> f64 + Send + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        FnField { f, fd_step: DEFAULT_FD_STEP }
    }

    pub fn with_fd_step(f: F, fd_step: f64) -> Result<Self> {
        ensure_positive("fd_step", fd_step)?;
        Ok(FnField { f, fd_step })
    }
}

impl<F: Fn(Point) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn value(&self, q: Point) -> f64 {
        (self.f)(q)
    }
    fn fd_step(&self) -> f64 {
        self.fd_step
    }
}

impl<F> fmt::Debug for FnField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("fd_step", &self.fd_step).finish()
    }
}

/// Euclidean partial derivatives up to order two.
#[derive(Clone, Copy, Debug, Default)]
struct Partials {
    v: f64,
    fx: f64,
    fy: f64,
    fz: f64,
    fxx: f64,
    fyy: f64,
    fzz: f64,
    fxy: f64,
    fxz: f64,
    fyz: f64,
}

impl Partials {
    fn to_jet(self, q: Point) -> HorizontalJet {
        let (x, y) = (q.x, q.y);
        let xv = self.fx - 0.5 * y * self.fz;
        let yv = self.fy + 0.5 * x * self.fz;
        let xx = self.fxx - y * self.fxz + 0.25 * y * y * self.fzz;
        let yy = self.fyy + x * self.fyz + 0.25 * x * x * self.fzz;
        let xy = self.fxy + 0.5 * x * self.fxz - 0.5 * y * self.fyz - 0.25 * x * y * self.fzz;
        HorizontalJet { value: self.v, grad_h: [xv, yv], z_deriv: self.fz, hess_h: [[xx, xy], [xy, yy]] }
    }
}

/// Polynomial `Σ c·xⁱyʲzᵏ` with an exact jet.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    pub fn new(terms: Vec<(f64, [u32; 3])>) -> Self {
        Polynomial { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(c, [0, 0, 0])])
    }

    pub fn x() -> Self {
        Self::new(vec![(1.0, [1, 0, 0])])
    }

    pub fn y() -> Self {
        Self::new(vec![(1.0, [0, 1, 0])])
    }

    pub fn z() -> Self {
        Self::new(vec![(1.0, [0, 0, 1])])
    }

    pub fn terms(&self) -> &[(f64, [u32; 3])] {
        &self.terms
    }

    /// `Some(c)` when every term is constant.
    pub fn as_constant(&self) -> Option<f64> {
        if self.terms.iter().all(|(_, e)| *e == [0, 0, 0]) {
            Some(self.terms.iter().map(|(c, _)| c).sum())
        } else {
            None
        }
    }

    /// Total degree, treating `z` as a degree-one variable.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    fn partial(&self, q: Point, d: [u32; 3]) -> f64 {
        let mut acc = 0.0;
        for &(c, e) in &self.terms {
            if e[0] < d[0] || e[1] < d[1] || e[2] < d[2] {
                continue;
            }
            let mut t = c;
            for (axis, &v) in [q.x, q.y, q.z].iter().enumerate() {
                let (n, k) = (e[axis], d[axis]);
                for j in 0..k {
                    t *= (n - j) as f64;
                }
                t *= v.powi((n - k) as i32);
            }
            acc += t;
        }
        acc
    }
}

impl ScalarField for Polynomial {
    fn value(&self, q: Point) -> f64 {
        self.partial(q, [0, 0, 0])
    }

    fn analytic_jet(&self, q: Point) -> Option<Result<HorizontalJet>> {
        let p = Partials {
            v: self.partial(q, [0, 0, 0]),
            fx: self.partial(q, [1, 0, 0]),
            fy: self.partial(q, [0, 1, 0]),
            fz: self.partial(q, [0, 0, 1]),
            fxx: self.partial(q, [2, 0, 0]),
            fyy: self.partial(q, [0, 2, 0]),
            fzz: self.partial(q, [0, 0, 2]),
            fxy: self.partial(q, [1, 1, 0]),
            fxz: self.partial(q, [1, 0, 1]),
            fyz: self.partial(q, [0, 1, 1]),
        };
        Some(Ok(p.to_jet(q)))
    }
}

/// The horizontal jet of `f` at `q`: the analytic one when the field has
/// it, otherwise finite differences.
pub fn horizontal_jet<F: ScalarField + ?Sized>(f: &F, q: Point) -> Result<HorizontalJet> {
    match f.analytic_jet(q) {
        Some(j) => j,
        None => fd_jet(f, q),
    }
}

/// Finite-difference jet.
///
/// `X` and `Y` derivatives are taken along the straight lines through `q`
/// with directions `(1, 0, -y/2)` and `(0, 1, x/2)`; these lines are the
/// integral curves of the two fields, so 5-point stencils along them give
/// `X²v` and `Y²v`. Mixed terms nest 4-point differences in both orders.
pub fn fd_jet<F: ScalarField + ?Sized>(f: &F, q: Point) -> Result<HorizontalJet> {
    let h = f.fd_step();
    let h2 = DEFAULT_FD_STEP_SECOND.max(h);
    let ex = |p: Point| Point::new(1.0, 0.0, -0.5 * p.y);
    let ey = |p: Point| Point::new(0.0, 1.0, 0.5 * p.x);
    let at = |p: Point, d: Point, t: f64| f.eval(p + d.scale(t));

    let v0 = f.eval(q)?;
    let d1 = |p: Point, d: Point, step: f64| -> Result<f64> { Ok((at(p, d, step)? - at(p, d, -step)?) / (2.0 * step)) };
    let d2 = |d: Point| -> Result<f64> {
        let fp1 = at(q, d, h2)?;
        let fm1 = at(q, d, -h2)?;
        let fp2 = at(q, d, 2.0 * h2)?;
        let fm2 = at(q, d, -2.0 * h2)?;
        Ok((-fp2 + 16.0 * fp1 - 30.0 * v0 + 16.0 * fm1 - fm2) / (12.0 * h2 * h2))
    };

    let xv = d1(q, ex(q), h)?;
    let yv = d1(q, ey(q), h)?;
    let zv = d1(q, Point::new(0.0, 0.0, 1.0), h)?;
    let xx = d2(ex(q))?;
    let yy = d2(ey(q))?;

    // X(Yv) and Y(Xv): fourth-order differences of fourth-order inner
    // derivatives.
    let d1_4 = |p: Point, d: Point| -> Result<f64> {
        Ok((-at(p, d, 2.0 * h2)? + 8.0 * at(p, d, h2)? - 8.0 * at(p, d, -h2)? + at(p, d, -2.0 * h2)?) / (12.0 * h2))
    };
    let mixed = |outer: Point, inner: fn(Point) -> Point| -> Result<f64> {
        let g = |t: f64| {
            let p = q + outer.scale(t * h2);
            d1_4(p, inner(p))
        };
        Ok((-g(2.0)? + 8.0 * g(1.0)? - 8.0 * g(-1.0)? + g(-2.0)?) / (12.0 * h2))
    };
    let xy = mixed(ex(q), ey)?;
    let yx = mixed(ey(q), ex)?;

    Ok(HorizontalJet::new(v0, [xv, yv], zv, [[xx, xy], [yx, yy]]))
}

/// The four sub-Laplacians at one jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubLaplacians {
    pub delta_h: f64,
    pub delta_inf: f64,
    pub delta_p: f64,
    pub delta_p_normalized: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange { p, range: "(1, inf)" })
    }
}

/// Normalized `∞`-sub-Laplacian `⟨∇²_ℍv : (∇_ℍv/|∇_ℍv|)⊗²⟩`.
pub fn delta_inf(jet: &HorizontalJet) -> Result<f64> {
    let n = jet.grad_norm();
    if n < GRADIENT_FLOOR {
        return Err(Error::DegenerateGradient { norm: n });
    }
    let g = [jet.grad_h[0] / n, jet.grad_h[1] / n];
    Ok(jet.hess_quadratic(g))
}

pub fn sub_laplacians(jet: &HorizontalJet, p: f64) -> Result<SubLaplacians> {
    check_p(p)?;
    let dh = jet.delta_h();
    let di = delta_inf(jet)?;
    let dn = dh + (p - 2.0) * di;
    Ok(SubLaplacians {
        delta_h: dh,
        delta_inf: di,
        delta_p: jet.grad_norm().powf(p - 2.0) * dn,
        delta_p_normalized: dn,
    })
}

/// The divergence-form expansion
/// `|∇v|^{p-2}Δ_ℍv + (p-2)|∇v|^{p-4}⟨∇²v ∇v, ∇v⟩`, evaluated without
/// normalizing the gradient first.
pub fn delta_p_expanded(jet: &HorizontalJet, p: f64) -> Result<f64> {
    check_p(p)?;
    let n = jet.grad_norm();
    if n < GRADIENT_FLOOR {
        return Err(Error::DegenerateGradient { norm: n });
    }
    Ok(n.powf(p - 2.0) * jet.delta_h() + (p - 2.0) * n.powf(p - 4.0) * jet.hess_quadratic(jet.grad_h))
}

/// `ξ = |q_h|² q_h + 4z q_h^⊥` with `q_h^⊥ = (-y, x)`.
pub fn xi(q: Point) -> [f64; 2] {
    let r2 = q.hor_norm_sq();
    [q.x * r2 - 4.0 * q.y * q.z, q.y * r2 + 4.0 * q.x * q.z]
}

/// Closed-form jet of `|q|_K^s`.
pub fn gauge_power_jet(q: Point, s: f64) -> Result<HorizontalJet> {
    let g4 = q.gauge4();
    if g4 == 0.0 {
        return Err(Error::GaugeZero);
    }
    let g = g4.sqrt().sqrt();
    let gs4 = g.powf(s - 4.0);
    let gs8 = gs4 / g4;
    let x = xi(q);
    let c = 3.0 * q.hor_norm_sq() * g4;
    let hess = [
        [s * gs8 * ((s - 4.0) * x[0] * x[0] + c), s * gs8 * (s - 4.0) * x[0] * x[1]],
        [s * gs8 * (s - 4.0) * x[0] * x[1], s * gs8 * ((s - 4.0) * x[1] * x[1] + c)],
    ];
    Ok(HorizontalJet {
        value: g.powf(s),
        grad_h: [s * gs4 * x[0], s * gs4 * x[1]],
        z_deriv: 8.0 * s * q.z * gs4,
        hess_h: hess,
    })
}

/// `|center⁻¹ q|_K^s`, optionally scaled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugePower {
    pub s: f64,
    pub center: Point,
    pub scale: f64,
}

impl GaugePower {
    pub fn new(s: f64) -> Self {
        GaugePower { s, center: Point::default(), scale: 1.0 }
    }

    pub fn centered(s: f64, center: Point) -> Self {
        GaugePower { s, center, scale: 1.0 }
    }

    /// `dist(q, pole)^{-2}`, harmonic away from the pole.
    pub fn inverse_square(pole: Point) -> Self {
        GaugePower::centered(-2.0, pole)
    }
}

impl ScalarField for GaugePower {
    fn value(&self, q: Point) -> f64 {
        let w = group_mul(self.center.inv(), q);
        self.scale * w.gauge().powf(self.s)
    }

    // X and Y are left-invariant, so the jet at q is the jet at center⁻¹q.
    fn analytic_jet(&self, q: Point) -> Option<Result<HorizontalJet>> {
        let w = group_mul(self.center.inv(), q);
        Some(gauge_power_jet(w, self.s).map(|j| scale_jet(j, self.scale)))
    }
}

fn scale_jet(j: HorizontalJet, c: f64) -> HorizontalJet {
    HorizontalJet {
        value: c * j.value,
        grad_h: [c * j.grad_h[0], c * j.grad_h[1]],
        z_deriv: c * j.z_deriv,
        hess_h: [[c * j.hess_h[0][0], c * j.hess_h[0][1]], [c * j.hess_h[1][0], c * j.hess_h[1][1]]],
    }
}

/// `sgn(p-4)·t^{(p-4)/(p-1)}`, or `log t` at `p = 4`.
///
/// Defined for every `p > 1`; it is increasing in `t` for each such `p`.
pub fn radial_profile(p: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    ensure_positive("radius t", t)?;
    Ok(profile(p, t)[0])
}

/// `[v(t), v'(t), v''(t)]`.
fn profile(p: f64, t: f64) -> [f64; 3] {
    if p == 4.0 {
        [t.ln(), 1.0 / t, -1.0 / (t * t)]
    } else {
        let k = (p - 4.0) / (p - 1.0);
        let tk = t.powf(k);
        let sg = k.signum();
        [sg * tk, sg * k * tk / t, sg * k * (k - 1.0) * tk / (t * t)]
    }
}

/// `u(q) = v(|center⁻¹q|_K)` with `v` the radial profile for exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPHarmonic {
    p: f64,
    center: Point,
}

impl RadialPHarmonic {
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn center(&self) -> Point {
        self.center
    }
}

pub fn radial_p_harmonic(p: f64) -> Result<RadialPHarmonic> {
    radial_p_harmonic_at(p, Point::default())
}

pub fn radial_p_harmonic_at(p: f64, center: Point) -> Result<RadialPHarmonic> {
    check_p(p)?;
    Ok(RadialPHarmonic { p, center })
}

impl ScalarField for RadialPHarmonic {
    fn value(&self, q: Point) -> f64 {
        let t = group_mul(self.center.inv(), q).gauge();
        if t > 0.0 {
            profile(self.p, t)[0]
        } else {
            f64::NAN
        }
    }

    fn analytic_jet(&self, q: Point) -> Option<Result<HorizontalJet>> {
        let w = group_mul(self.center.inv(), q);
        Some(gauge_power_jet(w, 1.0).map(|g| {
            let [v, v1, v2] = profile(self.p, g.value);
            let d = g.grad_h;
            let h = g.hess_h;
            HorizontalJet {
                value: v,
                grad_h: [v1 * d[0], v1 * d[1]],
                z_deriv: v1 * g.z_deriv,
                hess_h: [
                    [v2 * d[0] * d[0] + v1 * h[0][0], v2 * d[0] * d[1] + v1 * h[0][1]],
                    [v2 * d[1] * d[0] + v1 * h[1][0], v2 * d[1] * d[1] + v1 * h[1][1]],
                ],
            }
        }))
    }
}
