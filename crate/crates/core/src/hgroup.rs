//! Arithmetic on the first Heisenberg group in Carnot coordinates.
//!
//! The group law is `(x,y,z)*(x',y',z') = (x+x', y+y', z+z'+(xy'-yx')/2)`,
//! the Korányi gauge is `((x²+y²)² + 16z²)^{1/4}` and the anisotropic
//! dilations act by `(x,y,z) -> (λx, λy, λ²z)`. The gauge is 1-homogeneous
//! under dilations and `d(a,b) = |a⁻¹*b|_K` is a left-invariant metric.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{ensure_positive, Error, Result};

/// A point of the Heisenberg group in Carnot coordinates.
///
/// `Add`/`Sub` are the Euclidean vector operations of ℝ³; the group
/// product is `*` (or [`group_mul`]).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ORIGIN: Point = Point { x: 0.0, y: 0.0, z: 0.0 };

/// Lebesgue volume of the unit Korányi ball, `π²/8`.
///
/// Integrating the vertical extent `√(1-|h|⁴)/2` over the unit disc gives
/// `π ∫₀¹ √(1-u²) du / 2 = π²/8`.
pub const UNIT_BALL_VOLUME: f64 = PI * PI / 8.0;

impl Point {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Euclidean norm of the horizontal part `(x, y)`.
    pub fn hor_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn hor_norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Korányi gauge `|q|_K`.
    pub fn gauge(&self) -> f64 {
        self.gauge4().sqrt().sqrt()
    }

    /// Fourth power of the gauge, `(x²+y²)² + 16z²`.
    pub fn gauge4(&self) -> f64 {
        let h = self.hor_norm_sq();
        h * h + 16.0 * self.z * self.z
    }

    pub fn inv(&self) -> Point {
        Point::new(-self.x, -self.y, -self.z)
    }

    /// Anisotropic dilation `ρ_λ`. No check on the sign of `λ`.
    pub fn dilate(&self, lambda: f64) -> Point {
        Point::new(lambda * self.x, lambda * self.y, lambda * lambda * self.z)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(&self, s: f64) -> Point {
        Point::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Retracts onto the closed unit Korányi ball along the dilation curve
    /// through `self`.
    pub fn clamp_to_unit_ball(&self) -> Point {
        let g = self.gauge();
        if g > 1.0 {
            self.dilate(1.0 / g)
        } else {
            *self
        }
    }
}

impl From<[f64; 3]> for Point {
    fn from(a: [f64; 3]) -> Self {
        Point::new(a[0], a[1], a[2])
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.inv()
    }
}

/// Group product.
impl Mul for Point {
    type Output = Point;
    fn mul(self, b: Point) -> Point {
        group_mul(self, b)
    }
}

#[inline]
pub fn group_mul(a: Point, b: Point) -> Point {
    Point::new(a.x + b.x, a.y + b.y, a.z + b.z + 0.5 * (a.x * b.y - a.y * b.x))
}

#[inline]
pub fn group_inv(a: Point) -> Point {
    a.inv()
}

#[inline]
pub fn gauge(a: Point) -> f64 {
    a.gauge()
}

/// Left-invariant Korányi distance `|a⁻¹*b|_K`.
#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    group_mul(a.inv(), b).gauge()
}

pub fn dilate(lambda: f64, a: Point) -> Result<Point> {
    ensure_positive("dilation factor", lambda)?;
    Ok(a.dilate(lambda))
}

/// Point of the unit Korányi sphere with latitude `beta ∈ [-π/2, π/2]` and
/// longitude `theta`: `(√cos β cos θ, √cos β sin θ, sin β / 4)`.
///
/// Negation is `(beta, theta) -> (-beta, theta + π)`.
pub fn sphere_point(beta: f64, theta: f64) -> Point {
    let h = beta.cos().max(0.0).sqrt();
    Point::new(h * theta.cos(), h * theta.sin(), 0.25 * beta.sin())
}

/// Shape of a Korányi ellipsoid `E(q, r; α, ν)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipsoidShape {
    radius: f64,
    aspect: f64,
    orientation: Point,
}

impl EllipsoidShape {
    /// The orientation is normalized to unit Euclidean length.
    pub fn new(radius: f64, aspect: f64, orientation: Point) -> Result<Self> {
        ensure_positive("ellipsoid radius", radius)?;
        ensure_positive("ellipsoid aspect", aspect)?;
        let n = orientation.euclid_norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("ellipsoid orientation must be a nonzero finite vector"));
        }
        Ok(EllipsoidShape { radius, aspect, orientation: orientation.scale(1.0 / n) })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    pub fn orientation(&self) -> Point {
        self.orientation
    }

    /// Image of a unit-ball point: `q * ρ_r(L(w; α, ν))`.
    pub fn place(&self, center: Point, w: Point) -> Point {
        group_mul(center, ellipsoid_map(w, self).dilate(self.radius))
    }
}

/// The rank-one stretch `L(p; α, ν) = p + (α-1)⟨p, ν⟩ν` (Euclidean ⟨·,·⟩).
pub fn ellipsoid_map(p: Point, shape: &EllipsoidShape) -> Point {
    stretch(p, shape.aspect, shape.orientation)
}

#[inline]
pub(crate) fn stretch(p: Point, aspect: f64, unit_dir: Point) -> Point {
    let k = (aspect - 1.0) * p.dot(&unit_dir);
    p + unit_dir.scale(k)
}

/// Uniform sample of the unit Korányi ball by rejection from the box
/// `[-1,1]² × [-¼,¼]`.
pub fn sample_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> Point {
    loop {
        let p = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.25..0.25));
        if p.gauge4() < 1.0 {
            return p;
        }
    }
}

/// Uniform sample of the unit Euclidean disc, by rejection.
pub fn sample_unit_disc<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        if a * a + b * b < 1.0 {
            return (a, b);
        }
    }
}

/// Uniform sample of the Korányi ball `B_r(center)`, realized as
/// `center * ρ_r(w)` with `w` uniform on `B₁(0)`.
pub fn sample_ball<R: Rng + ?Sized>(center: Point, r: f64, rng: &mut R) -> Point {
    group_mul(center, sample_unit_ball(rng).dilate(r))
}

/// Uniform sample of the ellipsoid `E(center, r; α, ν)`.
pub fn sample_ellipsoid<R: Rng + ?Sized>(center: Point, shape: &EllipsoidShape, rng: &mut R) -> Point {
    shape.place(center, sample_unit_ball(rng))
}

/// Volume of `B_r(q)`: `r⁴ · |B₁(0)|` (Haar measure is Lebesgue measure and
/// the dilation Jacobian is `r⁴`).
pub fn ball_volume(r: f64) -> Result<f64> {
    ensure_positive("ball radius", r)?;
    Ok(r.powi(4) * UNIT_BALL_VOLUME)
}

/// Midpoint tensor grid on the bounding box `[-1,1]²×[-¼,¼]`, keeping the
/// nodes inside the open unit ball. Closed under negation.
pub fn unit_ball_tensor_nodes(per_axis: usize) -> Vec<Point> {
    let n = per_axis.max(1);
    let hx = 2.0 / n as f64;
    let hz = 0.5 / n as f64;
    let mut out = Vec::new();
    for k in 0..n {
        let z = -0.25 + (k as f64 + 0.5) * hz;
        for j in 0..n {
            let y = -1.0 + (j as f64 + 0.5) * hx;
            for i in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * hx;
                let p = Point::new(x, y, z);
                if p.gauge4() < 1.0 {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Smallest per-axis count whose tensor grid keeps at least `target` nodes.
pub fn tensor_nodes_for_count(target: usize) -> usize {
    let accept = UNIT_BALL_VOLUME / 2.0;
    let mut n = ((target as f64 / accept).cbrt().floor() as usize).max(1);
    while unit_ball_tensor_nodes(n).len() < target {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a - b).euclid_norm() <= tol
    }

    #[test]
    fn group_law_examples() {
        let p = group_mul(Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0));
        assert_eq!(p, Point::new(1.0, 1.0, 0.5));
        let q = Point::new(0.3, -1.2, 2.5);
        assert_eq!(group_mul(q, ORIGIN), q);
        assert_eq!(group_mul(q, group_inv(q)), ORIGIN);
        assert_eq!(group_inv(Point::new(1.0, 2.0, 3.0)), Point::new(-1.0, -2.0, -3.0));
        assert_eq!(group_inv(ORIGIN), ORIGIN);
        assert_eq!(group_inv(group_inv(q)), q);
    }

    #[test]
    fn gauge_and_dist_examples() {
        assert!((gauge(Point::new(3.0, 4.0, 0.0)) - 5.0).abs() < 1e-14);
        assert!((gauge(Point::new(0.0, 0.0, 1.0)) - 2.0).abs() < 1e-14);
        assert_eq!(gauge(ORIGIN), 0.0);
        let q = Point::new(0.4, 0.1, -0.7);
        assert_eq!(dist(q, q), 0.0);
        assert!((dist(ORIGIN, Point::new(3.0, 4.0, 0.0)) - 5.0).abs() < 1e-14);
        // inv(1,0,0)*(1,1,0) = (0, 1, -1/2); gauge = (1 + 16/4)^{1/4}
        let d = dist(Point::new(1.0, 0.0, 0.0), Point::new(1.0, 1.0, 0.0));
        assert!((d - 5f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilate(2.0, Point::new(1.0, 1.0, 1.0)).unwrap(), Point::new(2.0, 2.0, 4.0));
        let q = Point::new(0.2, -0.5, 0.9);
        assert!((gauge(dilate(2.0, q).unwrap()) - 2.0 * gauge(q)).abs() < 1e-14);
        assert_eq!(dilate(1.0, q).unwrap(), q);
        assert!(dilate(0.0, q).is_err());
        assert!(dilate(-1.0, q).is_err());
        let a = dilate(0.5, dilate(3.0, q).unwrap()).unwrap();
        assert!(close(a, q.dilate(1.5), 1e-15));
    }

    #[test]
    fn ellipsoid_map_examples() {
        let nu = Point::new(0.6, 0.0, 0.8);
        let p = Point::new(0.3, -0.2, 0.1);
        let unit = EllipsoidShape::new(1.0, 1.0, nu).unwrap();
        assert_eq!(ellipsoid_map(p, &unit), p);
        let perp = Point::new(0.8, 0.5, -0.6);
        let s2 = EllipsoidShape::new(1.0, 2.0, nu).unwrap();
        assert!(close(ellipsoid_map(perp, &s2), perp, 1e-15));
        assert!(close(ellipsoid_map(nu, &s2), nu.scale(2.0), 1e-15));
        // re-normalized on construction
        let s = EllipsoidShape::new(1.0, 2.0, Point::new(3.0, 0.0, 4.0)).unwrap();
        assert!((s.orientation().euclid_norm() - 1.0).abs() < 1e-12);
        assert!(EllipsoidShape::new(1.0, 2.0, ORIGIN).is_err());
        assert!(EllipsoidShape::new(0.0, 2.0, nu).is_err());
    }

    #[test]
    fn ball_volume_scaling() {
        let v1 = ball_volume(1.0).unwrap();
        assert!((ball_volume(2.0).unwrap() / v1 - 16.0).abs() < 1e-12);
        // inscribed Euclidean ball: |p|_K <= ... the Euclidean ball of radius 1/4 is inside
        assert!(v1 > 4.0 / 3.0 * PI * 0.25f64.powi(3));
        assert!(ball_volume(0.0).is_err());
    }

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = Point::new(1.0, -2.0, 0.5);
        for _ in 0..10_000 {
            let s = sample_ball(c, 0.3, &mut rng);
            assert!(dist(c, s) < 0.3);
        }
    }

    #[test]
    fn tensor_nodes_symmetric() {
        let nodes = unit_ball_tensor_nodes(12);
        let sum = nodes.iter().fold(ORIGIN, |a, &p| a + p);
        assert!(sum.euclid_norm() < 1e-12);
        assert!(nodes.iter().all(|p| p.gauge() < 1.0));
        let n = tensor_nodes_for_count(4096);
        assert!(unit_ball_tensor_nodes(n).len() >= 4096);
        assert!(unit_ball_tensor_nodes(n - 1).len() < 4096);
    }

    #[test]
    fn sphere_points_have_unit_gauge() {
        for i in 0..50 {
            let b = -PI / 2.0 + PI * i as f64 / 49.0;
            let p = sphere_point(b, 0.37 * i as f64);
            assert!((p.gauge() - 1.0).abs() < 1e-12);
            let m = sphere_point(-b, 0.37 * i as f64 + PI);
            assert!(close(m, -p, 1e-12));
        }
    }
}
