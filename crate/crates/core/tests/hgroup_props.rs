use heisenberg_core::hgroup::*;
use heisenberg_core::rng;
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn pt_close(a: Point, b: Point, tol: f64) -> bool {
    rel_close(a.x, b.x, tol) && rel_close(a.y, b.y, tol) && rel_close(a.z, b.z, tol)
}

fn random_point<R: Rng>(r: &mut R, s: f64) -> Point {
    Point::new(r.random_range(-s..s), r.random_range(-s..s), r.random_range(-s..s))
}

#[test]
fn associativity_on_random_triples() {
    let mut r = rng::stream(11, 0);
    for _ in 0..10_000 {
        let (a, b, c) = (random_point(&mut r, 5.0), random_point(&mut r, 5.0), random_point(&mut r, 5.0));
        let l = group_mul(group_mul(a, b), c);
        let rr = group_mul(a, group_mul(b, c));
        assert!(pt_close(l, rr, 1e-12), "{l:?} vs {rr:?}");
    }
}

#[test]
fn left_invariance_on_random_triples() {
    let mut r = rng::stream(12, 0);
    for _ in 0..10_000 {
        let (g, a, b) = (random_point(&mut r, 3.0), random_point(&mut r, 3.0), random_point(&mut r, 3.0));
        let d0 = dist(a, b);
        let d1 = dist(group_mul(g, a), group_mul(g, b));
        assert!(rel_close(d0, d1, 1e-12), "{d0} vs {d1}");
    }
}

#[test]
fn distance_example_sign() {
    let d = dist(Point::new(1.0, 0.0, 0.0), Point::new(1.0, 1.0, 0.0));
    assert!((d - 5f64.powf(0.25)).abs() < 1e-14);
    let w = group_mul(group_inv(Point::new(1.0, 0.0, 0.0)), Point::new(1.0, 1.0, 0.0));
    assert_eq!(w, Point::new(0.0, 1.0, -0.5));
}

#[test]
fn unit_ball_volume_by_independent_rejection() {
    // indicator integration over the bounding box [-1,1]²×[-¼,¼] of volume 2
    let mut r = rng::stream(13, 0);
    let n = 2_000_000;
    let mut hits = 0usize;
    for _ in 0..n {
        let x: f64 = r.random_range(-1.0..1.0);
        let y: f64 = r.random_range(-1.0..1.0);
        let z: f64 = r.random_range(-0.25..0.25);
        if (x * x + y * y).powi(2) + 16.0 * z * z < 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    let se = 2.0 * (p * (1.0 - p) / n as f64).sqrt();
    let v = 2.0 * p;
    assert!((v - UNIT_BALL_VOLUME).abs() < 4.0 * se, "{v} vs {UNIT_BALL_VOLUME}");
    assert!(ball_volume(1.0).unwrap() > 4.0 / 3.0 * std::f64::consts::PI * 0.25f64.powi(3));
}

#[test]
fn octant_chi_square() {
    let mut r = rng::stream(14, 0);
    let n = 1_000_000;
    let mut cells = [0usize; 8];
    for _ in 0..n {
        let s = sample_ball(Point::default(), 1.0, &mut r);
        let k = (s.x > 0.0) as usize + 2 * (s.y > 0.0) as usize + 4 * (s.z > 0.0) as usize;
        cells[k] += 1;
    }
    let e = n as f64 / 8.0;
    let chi: f64 = cells.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(7.0).unwrap().cdf(chi);
    assert!(p > 0.001, "chi² = {chi}, p = {p}");
}

#[test]
fn second_moment_of_x_over_unit_ball() {
    let mut r = rng::stream(15, 0);
    let n = 400_000;
    let (mut m, mut c) = (0.0, Point::default());
    for _ in 0..n {
        let s = sample_unit_ball(&mut r);
        m += s.x * s.x;
        c = c + s;
    }
    let m = m / n as f64;
    assert!((m - 2.0 / (3.0 * std::f64::consts::PI)).abs() < 2e-3, "{m}");
    assert!(c.scale(1.0 / n as f64).euclid_norm() < 5e-3);
}

#[test]
fn aspect_one_ellipsoid_is_the_ball() {
    let mut r = rng::stream(16, 0);
    let center = Point::new(0.3, -0.2, 0.1);
    let shape = EllipsoidShape::new(0.5, 1.0, Point::new(0.0, 1.0, 0.0)).unwrap();
    let n = 100_000;
    let (mut se, mut sb) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let e = sample_ellipsoid(center, &shape, &mut r);
        assert!(dist(center, e) < 0.5);
        se.push((e.x - center.x).powi(2));
        sb.push((sample_ball(center, 0.5, &mut r).x - center.x).powi(2));
    }
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let ((m1, v1), (m2, v2)) = (stats(&se), stats(&sb));
    assert!((m1 - m2).abs() < 3.0 * (v1 + v2).sqrt());
}

proptest! {
    #[test]
    fn inverse_cancels(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let q = Point::new(x, y, z);
        let e = group_mul(q, group_inv(q));
        prop_assert!(e.euclid_norm() < 1e-12 * (1.0 + q.euclid_norm().powi(2)));
        prop_assert_eq!(group_inv(group_inv(q)), q);
    }

    #[test]
    fn dilation_is_homogeneous(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64, l in 0.01..50.0f64) {
        let q = Point::new(x, y, z);
        let d = dilate(l, q).unwrap();
        prop_assert!(rel_close(gauge(d), l * gauge(q), 1e-12));
    }

    #[test]
    fn horizontal_norm_below_gauge(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
        let q = Point::new(x, y, z);
        prop_assert!(q.hor_norm() <= q.gauge() * (1.0 + 1e-15));
    }

    #[test]
    fn dilation_is_a_group_morphism(
        a in prop::array::uniform3(-3.0..3.0f64),
        b in prop::array::uniform3(-3.0..3.0f64),
        l in 0.1..4.0f64,
    ) {
        let (a, b) = (Point::new(a[0], a[1], a[2]), Point::new(b[0], b[1], b[2]));
        let lhs = group_mul(a, b).dilate(l);
        let rhs = group_mul(a.dilate(l), b.dilate(l));
        prop_assert!(pt_close(lhs, rhs, 1e-12));
    }

    #[test]
    fn triangle_inequality(
        a in prop::array::uniform3(-3.0..3.0f64),
        b in prop::array::uniform3(-3.0..3.0f64),
        c in prop::array::uniform3(-3.0..3.0f64),
    ) {
        let (a, b, c) = (Point::new(a[0], a[1], a[2]), Point::new(b[0], b[1], b[2]), Point::new(c[0], c[1], c[2]));
        prop_assert!(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
    }
}
