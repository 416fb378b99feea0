//! Points of `H^{n+1}` in the hyperboloid model, restricted to the first four
//! coordinates `(x0, x1, x2, x3)`.
//!
//! Full-sphere graphs live in `H^3`. Axisymmetric graphs are stored by their
//! meridian, which lies in the plane spanned by `x1` and the symmetry axis
//! `x3`, so every distance computation for any `n` fits in four components.

pub type Point = [f64; 4];

pub const ORIGIN: Point = [1.0, 0.0, 0.0, 0.0];

/// Warping function `λ(r) = sinh r` of the polar metric.
pub fn lambda(r: f64) -> f64 {
    r.sinh()
}

pub fn lambda_prime(r: f64) -> f64 {
    r.cosh()
}

/// The point at distance `r` from the origin in unit direction `dir`.
pub fn from_polar(r: f64, dir: [f64; 3]) -> Point {
    let s = r.sinh();
    [r.cosh(), s * dir[0], s * dir[1], s * dir[2]]
}

/// Polar coordinates `(r, dir)` about the origin. `dir` is arbitrary at the
/// origin itself.
pub fn to_polar(p: &Point) -> (f64, [f64; 3]) {
    let norm = (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
    let r = norm.asinh();
    if norm == 0.0 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (r, [p[1] / norm, p[2] / norm, p[3] / norm])
}

/// Lifts spatial coordinates `y` to the hyperboloid.
pub fn lift(y: [f64; 3]) -> Point {
    let s2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    [(1.0 + s2).sqrt(), y[0], y[1], y[2]]
}

pub fn minkowski(p: &Point, q: &Point) -> f64 {
    -p[0] * q[0] + p[1] * q[1] + p[2] * q[2] + p[3] * q[3]
}

/// Geodesic distance, via `|p − q|_L = 2 sinh(d/2)` which stays accurate for
/// nearby points.
pub fn distance(p: &Point, q: &Point) -> f64 {
    let diff = [p[0] - q[0], p[1] - q[1], p[2] - q[2], p[3] - q[3]];
    let chord2 = minkowski(&diff, &diff).max(0.0);
    2.0 * (0.5 * chord2.sqrt()).asinh()
}

/// Distance of a point from the origin.
pub fn radius(p: &Point) -> f64 {
    to_polar(p).0
}

/// The Lorentz boost along the line through the origin and `c` that maps the
/// origin to `c`.
pub fn boost(c: &Point, x: &Point) -> Point {
    let cs = [c[1], c[2], c[3]];
    let dot = cs[0] * x[1] + cs[1] * x[2] + cs[2] * x[3];
    let coef = dot / (c[0] + 1.0) + x[0];
    [
        c[0] * x[0] + dot,
        x[1] + coef * cs[0],
        x[2] + coef * cs[1],
        x[3] + coef * cs[2],
    ]
}

/// Point reached from `c` after distance `t` along the geodesic with initial
/// direction `dir` (a unit vector, transported from the origin by the boost).
pub fn geodesic_from(c: &Point, dir: [f64; 3], t: f64) -> Point {
    boost(c, &from_polar(t, dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_along_a_ray() {
        let p = from_polar(1.3, [0.0, 0.0, 1.0]);
        let q = from_polar(0.4, [0.0, 0.0, 1.0]);
        assert!((distance(&p, &q) - 0.9).abs() < 1e-14);
        assert!((distance(&ORIGIN, &p) - 1.3).abs() < 1e-14);
    }

    #[test]
    fn law_of_cosines() {
        let (a, r, th) = (0.3f64, 0.9f64, 1.1f64);
        let c = from_polar(a, [0.0, 0.0, 1.0]);
        let x = from_polar(r, [th.sin(), 0.0, th.cos()]);
        let expected = (a.cosh() * r.cosh() - a.sinh() * r.sinh() * th.cos()).acosh();
        assert!((distance(&c, &x) - expected).abs() < 1e-13);
    }

    #[test]
    fn boost_is_an_isometry() {
        let c = lift([0.2, -0.4, 0.7]);
        assert!(distance(&boost(&c, &ORIGIN), &c) < 1e-14);
        let p = from_polar(0.8, [0.6, 0.0, 0.8]);
        let q = from_polar(1.1, [0.0, 1.0, 0.0]);
        let d0 = distance(&p, &q);
        let d1 = distance(&boost(&c, &p), &boost(&c, &q));
        assert!((d0 - d1).abs() < 1e-13);
        let y = geodesic_from(&c, [0.0, 0.0, 1.0], 0.5);
        assert!((distance(&c, &y) - 0.5).abs() < 1e-13);
    }
}
