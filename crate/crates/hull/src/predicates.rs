//! Exact orientation and in-sphere signs.

use robust::Coord3D;

pub type Point = [f64; 3];

#[inline]
fn c(p: &Point) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Sign of `det(b−a, c−a, d−a)`: positive when `d` lies on the side of the
/// plane `abc` that sees `a, b, c` counterclockwise.
#[inline]
pub fn orient(a: &Point, b: &Point, c3: &Point, d: &Point) -> f64 {
    -robust::orient3d(c(a), c(b), c(c3), c(d))
}

/// Positive when `e` is strictly inside the circumsphere of the positively
/// oriented tetrahedron `abcd`.
#[inline]
pub fn in_sphere(a: &Point, b: &Point, c3: &Point, d: &Point, e: &Point) -> f64 {
    robust::insphere(c(b), c(a), c(c3), c(d), c(e))
}

/// Floating-point `det(b−a, c−a, d−a) / 6`.
#[inline]
pub fn signed_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let w = sub(d, a);
    dot(&cross(&u, &v), &w) / 6.0
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

/// Circumradius of a tetrahedron; infinite when it is flat.
pub fn circumradius(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    let w = sub(d, a);
    let det = dot(&u, &cross(&v, &w));
    if det == 0.0 {
        return f64::INFINITY;
    }
    let (uu, vv, ww) = (dot(&u, &u), dot(&v, &v), dot(&w, &w));
    let vw = cross(&v, &w);
    let wu = cross(&w, &u);
    let uv = cross(&u, &v);
    let x = [
        uu * vw[0] + vv * wu[0] + ww * uv[0],
        uu * vw[1] + vv * wu[1] + ww * uv[1],
        uu * vw[2] + vv * wu[2] + ww * uv[2],
    ];
    dot(&x, &x).sqrt() / (2.0 * det.abs())
}
