use nalgebra::{Vector2, Vector3};
use num_traits::{Signed, Zero};

use super::rational::{from_f64, PointR2, Rational};
use super::GeomError;

fn sign(q: &Rational) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Sign of the signed area of `abc`: +1 counterclockwise, -1 clockwise, 0 collinear.
pub fn orient2d(a: &PointR2, b: &PointR2, c: &PointR2) -> i32 {
    sign(&(b - a).cross(&(c - a)))
}

/// Angle at `v` between the rays `v->w` and `v->x`.
pub fn angle(w: &PointR2, v: &PointR2, x: &PointR2) -> Result<f64, GeomError> {
    if w == v || x == v {
        return Err(GeomError::DegenerateAngle);
    }
    let a = (w - v).to_f64();
    let b = (x - v).to_f64();
    Ok(a.perp(&b).abs().atan2(a.dot(&b)))
}

/// Exact test for `angle(w, v, x) >= pi/2`, decided by the sign of the dot product.
pub fn angle_at_least_right(w: &PointR2, v: &PointR2, x: &PointR2) -> Result<bool, GeomError> {
    if w == v || x == v {
        return Err(GeomError::DegenerateAngle);
    }
    Ok(!(w - v).dot(&(x - v)).is_positive())
}

/// `<w - v, v - center> >= rho * |w - v|`, evaluated exactly.
pub fn robust_rm_condition(w: &PointR2, v: &PointR2, center: &PointR2, rho: &Rational) -> bool {
    let d = w - v;
    let dot = d.dot(&(v - center));
    if rho.is_zero() {
        return !dot.is_negative();
    }
    if dot.is_negative() {
        return false;
    }
    &dot * &dot >= rho * rho * d.norm_sq()
}

/// `-<w - v, v - center> > rho * |w - v|`: `w` fails the radial condition for every
/// reference point within distance `rho` of `center`.
pub fn rm_excluded(w: &PointR2, v: &PointR2, center: &PointR2, rho: &Rational) -> bool {
    let d = w - v;
    let dot = d.dot(&(v - center));
    if !dot.is_negative() {
        return false;
    }
    rho.is_zero() || &dot * &dot > rho * rho * d.norm_sq()
}

const EPS: f64 = f64::EPSILON / 2.0;
const ORIENT2D_BOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const ORIENT3D_BOUND: f64 = (7.0 + 56.0 * EPS) * EPS;

/// Exact orientation sign for double-precision inputs: a static filter with an
/// exact rational fallback.
pub fn orient2d_f64(a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>) -> i32 {
    let l = (a.x - c.x) * (b.y - c.y);
    let r = (a.y - c.y) * (b.x - c.x);
    let det = l - r;
    let bound = (l.abs() + r.abs()) * ORIENT2D_BOUND;
    if det > bound {
        return 1;
    }
    if -det > bound {
        return -1;
    }
    orient2d(&PointR2::from_f64(a), &PointR2::from_f64(b), &PointR2::from_f64(c))
}

/// Sign of the determinant `[b-a, c-a, d-a]`: positive when `d` lies on the side of
/// the plane `abc` that `(b-a) x (c-a)` points to.
pub fn orient3d_f64(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> i32 {
    let (adx, ady, adz) = (a.x - d.x, a.y - d.y, a.z - d.z);
    let (bdx, bdy, bdz) = (b.x - d.x, b.y - d.y, b.z - d.z);
    let (cdx, cdy, cdz) = (c.x - d.x, c.y - d.y, c.z - d.z);
    let bc = bdx * cdy - cdx * bdy;
    let ca = cdx * ady - adx * cdy;
    let ab = adx * bdy - bdx * ady;
    let det = adz * bc + bdz * ca + cdz * ab;
    let permanent = ((bdx * cdy).abs() + (cdx * bdy).abs()) * adz.abs()
        + ((cdx * ady).abs() + (adx * cdy).abs()) * bdz.abs()
        + ((adx * bdy).abs() + (bdx * ady).abs()) * cdz.abs();
    let bound = permanent * ORIENT3D_BOUND;
    // det computed with d as the reference equals -[b-a, c-a, d-a]
    if det > bound {
        return -1;
    }
    if -det > bound {
        return 1;
    }
    orient3d_exact(a, b, c, d)
}

fn orient3d_exact(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> i32 {
    let q = |v: &Vector3<f64>| [from_f64(v.x), from_f64(v.y), from_f64(v.z)];
    let (a, b, c, d) = (q(a), q(b), q(c), q(d));
    let sub = |u: &[Rational; 3], v: &[Rational; 3]| [&u[0] - &v[0], &u[1] - &v[1], &u[2] - &v[2]];
    let (u, v, w) = (sub(&b, &a), sub(&c, &a), sub(&d, &a));
    let det = &u[0] * (&v[1] * &w[2] - &v[2] * &w[1]) - &u[1] * (&v[0] * &w[2] - &v[2] * &w[0])
        + &u[2] * (&v[0] * &w[1] - &v[1] * &w[0]);
    sign(&det)
}

/// Exact 3x3 determinant sign of rows `[x_i, y_i, z_i]` over doubles.
pub fn det3_sign(rows: [[f64; 3]; 3]) -> i32 {
    let m: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| from_f64(x)).collect()).collect();
    let det = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    sign(&det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rational::rat;

    fn p(x: &str, y: &str) -> PointR2 {
        PointR2::parse(x, y).unwrap()
    }

    #[test]
    fn orientation_examples() {
        let o = PointR2::from_ints(0, 0);
        assert_eq!(orient2d(&o, &PointR2::from_ints(1, 0), &PointR2::from_ints(0, 1)), 1);
        assert_eq!(orient2d(&o, &PointR2::from_ints(1, 1), &PointR2::from_ints(2, 2)), 0);
        assert_eq!(orient2d(&o, &PointR2::from_ints(0, 1), &PointR2::from_ints(1, 0)), -1);
    }

    #[test]
    fn right_angle_decisions_at_p2() {
        let p1 = p("25.5", "0");
        let p2 = p("23.1", "-0.1");
        let p3 = p("23.1", "-1.1");
        let p18 = p("23.2", "14.7");
        assert!(angle_at_least_right(&p3, &p2, &p1).unwrap());
        assert!(!angle_at_least_right(&p18, &p2, &p1).unwrap());
        assert_eq!((&p3 - &p2).dot(&(&p1 - &p2)), rat(-1, 10));
        assert_eq!((&p18 - &p2).dot(&(&p1 - &p2)), rat(172, 100));
        assert!(robust_rm_condition(&p3, &p2, &p1, &rat(0, 1)));
        assert!(!robust_rm_condition(&p3, &p2, &p1, &rat(1, 1)));
        assert!(rm_excluded(&p18, &p2, &p1, &rat(0, 1)));
    }

    #[test]
    fn angle_values() {
        let a = angle(&PointR2::from_ints(1, 0), &PointR2::from_ints(0, 0), &PointR2::from_ints(0, 1)).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let o = PointR2::from_ints(0, 0);
        assert!(matches!(angle(&o, &o, &PointR2::from_ints(1, 0)), Err(GeomError::DegenerateAngle)));
    }

    #[test]
    fn float_orientation_matches_exact() {
        let a = Vector2::new(0.1, 0.1);
        let b = Vector2::new(0.2, 0.2);
        let c = Vector2::new(0.30000000000000004, 0.30000000000000004);
        let exact = orient2d(&PointR2::from_f64(&a), &PointR2::from_f64(&b), &PointR2::from_f64(&c));
        assert_eq!(orient2d_f64(&a, &b, &c), exact);
        let d = Vector3::new(0.0, 0.0, 1.0);
        let (x, y, z) = (Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(orient3d_f64(&x, &y, &z, &d), 1);
        assert_eq!(orient3d_f64(&x, &z, &y, &d), -1);
        assert_eq!(orient3d_f64(&x, &y, &z, &Vector3::new(0.3, 0.3, 0.0)), 0);
    }
}
