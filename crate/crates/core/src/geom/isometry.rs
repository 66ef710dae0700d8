use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

pub type PointF2 = Vector2<f64>;
pub type PointF3 = nalgebra::Vector3<f64>;

/// Angles within this distance of a multiple of 2π compose to a translation.
const ZERO_ANGLE: f64 = 1e-14;

fn rot(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Reduces an angle into [0, 2π).
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Orientation-preserving planar isometry `p -> R(angle) p + translation`, with
/// `angle` measured counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanarIsometry {
    pub angle: f64,
    pub translation: PointF2,
}

impl PlanarIsometry {
    pub fn identity() -> Self {
        PlanarIsometry { angle: 0.0, translation: PointF2::zeros() }
    }

    pub fn new(angle: f64, translation: PointF2) -> Self {
        PlanarIsometry { angle: normalize_angle(angle), translation }
    }

    pub fn translation(t: PointF2) -> Self {
        PlanarIsometry { angle: 0.0, translation: t }
    }

    pub fn is_orientation_preserving(&self) -> bool {
        true
    }

    pub fn apply(&self, p: &PointF2) -> PointF2 {
        rot(self.angle) * p + self.translation
    }

    pub fn apply_vector(&self, v: &PointF2) -> PointF2 {
        rot(self.angle) * v
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PlanarIsometry) -> PlanarIsometry {
        PlanarIsometry::new(self.angle + other.angle, rot(self.angle) * other.translation + self.translation)
    }

    pub fn inverse(&self) -> PlanarIsometry {
        let r = rot(-self.angle);
        PlanarIsometry::new(-self.angle, -(r * self.translation))
    }

    /// The isometry carrying segment `a0 b0` onto the direction of `a1 b1`, with `a0 -> a1`.
    pub fn from_segments(a0: &PointF2, b0: &PointF2, a1: &PointF2, b1: &PointF2) -> PlanarIsometry {
        let d0 = b0 - a0;
        let d1 = b1 - a1;
        let angle = d1.y.atan2(d1.x) - d0.y.atan2(d0.x);
        let r = rot(angle);
        PlanarIsometry::new(angle, a1 - r * a0)
    }
}

/// Clockwise rotation about `pivot` by `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rotation {
    pub pivot: PointF2,
    pub angle: f64,
}

impl Rotation {
    pub fn new(pivot: PointF2, angle: f64) -> Self {
        Rotation { pivot, angle: normalize_angle(angle) }
    }

    pub fn to_isometry(&self) -> PlanarIsometry {
        let r = rot(-self.angle);
        PlanarIsometry::new(-self.angle, self.pivot - r * self.pivot)
    }

    pub fn apply(&self, p: &PointF2) -> PointF2 {
        self.to_isometry().apply(p)
    }
}

/// A composite of rotations: either a rotation or a pure translation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Composite {
    Rotation(Rotation),
    Translation(PointF2),
}

impl Composite {
    pub fn apply(&self, p: &PointF2) -> PointF2 {
        match self {
            Composite::Rotation(r) => r.apply(p),
            Composite::Translation(t) => p + t,
        }
    }

    /// Clockwise angle in [0, 2π); zero for translations.
    pub fn angle(&self) -> f64 {
        match self {
            Composite::Rotation(r) => r.angle,
            Composite::Translation(_) => 0.0,
        }
    }
}

/// `R_1 ∘ R_2 ∘ … ∘ R_k` as a single clockwise rotation, or a translation when the
/// total angle is a multiple of 2π.
pub fn compose_rotations(rs: &[Rotation]) -> Option<Composite> {
    let first = rs.first()?;
    let mut iso = first.to_isometry();
    let mut total = first.angle;
    for r in &rs[1..] {
        iso = iso.compose(&r.to_isometry());
        total += r.angle;
    }
    let cw = normalize_angle(total);
    if cw < ZERO_ANGLE || TAU - cw < ZERO_ANGLE {
        return Some(Composite::Translation(iso.translation));
    }
    // fixed point c of p -> A p + t solves (I - A) c = t
    let a = rot(-cw);
    let m = Matrix2::identity() - a;
    let pivot = m.lu().solve(&iso.translation).expect("nonsingular for nonzero angle");
    Some(Composite::Rotation(Rotation { pivot, angle: cw }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn common_pivot_angles_add() {
        let p = PointF2::new(1.5, -2.0);
        let c = compose_rotations(&[Rotation::new(p, 0.3), Rotation::new(p, 0.4)]).unwrap();
        match c {
            Composite::Rotation(r) => {
                assert!((r.angle - 0.7).abs() < 1e-12);
                assert!((r.pivot - p).norm() < 1e-12);
            }
            _ => panic!("expected rotation"),
        }
    }

    #[test]
    fn half_turns_compose_to_translation() {
        let c = compose_rotations(&[
            Rotation::new(PointF2::new(0.0, 0.0), PI),
            Rotation::new(PointF2::new(2.0, 0.0), PI),
        ])
        .unwrap();
        match c {
            Composite::Translation(t) => assert!((t - PointF2::new(-4.0, 0.0)).norm() < 1e-12),
            _ => panic!("expected translation"),
        }
    }

    #[test]
    fn small_rotations_pivot_near_midpoint() {
        let beta = 1e-3;
        let p1 = PointF2::new(1.0, 2.0);
        let p2 = PointF2::new(-3.0, 0.5);
        let c = compose_rotations(&[Rotation::new(p1, beta / 2.0), Rotation::new(p2, beta / 2.0)]).unwrap();
        let Composite::Rotation(r) = c else { panic!("expected rotation") };
        assert!((r.pivot - (p1 + p2) / 2.0).norm() < 1e-3);
        // independent check: the pivot is a fixed point of the sequential application
        let q = Rotation::new(p1, beta / 2.0).apply(&Rotation::new(p2, beta / 2.0).apply(&r.pivot));
        assert!((q - r.pivot).norm() < 1e-9);
    }

    #[test]
    fn clockwise_convention() {
        let r = Rotation::new(PointF2::zeros(), PI / 2.0);
        let q = r.apply(&PointF2::new(1.0, 0.0));
        assert!((q - PointF2::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn isometry_inverse_and_segments() {
        let iso = PlanarIsometry::new(0.8, PointF2::new(2.0, -1.0));
        let p = PointF2::new(0.3, 0.9);
        assert!((iso.inverse().apply(&iso.apply(&p)) - p).norm() < 1e-14);
        let (a0, b0) = (PointF2::new(0.0, 0.0), PointF2::new(1.0, 0.0));
        let (a1, b1) = (PointF2::new(1.0, 1.0), PointF2::new(1.0, 2.0));
        let s = PlanarIsometry::from_segments(&a0, &b0, &a1, &b1);
        assert!((s.apply(&a0) - a1).norm() < 1e-15);
        assert!((s.apply(&b0) - b1).norm() < 1e-15);
    }
}
