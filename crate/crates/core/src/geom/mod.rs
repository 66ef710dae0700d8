//! Exact and floating-point planar primitives, angle predicates and planar isometries.

mod isometry;
mod overlap;
mod predicates;
mod rational;

pub use isometry::{compose_rotations, normalize_angle, Composite, PlanarIsometry, PointF2, PointF3, Rotation};
pub use overlap::{
    point_in_triangle_f64, point_on_open_segment, segments_intersect, segments_intersect_f64, triangles_overlap,
    triangles_overlap_f64,
};
pub use predicates::{
    angle, angle_at_least_right, det3_sign, orient2d, orient2d_f64, orient3d_f64, rm_excluded, robust_rm_condition,
};
pub use rational::{
    dist_sq_point_segment, fmt_rational, from_f64, int, parse_decimal, parse_rational, rat, serialize_opt_rational, serialize_rational, sqrt_bounds,
    to_f64,
    PointR2, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("degenerate angle: a ray endpoint coincides with the apex")]
    DegenerateAngle,
    #[error("degenerate (zero-area) triangle")]
    DegenerateTriangle,
    #[error("not a decimal number: {0:?}")]
    BadDecimal(String),
}
