use num_traits::Signed;

use super::isometry::PointF2;
use super::predicates::{orient2d, orient2d_f64};
use super::rational::PointR2;
use super::GeomError;

/// Shared logic over an orientation oracle for points addressed by index.
fn segments_cross<F: Fn(usize, usize, usize) -> i32, D: Fn(usize, usize) -> bool>(orient: F, between: D) -> bool {
    // indices: 0=a, 1=b, 2=c, 3=d
    let o1 = orient(0, 1, 2);
    let o2 = orient(0, 1, 3);
    let o3 = orient(2, 3, 0);
    let o4 = orient(2, 3, 1);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    if o1 == 0 && o2 == 0 {
        // collinear: the open intervals overlap iff some endpoint lies strictly inside
        // the other segment (coincident segments are handled by the caller)
        return between(2, 0) || between(3, 0) || between(0, 2) || between(1, 2);
    }
    false
}

/// True iff the open segments `ab` and `cd` share a point. Touching at endpoints, or an
/// endpoint resting on the other segment, reports false.
pub fn segments_intersect(a: &PointR2, b: &PointR2, c: &PointR2, d: &PointR2) -> bool {
    let pts = [a, b, c, d];
    if (a == c && b == d) || (a == d && b == c) {
        return a != b;
    }
    segments_cross(
        |i, j, k| orient2d(pts[i], pts[j], pts[k]),
        |p, s| strictly_between(pts[p], pts[s], pts[s + 1]),
    )
}

/// Collinear `p` lies strictly between `a` and `b`.
fn strictly_between(p: &PointR2, a: &PointR2, b: &PointR2) -> bool {
    let ap = p - a;
    let bp = p - b;
    ap.dot(&bp).is_negative()
}

/// True iff `p` lies in the open segment `ab`.
pub fn point_on_open_segment(p: &PointR2, a: &PointR2, b: &PointR2) -> bool {
    orient2d(a, b, p) == 0 && strictly_between(p, a, b)
}

/// Double-precision variant of [`segments_intersect`] with exact signs.
pub fn segments_intersect_f64(a: &PointF2, b: &PointF2, c: &PointF2, d: &PointF2) -> bool {
    let pts = [a, b, c, d];
    if (a == c && b == d) || (a == d && b == c) {
        return a != b;
    }
    segments_cross(
        |i, j, k| orient2d_f64(pts[i], pts[j], pts[k]),
        |p, s| {
            let (p, a, b) = (pts[p], pts[s], pts[s + 1]);
            strictly_between(&PointR2::from_f64(p), &PointR2::from_f64(a), &PointR2::from_f64(b))
        },
    )
}

fn triangle_overlap_core<F: Fn(usize, usize, usize) -> i32>(orient: F) -> Result<bool, GeomError> {
    // indices 0..3 first triangle, 3..6 second
    let s1 = orient(0, 1, 2);
    let s2 = orient(3, 4, 5);
    if s1 == 0 || s2 == 0 {
        return Err(GeomError::DegenerateTriangle);
    }
    let t1: [usize; 3] = if s1 > 0 { [0, 1, 2] } else { [0, 2, 1] };
    let t2: [usize; 3] = if s2 > 0 { [3, 4, 5] } else { [3, 5, 4] };
    // separating axis: an edge line of either triangle with the other triangle in the
    // closed outer half-plane
    for (tri, other) in [(t1, t2), (t2, t1)] {
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            if other.iter().all(|&m| orient(i, j, m) <= 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff the interiors of the two triangles intersect.
pub fn triangles_overlap(t1: &[PointR2; 3], t2: &[PointR2; 3]) -> Result<bool, GeomError> {
    let pts = [&t1[0], &t1[1], &t1[2], &t2[0], &t2[1], &t2[2]];
    triangle_overlap_core(|i, j, k| orient2d(pts[i], pts[j], pts[k]))
}

/// Double-precision variant of [`triangles_overlap`]; signs are exact.
pub fn triangles_overlap_f64(t1: &[PointF2; 3], t2: &[PointF2; 3]) -> Result<bool, GeomError> {
    let pts = [&t1[0], &t1[1], &t1[2], &t2[0], &t2[1], &t2[2]];
    triangle_overlap_core(|i, j, k| orient2d_f64(pts[i], pts[j], pts[k]))
}

/// Closed point-in-triangle test for a counterclockwise or clockwise triangle.
pub fn point_in_triangle_f64(p: &PointF2, t: &[PointF2; 3]) -> bool {
    let s = orient2d_f64(&t[0], &t[1], &t[2]);
    (0..3).all(|k| orient2d_f64(&t[k], &t[(k + 1) % 3], p) * s >= 0)
}
