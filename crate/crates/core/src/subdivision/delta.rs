use serde::Serialize;

use super::{VertexId, WeightedSubdivision};
use crate::geom::{dist_sq_point_segment, serialize_rational, sqrt_bounds, to_f64, Rational};

/// The minimum distance from a vertex to an edge of `G` not containing it.
#[derive(Clone, Debug, Serialize)]
pub struct Delta {
    #[serde(serialize_with = "serialize_rational")]
    pub squared: Rational,
    pub value: f64,
    pub vertex: VertexId,
    pub edge: (VertexId, VertexId),
}

/// Exact `δ²` over edges not lying on the boundary of `P`; `None` when there is no
/// such pair.
pub fn delta(s: &WeightedSubdivision) -> Option<Delta> {
    let mut best: Option<(Rational, usize, usize, usize)> = None;
    for &(a, b) in s.edge_nodes() {
        if s.is_boundary_side(a, b) {
            continue;
        }
        for v in 0..s.node_count() {
            if v == a || v == b {
                continue;
            }
            let d = dist_sq_point_segment(s.node_point(v), s.node_point(a), s.node_point(b));
            if best.as_ref().is_none_or(|(m, ..)| d < *m) {
                best = Some((d, v, a, b));
            }
        }
    }
    best.map(|(d, v, a, b)| {
        let (lo, hi) = sqrt_bounds(&d, 64);
        Delta {
            value: to_f64(&((lo + hi) / crate::geom::int(2))),
            squared: d,
            vertex: s.node_id(v),
            edge: (s.node_id(a), s.node_id(b)),
        }
    })
}
