use serde::Serialize;

use super::{SubdivisionError, VertexId, WeightedSubdivision};
use crate::geom::{rm_excluded, robust_rm_condition, PointR2, Rational};

/// How a disk of possible reference points is turned into a successor test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SuccessorRule {
    /// The radial condition holds for every reference point in the disk.
    Certain,
    /// The radial condition holds for some reference point in the disk.
    Possible,
}

/// A simple path in `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathInG {
    pub vertices: Vec<VertexId>,
    /// The path starts at a point of an edge rather than at a vertex.
    pub starts_at_edge_point: bool,
}

impl PathInG {
    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&u| u == v)
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("nonempty path")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathStatus {
    ReachedBoundary,
    Branched { at: VertexId, options: Vec<VertexId> },
    DeadEnd { at: VertexId },
}

fn successors_with(
    s: &WeightedSubdivision,
    v: VertexId,
    center: &PointR2,
    rho: &Rational,
    rule: SuccessorRule,
) -> Result<Vec<VertexId>, SubdivisionError> {
    let n = s.node_of(v)?;
    let p = s.node_point(n);
    Ok(s.neighbors(n)
        .iter()
        .filter(|&&w| {
            let q = s.node_point(w);
            match rule {
                SuccessorRule::Certain => robust_rm_condition(q, p, center, rho),
                SuccessorRule::Possible => !rm_excluded(q, p, center, rho),
            }
        })
        .map(|&w| s.node_id(w))
        .collect())
}

/// Neighbours `w` of `v` with `<w - v, v - c> >= ρ|w - v|`, in fixture order.
pub fn rm_successors(
    s: &WeightedSubdivision,
    v: VertexId,
    center: &PointR2,
    rho: &Rational,
) -> Result<Vec<VertexId>, SubdivisionError> {
    successors_with(s, v, center, rho, SuccessorRule::Certain)
}

/// Neighbours `w` of `v` satisfying the radial condition for at least one reference
/// point within `ρ` of `center`.
pub fn rm_possible_successors(
    s: &WeightedSubdivision,
    v: VertexId,
    center: &PointR2,
    rho: &Rational,
) -> Result<Vec<VertexId>, SubdivisionError> {
    successors_with(s, v, center, rho, SuccessorRule::Possible)
}

/// Extends `prefix` while exactly one unvisited successor exists.
pub fn forced_path(
    s: &WeightedSubdivision,
    prefix: &[VertexId],
    center: &PointR2,
    rho: &Rational,
    stop_at_boundary: bool,
) -> Result<(PathInG, PathStatus), SubdivisionError> {
    forced_path_with(s, prefix, center, rho, stop_at_boundary, SuccessorRule::Certain)
}

pub fn forced_path_with(
    s: &WeightedSubdivision,
    prefix: &[VertexId],
    center: &PointR2,
    rho: &Rational,
    stop_at_boundary: bool,
    rule: SuccessorRule,
) -> Result<(PathInG, PathStatus), SubdivisionError> {
    let Some(&start) = prefix.first() else {
        return Err(SubdivisionError::Parse("forced path needs a start vertex".into()));
    };
    s.node_of(start)?;
    let mut vertices = vec![start];
    for &v in &prefix[1..] {
        let (a, b) = (s.node_of(*vertices.last().expect("nonempty"))?, s.node_of(v)?);
        if !s.has_edge(a, b) || vertices.contains(&v) {
            return Err(SubdivisionError::Parse(format!("prefix is not a simple path at {v}")));
        }
        vertices.push(v);
    }
    loop {
        let v = *vertices.last().expect("nonempty");
        if stop_at_boundary && v.is_corner() {
            return Ok((PathInG { vertices, starts_at_edge_point: false }, PathStatus::ReachedBoundary));
        }
        let options: Vec<VertexId> = successors_with(s, v, center, rho, rule)?
            .into_iter()
            .filter(|w| !vertices.contains(w))
            .collect();
        let status = match options.len() {
            0 if v.is_corner() => PathStatus::ReachedBoundary,
            0 => PathStatus::DeadEnd { at: v },
            1 => {
                vertices.push(options[0]);
                continue;
            }
            _ => PathStatus::Branched { at: v, options },
        };
        return Ok((PathInG { vertices, starts_at_edge_point: false }, status));
    }
}
