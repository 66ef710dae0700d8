//! Weighted convex subdivisions of a convex polygon: data model, file format,
//! validation, forced radially monotone paths and the non-monotonicity certificate.

mod certificate;
mod delta;
mod io;
mod paths;
mod symmetry;
mod triangulation;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::geom::{int, orient2d, rat, sqrt_bounds, PointR2, Rational};

pub use certificate::{
    nonmonotonicity_certificate, nonmonotonicity_certificate_with, CertificatePlan, Certificate, ExclusionMargin,
    PathRecord, StepRecord, Verdict,
};
pub use delta::{delta, Delta};
pub use io::{load_subdivision, load_subdivision_with_eps, parse_subdivision, parse_subdivision_unchecked, DEFAULT_EPS};
pub use paths::{
    forced_path, forced_path_with, rm_possible_successors, rm_successors, PathInG, PathStatus, SuccessorRule,
};
pub use symmetry::{central_symmetry_check, central_symmetry_report};
pub use triangulation::{canonical_triangulation, TriRecord, Triangulation};
pub use validate::{validate, CheckResult, ValidationReport};

/// A vertex of the subdivision graph: a boundary corner `b<k>` or a signed interior id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    Corner(u32),
    Interior(i64),
}

impl VertexId {
    pub fn is_corner(&self) -> bool {
        matches!(self, VertexId::Corner(_))
    }

    /// The mirror id under `i -> -i`; corners map to themselves.
    pub fn negated(&self) -> VertexId {
        match *self {
            VertexId::Interior(i) => VertexId::Interior(-i),
            c => c,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Corner(k) => write!(f, "b{k}"),
            VertexId::Interior(i) => write!(f, "{i}"),
        }
    }
}

impl FromStr for VertexId {
    type Err = SubdivisionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('b') {
            return rest
                .parse::<u32>()
                .map(VertexId::Corner)
                .map_err(|_| SubdivisionError::Parse(format!("bad vertex id {s:?}")));
        }
        match t.parse::<i64>() {
            Ok(0) | Err(_) => Err(SubdivisionError::Parse(format!("bad vertex id {s:?}"))),
            Ok(i) => Ok(VertexId::Interior(i)),
        }
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            VertexId::Interior(i) => s.serialize_i64(*i),
            VertexId::Corner(_) => s.serialize_str(&self.to_string()),
        }
    }
}

/// How an interior vertex's weight is determined.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Fixed(Rational),
    /// The small weight ε.
    AutoEps,
    /// An equal share of whatever mass the other vertices leave.
    AutoRest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorVertex {
    pub id: i64,
    pub point: PointR2,
    pub weight: Rational,
    pub spec: WeightSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
}

/// Records that a corner coordinate equals `scale * sqrt(3) + offset`; the stored
/// decimal is an approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Sqrt3Coordinate {
    pub corner: u32,
    pub axis: Axis,
    pub scale: Rational,
    pub offset: Rational,
}

impl Sqrt3Coordinate {
    /// Rational lower and upper bounds of the true coordinate.
    pub fn bounds(&self, bits: u32) -> (Rational, Rational) {
        let (lo, hi) = sqrt_bounds(&int(3), bits);
        let a = &self.scale * &lo + &self.offset;
        let b = &self.scale * &hi + &self.offset;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SubdivisionError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violation [{check}]: {detail}")]
    Invariant { check: String, detail: String },
    #[error("unknown vertex id {0}")]
    UnknownVertex(String),
}

/// A convex polygon `P` with a weighted planar graph `G` subdividing it into convex faces.
#[derive(Clone, Debug)]
pub struct WeightedSubdivision {
    pub name: String,
    pub boundary: Vec<PointR2>,
    pub interior: Vec<InteriorVertex>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub faces: Vec<Vec<VertexId>>,
    pub sqrt3: Vec<Sqrt3Coordinate>,
    pub eps: Rational,
    pub source_hash: String,
    index: HashMap<VertexId, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_nodes: Vec<(usize, usize)>,
    face_nodes: Vec<Vec<usize>>,
}

impl WeightedSubdivision {
    /// Builds the indexed structure. Fails only when ids cannot be resolved; every
    /// geometric invariant is left to [`validate`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        name: &str,
        boundary: Vec<PointR2>,
        interior: Vec<(i64, PointR2, WeightSpec)>,
        edges: Vec<(VertexId, VertexId)>,
        faces: Vec<Vec<VertexId>>,
        sqrt3: Vec<Sqrt3Coordinate>,
        eps: Rational,
        source_hash: String,
    ) -> Result<Self, SubdivisionError> {
        let ids_err = |detail: String| SubdivisionError::Invariant { check: "ids".into(), detail };
        let nb = boundary.len();
        let mut index = HashMap::new();
        for k in 0..nb {
            index.insert(VertexId::Corner(k as u32), k);
        }
        for (j, (id, _, _)) in interior.iter().enumerate() {
            if *id == 0 {
                return Err(ids_err("interior id 0 is reserved".into()));
            }
            if index.insert(VertexId::Interior(*id), nb + j).is_some() {
                return Err(ids_err(format!("duplicate interior id {id}")));
            }
        }
        let resolve = |v: &VertexId| index.get(v).copied().ok_or_else(|| ids_err(format!("unknown vertex id {v}")));
        let mut adjacency = vec![Vec::new(); nb + interior.len()];
        let mut edge_nodes = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (u, v) in &edges {
            let (a, b) = (resolve(u)?, resolve(v)?);
            if a == b {
                return Err(ids_err(format!("self-loop at {u}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(ids_err(format!("duplicate edge {u}-{v}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            edge_nodes.push((a, b));
        }
        let mut face_nodes = Vec::with_capacity(faces.len());
        for f in &faces {
            face_nodes.push(f.iter().map(&resolve).collect::<Result<Vec<_>, _>>()?);
        }
        for s in &sqrt3 {
            if s.corner as usize >= nb {
                return Err(ids_err(format!("sqrt3 annotation names missing corner b{}", s.corner)));
            }
        }
        let interior = interior
            .into_iter()
            .map(|(id, point, spec)| InteriorVertex { id, point, weight: Rational::zero(), spec })
            .collect();
        let mut s = WeightedSubdivision {
            name: name.to_string(),
            boundary,
            interior,
            edges,
            faces,
            sqrt3,
            eps: eps.clone(),
            source_hash,
            index,
            adjacency,
            edge_nodes,
            face_nodes,
        };
        s.resolve_weights(&eps);
        Ok(s)
    }

    fn resolve_weights(&mut self, eps: &Rational) {
        self.eps = eps.clone();
        let mut fixed = Rational::zero();
        let mut n_eps = 0i64;
        let mut n_rest = 0i64;
        for v in &self.interior {
            match &v.spec {
                WeightSpec::Fixed(w) => fixed += w,
                WeightSpec::AutoEps => n_eps += 1,
                WeightSpec::AutoRest => n_rest += 1,
            }
        }
        let rest = if n_rest > 0 {
            (Rational::one() - fixed - eps * int(n_eps)) / int(n_rest)
        } else {
            Rational::zero()
        };
        for v in &mut self.interior {
            v.weight = match &v.spec {
                WeightSpec::Fixed(w) => w.clone(),
                WeightSpec::AutoEps => eps.clone(),
                WeightSpec::AutoRest => rest.clone(),
            };
        }
    }

    /// The same subdivision with automatic weights recomputed for `eps`.
    pub fn with_eps(&self, eps: &Rational) -> Self {
        let mut s = self.clone();
        s.resolve_weights(eps);
        s
    }

    pub fn uses_auto_weights(&self) -> bool {
        self.interior.iter().any(|v| !matches!(v.spec, WeightSpec::Fixed(_)))
    }

    /// The same combinatorics with every point mapped by `f` (which must preserve
    /// orientation).
    pub fn map_points<F: Fn(&PointR2) -> PointR2>(&self, f: F) -> Self {
        let mut s = self.clone();
        for b in &mut s.boundary {
            *b = f(b);
        }
        for v in &mut s.interior {
            v.point = f(&v.point);
        }
        s.sqrt3.clear();
        s
    }

    /// The same subdivision with one corner coordinate replaced.
    pub fn with_corner_coordinate(&self, corner: u32, axis: Axis, value: Rational) -> Self {
        let mut s = self.clone();
        let p = &mut s.boundary[corner as usize];
        match axis {
            Axis::X => p.x = value,
            Axis::Y => p.y = value,
        }
        s
    }

    pub fn corner_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn node_count(&self) -> usize {
        self.boundary.len() + self.interior.len()
    }

    pub fn node_id(&self, n: usize) -> VertexId {
        let nb = self.boundary.len();
        if n < nb {
            VertexId::Corner(n as u32)
        } else {
            VertexId::Interior(self.interior[n - nb].id)
        }
    }

    pub fn node_point(&self, n: usize) -> &PointR2 {
        let nb = self.boundary.len();
        if n < nb {
            &self.boundary[n]
        } else {
            &self.interior[n - nb].point
        }
    }

    pub fn node_of(&self, id: VertexId) -> Result<usize, SubdivisionError> {
        self.index.get(&id).copied().ok_or_else(|| SubdivisionError::UnknownVertex(id.to_string()))
    }

    pub fn point(&self, id: VertexId) -> Result<&PointR2, SubdivisionError> {
        Ok(self.node_point(self.node_of(id)?))
    }

    pub fn is_corner_node(&self, n: usize) -> bool {
        n < self.boundary.len()
    }

    /// Weight of an interior node; `None` for corners.
    pub fn node_weight(&self, n: usize) -> Option<&Rational> {
        let nb = self.boundary.len();
        (n >= nb).then(|| &self.interior[n - nb].weight)
    }

    pub fn interior_nodes(&self) -> std::ops::Range<usize> {
        self.boundary.len()..self.node_count()
    }

    /// Neighbours of a node in fixture edge order.
    pub fn neighbors(&self, n: usize) -> &[usize] {
        &self.adjacency[n]
    }

    pub fn edge_nodes(&self) -> &[(usize, usize)] {
        &self.edge_nodes
    }

    pub fn face_nodes(&self) -> &[Vec<usize>] {
        &self.face_nodes
    }

    /// Neighbours of `n` in counterclockwise order around it, starting from the positive x-axis.
    pub fn ccw_neighbors(&self, n: usize) -> Vec<usize> {
        let p = self.node_point(n);
        let mut out = self.neighbors(n).to_vec();
        out.sort_by(|&a, &b| validate::angular_cmp(&(self.node_point(a) - p), &(self.node_point(b) - p)));
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    /// True for edges lying on the boundary of `P`.
    pub fn is_boundary_side(&self, a: usize, b: usize) -> bool {
        let nb = self.boundary.len();
        a < nb && b < nb && ((a + 1) % nb == b || (b + 1) % nb == a)
    }

    /// Twice the signed area of `P`.
    pub fn boundary_area2(&self) -> Rational {
        polygon_area2(&self.boundary.iter().collect::<Vec<_>>())
    }

    /// A rational upper bound on the diameter of `P` (exact when it is rational).
    pub fn diameter_upper_bound(&self) -> Rational {
        let mut best = Rational::zero();
        for i in 0..self.boundary.len() {
            for j in i + 1..self.boundary.len() {
                let d = (&self.boundary[i] - &self.boundary[j]).norm_sq();
                if d > best {
                    best = d;
                }
            }
        }
        let (lo, hi) = sqrt_bounds(&best, 60);
        if &lo * &lo == best {
            lo
        } else {
            hi
        }
    }

    /// The weight-averaged centroid of the given interior nodes.
    pub fn weighted_centroid(&self, nodes: &[usize]) -> Option<(PointR2, Rational)> {
        let mut total = Rational::zero();
        let mut acc = PointR2::origin();
        for &n in nodes {
            let w = self.node_weight(n)?;
            total += w;
            acc = &acc + &self.node_point(n).scale(w);
        }
        if !total.is_positive() {
            return None;
        }
        Some((acc.scale(&(Rational::one() / &total)), total))
    }

    /// Index of the boundary edge with lexicographically smallest endpoint pair.
    pub fn base_edge(&self) -> (usize, usize) {
        let nb = self.boundary.len();
        let key = |k: usize| {
            let (a, b) = (&self.boundary[k], &self.boundary[(k + 1) % nb]);
            let (lo, hi) = if (&a.x, &a.y) <= (&b.x, &b.y) { (a, b) } else { (b, a) };
            (lo.x.clone(), lo.y.clone(), hi.x.clone(), hi.y.clone())
        };
        let k = (0..nb).min_by(|&i, &j| key(i).cmp(&key(j))).expect("nonempty boundary");
        (k, (k + 1) % nb)
    }
}

/// Twice the signed area of a polygon.
pub fn polygon_area2(pts: &[&PointR2]) -> Rational {
    let n = pts.len();
    let mut acc = Rational::zero();
    for k in 0..n {
        acc += pts[k].cross(pts[(k + 1) % n]);
    }
    acc
}

/// Exact strict-interior test for a point against a counterclockwise convex polygon.
pub fn strictly_inside_convex(p: &PointR2, poly: &[PointR2]) -> bool {
    let n = poly.len();
    (0..n).all(|k| orient2d(&poly[k], &poly[(k + 1) % n], p) > 0)
}

/// `1e-6` as an exact rational.
pub fn default_eps() -> Rational {
    rat(1, 1_000_000)
}
